"""Mel filterbank, log filterbank energies, mean normalization and concatenation."""

import logging
from functools import lru_cache
from typing import Optional, Union

import numpy as np

from .data_types import FeatureMatrix, MelFilterbank, SpectrumMatrix
from .enums import FeatureKind
from .errors import FeatureMismatchError, FilterbankGeometryError

logger = logging.getLogger(__name__)

ArrayLike = Union[float, np.ndarray]


def mel_scale(freq: ArrayLike) -> ArrayLike:
    """HTK mel scale: 1127 ln(1 + f/700)."""
    if np.any(np.asarray(freq) < 0):
        raise ValueError("Frequencies must be non-negative")
    return 1127.0 * np.log1p(np.asarray(freq, dtype=np.float64) / 700.0)


def inverse_mel_scale(mel: ArrayLike) -> ArrayLike:
    return 700.0 * np.expm1(np.asarray(mel, dtype=np.float64) / 1127.0)


@lru_cache(maxsize=32)
def build_mel_filterbank(
    num_filters: int,
    sample_rate: int,
    fft_size: int,
    low_freq: float = 20.0,
    high_freq: Optional[float] = None,
) -> MelFilterbank:
    """Triangular filters with edges equally spaced in mel between low and high.

    Weights are evaluated at the FFT bin centre frequencies and are not
    normalized to unit area. Results are cached; the returned object is
    read-only.
    """
    nyquist = sample_rate / 2.0
    high_freq = nyquist if high_freq is None else float(high_freq)
    if num_filters < 1:
        raise ValueError(f"num_filters must be >= 1, got {num_filters}")
    if not 0.0 <= low_freq < high_freq <= nyquist:
        raise ValueError(
            f"Need 0 <= low_freq < high_freq <= Nyquist ({nyquist} Hz), "
            f"got {low_freq}, {high_freq}"
        )

    edges = np.linspace(mel_scale(low_freq), mel_scale(high_freq), num_filters + 2)
    left, center, right = edges[:-2, None], edges[1:-1, None], edges[2:, None]
    bin_mel = mel_scale(np.arange(fft_size // 2 + 1) * sample_rate / fft_size)[None, :]

    rising = (bin_mel - left) / (center - left)
    falling = (right - bin_mel) / (right - center)
    weights = np.clip(np.minimum(rising, falling), 0.0, None)

    empty = np.flatnonzero(weights.max(axis=1) <= 0.0)
    if len(empty):
        raise FilterbankGeometryError(
            f"{num_filters} filters over [{low_freq}, {high_freq}] Hz with fft_size {fft_size}: "
            f"filter {int(empty[0])} covers no FFT bin"
        )
    logger.debug(f"Built {num_filters}-filter mel bank for {sample_rate} Hz / fft {fft_size}")
    return MelFilterbank(
        num_filters=num_filters,
        low_freq=float(low_freq),
        high_freq=high_freq,
        sample_rate=sample_rate,
        fft_size=fft_size,
        weights=weights,
        center_freqs=inverse_mel_scale(center[:, 0]),
    )


def compute_fbank(
    spectrum: SpectrumMatrix,
    fb: MelFilterbank,
    log_floor: float = 1e-10,
    utt_id: str = "",
) -> FeatureMatrix:
    """ln(max(floor, sum_k |S(t,k)| w_j(k))) for every frame t and filter j."""
    if spectrum.fft_size != fb.fft_size:
        raise FeatureMismatchError(
            f"Spectrum fft_size {spectrum.fft_size} does not match filterbank {fb.fft_size}"
        )
    energies = spectrum.values @ fb.weights.T
    values = np.log(np.maximum(energies, log_floor))
    return FeatureMatrix(values, frame_rate=spectrum.frame_rate, kind=FeatureKind.FBANK, utt_id=utt_id)


def mean_normalize(feat: FeatureMatrix) -> FeatureMatrix:
    """Subtract each column's utterance mean."""
    if feat.num_frames < 1:
        raise ValueError(f"Cannot mean-normalize {feat.utt_id!r}: no frames")
    return feat.with_values(feat.values - feat.values.mean(axis=0, keepdims=True))


def concat_features(
    a: FeatureMatrix,
    b: FeatureMatrix,
    tolerance_frames: int = 2,
) -> FeatureMatrix:
    """Columns of a then b, both truncated to the shorter frame count."""
    if a.utt_id != b.utt_id:
        raise FeatureMismatchError(f"Utterance ids differ: {a.utt_id!r} vs {b.utt_id!r}")
    if a.frame_rate != b.frame_rate:
        raise FeatureMismatchError(
            f"{a.utt_id}: frame rates differ ({a.frame_rate} vs {b.frame_rate})"
        )
    if abs(a.num_frames - b.num_frames) > tolerance_frames:
        raise FeatureMismatchError(
            f"{a.utt_id}: frame counts {a.num_frames} and {b.num_frames} differ by more "
            f"than {tolerance_frames}"
        )
    rows = min(a.num_frames, b.num_frames)
    values = np.hstack([a.values[:rows], b.values[:rows]])
    return a.with_values(values, kind=FeatureKind.combine(a.kind, b.kind))
