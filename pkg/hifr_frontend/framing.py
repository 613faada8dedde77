"""Pre-emphasis, framing, windowing and magnitude spectra."""

import logging
from typing import Optional

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from scipy import fft as sp_fft
from scipy.signal import get_window

from .data_types import AudioBuffer, FramingConfig, SpectrumMatrix

logger = logging.getLogger(__name__)


def preemphasize(samples: np.ndarray, coeff: float) -> np.ndarray:
    """y[n] = x[n] - coeff * x[n-1], with x[-1] taken as x[0]."""
    if not 0.0 <= coeff < 1.0:
        raise ValueError(f"Pre-emphasis coefficient must be in [0, 1), got {coeff}")
    x = np.asarray(samples, dtype=np.float64)
    y = x.copy()
    if len(x):
        y[1:] -= coeff * x[:-1]
        y[0] -= coeff * x[0]
    return y


def num_frames(num_samples: int, cfg: FramingConfig, sample_rate: int) -> int:
    """Number of frames extracted from num_samples samples."""
    cfg.validate(sample_rate)
    hop = cfg.hop_samples(sample_rate)
    frame_length = cfg.frame_length_samples(sample_rate)
    if not cfg.snip_edges:
        return (num_samples + hop // 2) // hop
    if num_samples < frame_length:
        return 0
    return (num_samples - frame_length) // hop + 1


def _mirrored_frames(x: np.ndarray, count: int, hop: int, frame_length: int) -> np.ndarray:
    # frame i is centred on i*hop + hop/2; out-of-range samples mirror symmetrically
    starts = np.arange(count) * hop + hop // 2 - frame_length // 2
    index = starts[:, np.newaxis] + np.arange(frame_length)
    n = len(x)
    for _ in range(2):
        index = np.where(index < 0, -index - 1, index)
        index = np.where(index >= n, 2 * n - 1 - index, index)
    return x[np.clip(index, 0, n - 1)]


def frame_signal(
    buffer: AudioBuffer,
    cfg: FramingConfig,
    rng: Optional[np.random.Generator] = None,
) -> np.ndarray:
    """Slice a mono buffer into frames, shape (T, frame_length).

    Frame i covers samples [i*hop, i*hop + frame_length). When dithering is
    enabled uniform noise in [-a, a] drawn from `rng` is added per frame.
    """
    cfg.validate(buffer.sample_rate)
    x = buffer.mono
    hop = cfg.hop_samples(buffer.sample_rate)
    frame_length = cfg.frame_length_samples(buffer.sample_rate)
    count = num_frames(len(x), cfg, buffer.sample_rate)

    if count == 0:
        frames = np.zeros((0, frame_length))
    elif cfg.snip_edges:
        frames = sliding_window_view(x, frame_length)[::hop][:count].copy()
    else:
        frames = _mirrored_frames(x, count, hop, frame_length)

    if cfg.dither_amplitude > 0 and count:
        if rng is None:
            raise ValueError("Dithering requires a seeded random generator")
        frames += rng.uniform(-cfg.dither_amplitude, cfg.dither_amplitude, frames.shape)
    return frames


def window_and_spectrum(
    frames: np.ndarray,
    cfg: FramingConfig,
    sample_rate: int,
) -> SpectrumMatrix:
    """Window each frame, zero-pad to the FFT size and take |DFT| of bins 0..N/2."""
    frames = np.atleast_2d(np.asarray(frames, dtype=np.float64))
    fft_size = cfg.padded_fft_size(sample_rate)
    frame_length = frames.shape[1]
    if frame_length > fft_size:
        raise ValueError(f"Frame length {frame_length} exceeds fft_size {fft_size}")
    window = get_window(cfg.window.scipy_name, frame_length, fftbins=False)
    spectrum = np.abs(sp_fft.rfft(frames * window, n=fft_size, axis=1))
    return SpectrumMatrix(spectrum, frame_rate=cfg.frame_rate, fft_size=fft_size)
