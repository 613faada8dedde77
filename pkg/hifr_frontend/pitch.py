"""NCCF pitch tracking with Viterbi smoothing.

Every frame is scored against a range of integer lags with the normalized
cross-correlation; a single Viterbi pass then picks one lag per frame,
trading correlation against log-lag jumps between frames. The track is
continuous: unvoiced regions still get an f0, and the probability of
voicing tells the consumer how much to trust it.
"""

import logging
from typing import Optional

import numpy as np
from scipy import fft as sp_fft

from .data_types import FeatureMatrix, PitchConfig, PitchTrack, _next_power_of_two
from .enums import FeatureKind

logger = logging.getLogger(__name__)

_FRAMES_PER_CHUNK = 2048


def compute_nccf(frame: np.ndarray, lags: np.ndarray, floor: float = 1e-4) -> np.ndarray:
    """NCCF of one frame at each lag, computed directly over the overlap."""
    x = np.asarray(frame, dtype=np.float64)
    lags = np.asarray(lags, dtype=np.int64)
    if lags.size == 0:
        raise ValueError("Lag range is empty")
    if lags.max() >= len(x):
        raise ValueError(f"Frame length {len(x)} must exceed the maximum lag {lags.max()}")
    scores = np.empty(len(lags))
    for i, lag in enumerate(lags):
        head, tail = x[: len(x) - lag], x[lag:]
        denom = np.sqrt((head @ head + floor) * (tail @ tail + floor))
        scores[i] = (head @ tail) / denom
    return np.clip(scores, -1.0, 1.0)


def _nccf_matrix(frames: np.ndarray, lags: np.ndarray, floor: float) -> np.ndarray:
    """NCCF of every frame at every lag, shape (T, len(lags))."""
    num, length = frames.shape
    nfft = _next_power_of_two(2 * length)
    out = np.empty((num, len(lags)))
    for start in range(0, num, _FRAMES_PER_CHUNK):
        x = frames[start : start + _FRAMES_PER_CHUNK]
        spec = sp_fft.rfft(x, n=nfft, axis=1)
        corr = sp_fft.irfft(spec.real**2 + spec.imag**2, n=nfft, axis=1)[:, lags]
        csum = np.concatenate([np.zeros((len(x), 1)), np.cumsum(x * x, axis=1)], axis=1)
        e_head = csum[:, length - lags]
        e_tail = csum[:, length : length + 1] - csum[:, lags]
        out[start : start + len(x)] = corr / np.sqrt((e_head + floor) * (e_tail + floor))
    return np.clip(out, -1.0, 1.0)


def _viterbi(local_cost: np.ndarray, log_lags: np.ndarray, weight: float) -> np.ndarray:
    """Minimum-cost state sequence under an L1 penalty on log-lag changes.

    The min over predecessors of prev[j] + w|u_i - u_j| is evaluated with a
    forward and a backward running minimum, O(S) per frame.
    """
    num_frames, num_states = local_cost.shape
    index = np.arange(num_states)
    back = np.empty((num_frames, num_states), dtype=np.int32)
    prev = local_cost[0] - local_cost[0].min()
    wu = weight * log_lags

    for t in range(1, num_frames):
        a = prev - wu
        fwd = np.minimum.accumulate(a)
        fwd_idx = np.maximum.accumulate(np.where(a == fwd, index, 0))

        b = (prev + wu)[::-1]
        bwd = np.minimum.accumulate(b)
        bwd_idx = num_states - 1 - np.maximum.accumulate(np.where(b == bwd, index, 0))

        from_below = fwd + wu
        from_above = bwd[::-1] - wu
        take_below = from_below <= from_above
        back[t] = np.where(take_below, fwd_idx, bwd_idx[::-1])
        cost = np.where(take_below, from_below, from_above) + local_cost[t]
        prev = cost - cost.min()

    path = np.empty(num_frames, dtype=np.int64)
    path[-1] = int(np.argmin(prev))
    for t in range(num_frames - 1, 0, -1):
        path[t - 1] = back[t, path[t]]
    return path


def delta(values: np.ndarray, window: int = 2) -> np.ndarray:
    """Least-squares slope over +-window frames, edges replicated."""
    values = np.asarray(values, dtype=np.float64)
    if len(values) == 0:
        return values.copy()
    n = len(values)
    padded = np.pad(values, window, mode="edge")
    num = np.zeros(n)
    for k in range(1, window + 1):
        num += k * (padded[window + k : window + k + n] - padded[window - k : window - k + n])
    return num / (2.0 * sum(k * k for k in range(1, window + 1)))


def track_pitch(
    frames: np.ndarray,
    cfg: PitchConfig,
    sample_rate: int,
    frame_rate: Optional[float] = None,
) -> PitchTrack:
    """Pitch, probability of voicing and delta log-pitch for every frame."""
    frames = np.asarray(frames, dtype=np.float64)
    if frames.ndim != 2:
        raise ValueError(f"Frames must be 2-D (T, frame_length), got shape {frames.shape}")
    lags = cfg.lag_range(sample_rate, frames.shape[1])
    if frames.shape[0] == 0:
        empty = np.zeros(0)
        return PitchTrack(empty, empty, empty, frame_rate=frame_rate)

    nccf = _nccf_matrix(frames, lags, cfg.nccf_floor)
    local_cost = -nccf + cfg.soft_min_f0 * lags / sample_rate
    path = _viterbi(local_cost, np.log(lags), cfg.transition_weight)

    f0 = sample_rate / lags[path]
    pov = np.clip(nccf.max(axis=1), 0.0, 1.0)
    delta_log_pitch = delta(np.log(f0), cfg.delta_window)
    logger.debug(
        f"Tracked pitch over {len(f0)} frames, {len(lags)} lags, median f0 {np.median(f0):.1f} Hz"
    )
    return PitchTrack(f0, pov, delta_log_pitch, frame_rate=frame_rate)


def pitch_features(track: PitchTrack, utt_id: str = "") -> FeatureMatrix:
    """T x 3 matrix [ln f0, delta log-pitch, pov]."""
    values = np.column_stack([np.log(track.f0), track.delta_log_pitch, track.pov])
    return FeatureMatrix(
        values.reshape(track.num_frames, 3),
        frame_rate=track.frame_rate,
        kind=FeatureKind.PITCH,
        utt_id=utt_id,
    )
