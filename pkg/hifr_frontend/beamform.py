"""GCC-PHAT delay estimation and weighted delay-and-sum beamforming.

Delays are integer samples of a channel relative to the reference
channel; a positive delay means the channel lags the reference, so
aligning it reads ``channel[n + delay]``.
"""

import logging
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np
from scipy import fft as sp_fft

from .data_types import AudioBuffer, BeamformConfig, TdoaEstimate, _next_power_of_two
from .errors import BeamformError

logger = logging.getLogger(__name__)

_PHAT_FLOOR = 1e-12


def _phat_correlation(ref: np.ndarray, other: np.ndarray, nfft: int) -> np.ndarray:
    cross = np.conj(sp_fft.rfft(ref, n=nfft)) * sp_fft.rfft(other, n=nfft)
    return sp_fft.irfft(cross / np.maximum(np.abs(cross), _PHAT_FLOOR), n=nfft)


def gcc_phat_tdoa(ref: np.ndarray, other: np.ndarray, max_delay: int) -> TdoaEstimate:
    """Delay of `other` relative to `ref` within [-max_delay, max_delay].

    Confidence is the phase-transform peak divided by the reference's
    peak against itself, clipped to [0, 1].
    """
    ref = np.asarray(ref, dtype=np.float64)
    other = np.asarray(other, dtype=np.float64)
    if max_delay < 1:
        raise ValueError(f"max_delay must be >= 1, got {max_delay}")
    if len(ref) != len(other):
        raise ValueError(f"Channel lengths differ: {len(ref)} vs {len(other)}")
    if len(ref) < 4 * max_delay:
        raise ValueError(
            f"Channels of {len(ref)} samples are too short for max_delay {max_delay} "
            f"(need >= {4 * max_delay})"
        )
    if not np.any(ref) or not np.any(other):
        return TdoaEstimate(0, 0.0)

    nfft = _next_power_of_two(2 * len(ref))
    cc = _phat_correlation(ref, other, nfft)
    # lags -max_delay..-1 wrap to the end of the circular correlation
    window = np.concatenate([cc[-max_delay:], cc[: max_delay + 1]])
    best = int(np.argmax(window))
    self_peak = _phat_correlation(ref, ref, nfft)[0]
    confidence = float(np.clip(window[best] / self_peak, 0.0, 1.0)) if self_peak > 0 else 0.0
    return TdoaEstimate(best - max_delay, confidence)


def normalize_weights(confidences: Sequence[float]) -> np.ndarray:
    """Non-negative weights summing to 1; uniform when every confidence is 0."""
    weights = np.clip(np.asarray(confidences, dtype=np.float64), 0.0, None)
    if weights.size == 0:
        raise BeamformError("No channels to weight")
    total = weights.sum()
    if total <= 0:
        return np.full(weights.size, 1.0 / weights.size)
    return weights / total


def _advance(signal: np.ndarray, delay: int) -> np.ndarray:
    """signal[n + delay], zero outside [0, L)."""
    out = np.zeros_like(signal)
    length = len(signal)
    if abs(delay) >= length:
        return out
    if delay >= 0:
        out[: length - delay] = signal[delay:]
    else:
        out[-delay:] = signal[: length + delay]
    return out


def delay_and_sum(
    channels: AudioBuffer,
    tdoas: Sequence[Union[TdoaEstimate, int]],
    weights: Sequence[float],
) -> AudioBuffer:
    """Mono sum of delay-compensated, weighted channels."""
    delays = [t.delay if isinstance(t, TdoaEstimate) else int(t) for t in tdoas]
    weights = np.asarray(weights, dtype=np.float64)
    if len(delays) != channels.channels or len(weights) != channels.channels:
        raise BeamformError(
            f"{channels.channels} channels need as many delays and weights, "
            f"got {len(delays)} and {len(weights)}"
        )
    if np.any(weights < 0) or abs(weights.sum() - 1.0) > 1e-9:
        raise BeamformError(f"Weights must be non-negative and sum to 1, got {weights.tolist()}")

    output = np.zeros(channels.num_samples)
    for samples, delay, weight in zip(channels.samples, delays, weights):
        if weight:
            output += weight * _advance(samples, delay)
    return AudioBuffer(output, channels.sample_rate)


@dataclass(eq=False)
class BeamformResult:
    """Beamformed signal with the per-channel delays and weights used."""

    output: AudioBuffer
    tdoas: list
    weights: np.ndarray


def beamform(buffer: AudioBuffer, cfg: BeamformConfig) -> BeamformResult:
    """Estimate delays against the reference channel, weight by confidence, sum."""
    if cfg.reference_channel >= buffer.channels:
        raise BeamformError(
            f"Reference channel {cfg.reference_channel} out of range ({buffer.channels} channels)"
        )
    ref = buffer.samples[cfg.reference_channel]
    tdoas = []
    for index, samples in enumerate(buffer.samples):
        if index == cfg.reference_channel:
            tdoas.append(TdoaEstimate(0, 1.0 if np.any(ref) else 0.0))
        else:
            tdoas.append(gcc_phat_tdoa(ref, samples, cfg.max_delay_samples))
    weights = normalize_weights([t.confidence for t in tdoas])
    for index, (tdoa, weight) in enumerate(zip(tdoas, weights)):
        logger.debug(
            f"Channel {index}: delay {tdoa.delay} samples, confidence {tdoa.confidence:.3f}, "
            f"weight {weight:.3f}"
        )
    return BeamformResult(delay_and_sum(buffer, tdoas, weights), tdoas, weights)
