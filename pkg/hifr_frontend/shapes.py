"""Temporal shape arithmetic of the VGG + pBLSTM encoder.

Only the time axis is tracked: how many encoder frames survive the conv
and pooling layers and the pyramidal BLSTM subsampling for a given number
of input feature frames.
"""

import logging
import math
from dataclasses import dataclass, replace
from typing import Iterable, Union

from .data_types import EncoderSpec, FramingConfig, LayerGeometry, round_half_away
from .enums import LayerKind, PoolRounding
from .framing import num_frames

logger = logging.getLogger(__name__)


def layer_out_len(
    length: int,
    kernel: int,
    stride: int,
    padding: int = 0,
    rounding: Union[str, PoolRounding] = PoolRounding.FLOOR,
) -> int:
    """Output length of one sliding-window layer; 0 when no window fits."""
    if length < 0:
        raise ValueError(f"Length must be >= 0, got {length}")
    span = length + 2 * padding - kernel
    if PoolRounding.from_value(rounding) is PoolRounding.CEIL:
        out = -(-span // stride) + 1
    else:
        out = span // stride + 1
    return max(0, out)


def _apply_layer(length: int, layer: LayerGeometry, rounding: PoolRounding) -> int:
    if layer.kind is LayerKind.CONV:
        rounding = PoolRounding.FLOOR
    return layer_out_len(length, layer.kernel, layer.stride, layer.padding, rounding)


def encoder_output_length(length: int, spec: EncoderSpec) -> int:
    """Encoder frames produced from `length` input frames."""
    if length < 0:
        raise ValueError(f"Length must be >= 0, got {length}")
    for layer in spec.layers:
        length = _apply_layer(length, layer, spec.pool_rounding)
    for factor in spec.pblstm_subsample:
        length = -(-length // factor)
    return length


def total_subsample_factor(spec: EncoderSpec) -> int:
    """Product of every layer stride and every pBLSTM factor."""
    return math.prod(layer.stride for layer in spec.layers) * math.prod(spec.pblstm_subsample)


@dataclass(frozen=True)
class ShapeRow:
    """Frame counts for one (duration, frame rate) pair."""

    duration: float
    frame_rate: float
    input_frames: int
    encoder_frames: int
    extracted_frames: int
    extracted_encoder_frames: int


def frame_rate_table(
    durations: Iterable[float],
    frame_rates: Iterable[float],
    spec: EncoderSpec,
    framing: FramingConfig,
    sample_rate: int = 16000,
) -> list:
    """Encoder lengths for every duration x frame rate combination.

    `input_frames` is the nominal count round(duration * frame_rate);
    `extracted_frames` is what framing actually yields for that many
    seconds of audio at `sample_rate`.
    """
    frame_rates = list(frame_rates)
    rows = []
    for duration in durations:
        if duration < 0:
            raise ValueError(f"Duration must be >= 0, got {duration}")
        samples = round_half_away(duration * sample_rate)
        for rate in frame_rates:
            nominal = round_half_away(duration * rate)
            extracted = num_frames(samples, replace(framing, frame_rate=rate), sample_rate)
            rows.append(
                ShapeRow(
                    duration=duration,
                    frame_rate=rate,
                    input_frames=nominal,
                    encoder_frames=encoder_output_length(nominal, spec),
                    extracted_frames=extracted,
                    extracted_encoder_frames=encoder_output_length(extracted, spec),
                )
            )
    logger.debug(f"Computed {len(rows)} shape rows (total subsampling {total_subsample_factor(spec)})")
    return rows
