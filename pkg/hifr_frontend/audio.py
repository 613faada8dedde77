"""Audio I/O and band-limited resampling.

WAV headers are walked chunk by chunk so that every malformed input is
reported with the byte offset of the offending chunk; sample payloads are
decoded and encoded with soundfile. Resampling is a
Hann-windowed sinc interpolator evaluated directly at the output instants;
the signal is taken as zero outside [0, L).
"""

import logging
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import BinaryIO, Optional, Union

import numpy as np
import soundfile as sf

from .data_types import AudioBuffer, ResamplerConfig, round_half_away
from .enums import WavEncoding, WindowType
from .errors import WavCodecError, WavHeaderError, WavTruncatedError

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

_PCM16_SCALE = 32768.0
_WAVE_FORMAT_EXTENSIBLE = 0xFFFE
_CHUNK_OUTPUTS = 4096


@dataclass(frozen=True)
class WavInfo:
    """Header facts of a WAV file."""

    sample_rate: int
    channels: int
    num_samples: int
    encoding: WavEncoding

    @property
    def duration(self) -> float:
        return self.num_samples / self.sample_rate


# =============================================================================
# Reading
# =============================================================================


def _parse_fmt(body: bytes, offset: int, path: str) -> tuple[WavEncoding, int, int, int]:
    tag, channels, rate, _byte_rate, block_align, bits = struct.unpack("<HHIIHH", body[:16])
    if tag == _WAVE_FORMAT_EXTENSIBLE:
        if len(body) < 26:
            raise WavHeaderError("Extensible fmt chunk without sub-format", offset, path)
        (tag,) = struct.unpack("<H", body[24:26])
    if tag == 1 and bits == 16:
        encoding = WavEncoding.PCM16
    elif tag == 3 and bits == 32:
        encoding = WavEncoding.FLOAT32
    else:
        raise WavCodecError(f"Unsupported encoding (format tag {tag}, {bits} bits)", offset, path)
    if channels < 1 or rate < 1:
        raise WavHeaderError(f"Invalid channels={channels} sample_rate={rate}", offset, path)
    if block_align != channels * encoding.bytes_per_sample:
        raise WavHeaderError(
            f"Block align {block_align} inconsistent with {channels}x{bits}-bit samples",
            offset,
            path,
        )
    return encoding, channels, rate, block_align


def _locate_data(fh: BinaryIO, path: str) -> tuple[WavInfo, int, int]:
    """Walk the RIFF chunks; return header info, data offset and data size."""
    fh.seek(0, 2)
    file_size = fh.tell()
    fh.seek(0)
    header = fh.read(12)
    if len(header) < 12 or header[:4] != b"RIFF" or header[8:12] != b"WAVE":
        raise WavHeaderError("Not a RIFF/WAVE file", 0, path)

    fmt = None
    offset = 12
    while offset + 8 <= file_size:
        fh.seek(offset)
        chunk_id, size = struct.unpack("<4sI", fh.read(8))
        body = offset + 8
        if chunk_id == b"fmt ":
            if size < 16 or body + size > file_size:
                raise WavHeaderError(f"fmt chunk of {size} bytes is malformed", offset, path)
            fmt = _parse_fmt(fh.read(size), offset, path)
        elif chunk_id == b"data":
            if fmt is None:
                raise WavHeaderError("data chunk precedes fmt chunk", offset, path)
            if body + size > file_size:
                raise WavTruncatedError(
                    f"data chunk declares {size} bytes but only {file_size - body} remain",
                    offset,
                    path,
                )
            encoding, channels, rate, block_align = fmt
            if size % block_align:
                raise WavTruncatedError(
                    f"data chunk of {size} bytes is not a whole number of {block_align}-byte frames",
                    offset,
                    path,
                )
            return WavInfo(rate, channels, size // block_align, encoding), body, size
        offset = body + size + (size & 1)
    raise WavHeaderError("No data chunk found", offset, path)


def probe_wav(path: PathLike) -> WavInfo:
    """Read only the header of a WAV file."""
    with open(path, "rb") as fh:
        info, _, _ = _locate_data(fh, str(path))
    return info


def read_wav(path: PathLike) -> AudioBuffer:
    """Read a PCM16 or float32 WAV file into an AudioBuffer.

    The header is validated first so malformed files fail with the offset
    of the offending chunk; the samples are then decoded by soundfile.
    """
    with open(path, "rb") as fh:
        info, data_offset, _ = _locate_data(fh, str(path))

    pcm16 = info.encoding is WavEncoding.PCM16
    try:
        data, _ = sf.read(str(path), dtype="int16" if pcm16 else "float32", always_2d=True)
    except RuntimeError as e:
        raise WavCodecError(f"Cannot decode samples: {e}", data_offset, str(path)) from e

    samples = data.T.astype(np.float64)
    if pcm16:
        samples /= _PCM16_SCALE
    logger.debug(
        f"Read {path}: {info.channels}ch {info.sample_rate}Hz {info.num_samples} samples "
        f"({info.encoding.value})"
    )
    return AudioBuffer(samples, info.sample_rate)


# =============================================================================
# Writing
# =============================================================================


def write_wav(
    buffer: AudioBuffer,
    path: PathLike,
    encoding: WavEncoding = WavEncoding.PCM16,
) -> int:
    """Write buffer as a RIFF/WAVE file.

    Returns:
        Number of samples clipped to the encodable range (always 0 for float32).
    """
    encoding = WavEncoding.from_value(encoding)
    interleaved = buffer.samples.T
    clipped = 0
    if encoding is WavEncoding.PCM16:
        scaled = np.round(interleaved * _PCM16_SCALE)
        clipped = int(np.count_nonzero((scaled > 32767) | (scaled < -32768)))
        data = np.clip(scaled, -32768, 32767).astype(np.int16)
    else:
        data = interleaved.astype(np.float32)
    sf.write(str(path), data, buffer.sample_rate, subtype=encoding.sf_subtype, format="WAV")

    if clipped:
        logger.warning(f"Clipped {clipped} samples while writing {path}")
    return clipped


# =============================================================================
# Resampling
# =============================================================================


def _taper(x: np.ndarray, window: WindowType) -> np.ndarray:
    """Symmetric taper over x in [-1, 1], zero outside."""
    inside = np.abs(x) < 1.0
    if window is WindowType.HANN:
        values = 0.5 + 0.5 * np.cos(np.pi * x)
    elif window is WindowType.HAMMING:
        values = 0.54 + 0.46 * np.cos(np.pi * x)
    else:
        values = np.ones_like(x)
    return np.where(inside, values, 0.0)


def _interpolate(signal: np.ndarray, positions: np.ndarray, cutoff: float, cfg: ResamplerConfig) -> np.ndarray:
    """Band-limited value of `signal` at fractional sample positions.

    `cutoff` is in cycles per input sample (0.5 = input Nyquist).
    """
    half_width = cfg.kernel_half_width
    padded = np.concatenate([np.zeros(half_width), signal, np.zeros(half_width + 1)])
    offsets = np.arange(-half_width + 1, half_width + 1)
    out = np.empty(len(positions))
    for start in range(0, len(positions), _CHUNK_OUTPUTS):
        pos = positions[start : start + _CHUNK_OUTPUTS]
        index = np.floor(pos).astype(np.int64)[:, np.newaxis] + offsets
        distance = index - pos[:, np.newaxis]
        taps = 2.0 * cutoff * np.sinc(2.0 * cutoff * distance)
        taps *= _taper(distance / half_width, cfg.window)
        out[start : start + _CHUNK_OUTPUTS] = np.einsum("ij,ij->i", padded[index + half_width], taps)
    return out


def resample_by_ratio(
    buffer: AudioBuffer,
    ratio: float,
    cfg: Optional[ResamplerConfig] = None,
    num_samples: Optional[int] = None,
) -> np.ndarray:
    """Evaluate every channel at instants n / ratio (in input samples).

    The output has round(L * ratio) samples per channel unless num_samples
    is given; the low-pass cut-off follows the lower of the two Nyquist rates.
    """
    if ratio <= 0:
        raise ValueError(f"Resampling ratio must be positive, got {ratio}")
    cfg = cfg or ResamplerConfig()
    if num_samples is None:
        num_samples = round_half_away(buffer.num_samples * ratio)
    positions = np.arange(num_samples) / ratio
    cutoff = cfg.cutoff_scale * 0.5 * min(1.0, ratio)
    return np.vstack([_interpolate(ch, positions, cutoff, cfg) for ch in buffer.samples])


def resample(
    buffer: AudioBuffer,
    out_rate: int,
    cfg: Optional[ResamplerConfig] = None,
) -> AudioBuffer:
    """Resample buffer to out_rate Hz; length round(L * out_rate / in_rate)."""
    if out_rate <= 0:
        raise ValueError(f"Output sample rate must be positive, got {out_rate}")
    if out_rate == buffer.sample_rate:
        return AudioBuffer(buffer.samples.copy(), buffer.sample_rate)
    out_len = round_half_away(buffer.num_samples * out_rate / buffer.sample_rate)
    samples = resample_by_ratio(buffer, out_rate / buffer.sample_rate, cfg, out_len)
    logger.debug(f"Resampled {buffer.num_samples} samples {buffer.sample_rate}->{out_rate} Hz")
    return AudioBuffer(samples, out_rate)
