"""Front-end Data Types - Dataclasses for signals, features, manifests and configs."""

import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional, Sequence, Union

import numpy as np

from .enums import EncoderPreset, FeatureKind, LayerKind, PoolRounding, WindowType
from .errors import ManifestError


def _check_id(value: str, what: str) -> None:
    if not value or any(ch.isspace() for ch in value) or "\x00" in value:
        raise ValueError(f"Invalid {what} {value!r}: must be non-empty without whitespace")


def round_half_away(value: float) -> int:
    """Round to the nearest integer, halves away from zero."""
    return int(math.copysign(math.floor(abs(value) + 0.5), value))


def _next_power_of_two(n: int) -> int:
    return 1 << max(0, int(n) - 1).bit_length()


# =============================================================================
# Signals
# =============================================================================


@dataclass(eq=False)
class AudioBuffer:
    """Multi-channel PCM samples, shape (channels, L), nominal range [-1, 1]."""

    samples: np.ndarray
    sample_rate: int

    def __post_init__(self) -> None:
        samples = np.asarray(self.samples, dtype=np.float64)
        if samples.ndim == 1:
            samples = samples[np.newaxis, :]
        if samples.ndim != 2 or samples.shape[0] < 1:
            raise ValueError(f"Samples must be (channels, L) with channels >= 1, got {samples.shape}")
        if self.sample_rate <= 0 or int(self.sample_rate) != self.sample_rate:
            raise ValueError(f"Sample rate must be a positive integer, got {self.sample_rate}")
        if not np.all(np.isfinite(samples)):
            raise ValueError("Samples contain NaN or Inf")
        self.samples = samples
        self.sample_rate = int(self.sample_rate)

    @classmethod
    def from_channels(cls, channels: Sequence[np.ndarray], sample_rate: int) -> "AudioBuffer":
        """Stack equal-length 1-D channels into one buffer."""
        lengths = {len(ch) for ch in channels}
        if len(lengths) > 1:
            raise ValueError(f"Channel lengths differ: {sorted(lengths)}")
        return cls(np.vstack([np.asarray(ch, dtype=np.float64) for ch in channels]), sample_rate)

    @property
    def channels(self) -> int:
        return self.samples.shape[0]

    @property
    def num_samples(self) -> int:
        return self.samples.shape[1]

    @property
    def duration(self) -> float:
        return self.num_samples / self.sample_rate

    @property
    def mono(self) -> np.ndarray:
        """The single channel of a mono buffer."""
        if self.channels != 1:
            raise ValueError(f"Expected a mono buffer, got {self.channels} channels")
        return self.samples[0]

    def channel(self, index: int) -> "AudioBuffer":
        if not 0 <= index < self.channels:
            raise ValueError(f"Channel {index} out of range (buffer has {self.channels})")
        return AudioBuffer(self.samples[index : index + 1].copy(), self.sample_rate)

    def slice(self, start: int, end: int) -> "AudioBuffer":
        """Samples [start, end) of every channel."""
        if not 0 <= start <= end <= self.num_samples:
            raise ValueError(f"Slice [{start}, {end}) outside [0, {self.num_samples})")
        return AudioBuffer(self.samples[:, start:end].copy(), self.sample_rate)


@dataclass(frozen=True)
class ResamplerConfig:
    """Windowed-sinc interpolation parameters."""

    kernel_half_width: int = 32
    window: WindowType = WindowType.HANN
    cutoff_scale: float = 0.95

    def __post_init__(self) -> None:
        if self.kernel_half_width < 4:
            raise ValueError(f"kernel_half_width must be >= 4, got {self.kernel_half_width}")
        if not 0.0 < self.cutoff_scale <= 1.0:
            raise ValueError(f"cutoff_scale must be in (0, 1], got {self.cutoff_scale}")
        object.__setattr__(self, "window", WindowType.from_value(self.window))

    @classmethod
    def from_dict(cls, data: dict) -> "ResamplerConfig":
        """Create ResamplerConfig from dictionary."""
        return cls(
            kernel_half_width=data.get("kernel_half_width", 32),
            window=WindowType.from_value(data.get("window", "hann")),
            cutoff_scale=data.get("cutoff_scale", 0.95),
        )


# =============================================================================
# Framing and spectra
# =============================================================================


@dataclass(frozen=True)
class FramingConfig:
    """Pre-emphasis, frame geometry, window and FFT size."""

    frame_rate: float = 100.0
    frame_length_ms: float = 25.0
    preemphasis_coeff: float = 0.97
    window: WindowType = WindowType.HAMMING
    fft_size: Optional[int] = None
    dither_amplitude: float = 0.0
    snip_edges: bool = True

    def __post_init__(self) -> None:
        if self.frame_rate <= 0:
            raise ValueError(f"frame_rate must be positive, got {self.frame_rate}")
        if self.frame_length_ms <= 0:
            raise ValueError(f"frame_length_ms must be positive, got {self.frame_length_ms}")
        if not 0.0 <= self.preemphasis_coeff < 1.0:
            raise ValueError(f"preemphasis_coeff must be in [0, 1), got {self.preemphasis_coeff}")
        if self.dither_amplitude < 0:
            raise ValueError(f"dither_amplitude must be >= 0, got {self.dither_amplitude}")
        if self.fft_size is not None and (
            self.fft_size < 1 or self.fft_size & (self.fft_size - 1)
        ):
            raise ValueError(f"fft_size must be a power of two, got {self.fft_size}")
        object.__setattr__(self, "window", WindowType.from_value(self.window))

    @classmethod
    def from_dict(cls, data: dict) -> "FramingConfig":
        """Create FramingConfig from dictionary."""
        return cls(
            frame_rate=data.get("frame_rate", 100.0),
            frame_length_ms=data.get("frame_length_ms", 25.0),
            preemphasis_coeff=data.get("preemphasis_coeff", 0.97),
            window=WindowType.from_value(data.get("window", "hamming")),
            fft_size=data.get("fft_size"),
            dither_amplitude=data.get("dither_amplitude", 0.0),
            snip_edges=data.get("snip_edges", True),
        )

    def hop_samples(self, sample_rate: int) -> int:
        return round_half_away(sample_rate / self.frame_rate)

    def frame_length_samples(self, sample_rate: int) -> int:
        return round_half_away(sample_rate * self.frame_length_ms / 1000.0)

    def padded_fft_size(self, sample_rate: int) -> int:
        """Configured FFT size, or the smallest power of two >= the frame length."""
        if self.fft_size is not None:
            return self.fft_size
        return _next_power_of_two(self.frame_length_samples(sample_rate))

    def validate(self, sample_rate: int) -> None:
        """Check the geometry invariants that depend on the sample rate."""
        if self.hop_samples(sample_rate) < 1:
            raise ValueError(
                f"Frame rate {self.frame_rate} too high for {sample_rate} Hz (hop < 1 sample)"
            )
        frame_length = self.frame_length_samples(sample_rate)
        if frame_length < 1:
            raise ValueError(f"Frame length {self.frame_length_ms} ms is below one sample")
        if frame_length > self.padded_fft_size(sample_rate):
            raise ValueError(
                f"Frame length {frame_length} exceeds fft_size {self.padded_fft_size(sample_rate)}"
            )


@dataclass(eq=False)
class SpectrumMatrix:
    """Per-frame magnitude spectrum, shape (T, fft_size/2 + 1)."""

    values: np.ndarray
    frame_rate: float
    fft_size: int

    def __post_init__(self) -> None:
        values = np.asarray(self.values, dtype=np.float64)
        if values.ndim != 2 or values.shape[1] != self.fft_size // 2 + 1:
            raise ValueError(
                f"Spectrum shape {values.shape} does not match fft_size {self.fft_size}"
            )
        if not np.all(np.isfinite(values)) or np.any(values < 0):
            raise ValueError("Spectrum magnitudes must be finite and non-negative")
        self.values = values

    @property
    def num_frames(self) -> int:
        return self.values.shape[0]


# =============================================================================
# Filterbank and features
# =============================================================================


@dataclass(frozen=True)
class FbankConfig:
    """Mel filterbank and log-energy parameters."""

    num_mel: int = 40
    low_freq: float = 20.0
    high_freq: Optional[float] = None
    log_floor: float = 1e-10

    def __post_init__(self) -> None:
        if self.num_mel < 1:
            raise ValueError(f"num_mel must be >= 1, got {self.num_mel}")
        if self.low_freq < 0:
            raise ValueError(f"low_freq must be >= 0, got {self.low_freq}")
        if self.log_floor <= 0:
            raise ValueError(f"log_floor must be positive, got {self.log_floor}")

    @classmethod
    def from_dict(cls, data: dict) -> "FbankConfig":
        """Create FbankConfig from dictionary."""
        return cls(
            num_mel=data.get("num_mel", 40),
            low_freq=data.get("low_freq", 20.0),
            high_freq=data.get("high_freq") or None,
            log_floor=data.get("log_floor", 1e-10),
        )

    def resolved_high_freq(self, sample_rate: int) -> float:
        """High cut-off in Hz (Nyquist when unset)."""
        return float(self.high_freq) if self.high_freq else sample_rate / 2.0


@dataclass(frozen=True, eq=False)
class MelFilterbank:
    """Triangular Mel filters over the bins of one FFT size; immutable."""

    num_filters: int
    low_freq: float
    high_freq: float
    sample_rate: int
    fft_size: int
    weights: np.ndarray
    center_freqs: np.ndarray

    def __post_init__(self) -> None:
        self.weights.setflags(write=False)
        self.center_freqs.setflags(write=False)

    @property
    def num_bins(self) -> int:
        return self.fft_size // 2 + 1


@dataclass(eq=False)
class FeatureMatrix:
    """T x D feature matrix with frame-rate and provenance metadata."""

    values: np.ndarray
    frame_rate: Optional[float] = None
    kind: FeatureKind = FeatureKind.GENERIC
    utt_id: str = ""

    def __post_init__(self) -> None:
        values = np.asarray(self.values)
        if values.dtype.kind != "f":
            values = values.astype(np.float64)
        if values.ndim != 2:
            raise ValueError(f"Feature matrix must be 2-D, got shape {values.shape}")
        if not np.all(np.isfinite(values)):
            raise ValueError(f"Feature matrix {self.utt_id!r} contains NaN or Inf")
        self.values = values
        self.kind = FeatureKind.from_value(self.kind)

    @property
    def num_frames(self) -> int:
        return self.values.shape[0]

    @property
    def dim(self) -> int:
        return self.values.shape[1]

    def with_values(self, values: np.ndarray, **changes) -> "FeatureMatrix":
        """Copy with new values (and optionally other metadata)."""
        return replace(self, values=values, **changes)


# =============================================================================
# Pitch
# =============================================================================


@dataclass(frozen=True)
class PitchConfig:
    """NCCF + Viterbi pitch tracker parameters."""

    f_min: float = 50.0
    f_max: float = 400.0
    nccf_floor: float = 1e-4
    transition_weight: float = 0.35
    delta_window: int = 2
    soft_min_f0: float = 10.0

    def __post_init__(self) -> None:
        if not 0 < self.f_min < self.f_max:
            raise ValueError(f"Need 0 < f_min < f_max, got {self.f_min}, {self.f_max}")
        if self.nccf_floor <= 0:
            raise ValueError(f"nccf_floor must be positive, got {self.nccf_floor}")
        if self.transition_weight < 0 or self.soft_min_f0 < 0:
            raise ValueError("transition_weight and soft_min_f0 must be >= 0")
        if self.delta_window < 1:
            raise ValueError(f"delta_window must be >= 1, got {self.delta_window}")

    @classmethod
    def from_dict(cls, data: dict) -> "PitchConfig":
        """Create PitchConfig from dictionary."""
        return cls(
            f_min=data.get("f_min", 50.0),
            f_max=data.get("f_max", 400.0),
            nccf_floor=data.get("nccf_floor", 1e-4),
            transition_weight=data.get("transition_weight", 0.35),
            delta_window=data.get("delta_window", 2),
            soft_min_f0=data.get("soft_min_f0", 10.0),
        )

    def lag_range(self, sample_rate: int, frame_length: int) -> np.ndarray:
        """Integer candidate lags [ceil(sr/f_max), floor(sr/f_min)]."""
        if self.f_max >= sample_rate / 2:
            raise ValueError(f"f_max {self.f_max} Hz must be below Nyquist of {sample_rate} Hz")
        min_lag = math.ceil(sample_rate / self.f_max)
        max_lag = math.floor(sample_rate / self.f_min)
        if min_lag > max_lag:
            raise ValueError(f"Empty lag range [{min_lag}, {max_lag}]")
        if max_lag >= frame_length:
            raise ValueError(
                f"Frame length {frame_length} must exceed the maximum lag {max_lag} "
                f"(f_min {self.f_min} Hz at {sample_rate} Hz)"
            )
        return np.arange(min_lag, max_lag + 1)


@dataclass(eq=False)
class PitchTrack:
    """Per-frame f0 (Hz), probability of voicing and delta log-pitch."""

    f0: np.ndarray
    pov: np.ndarray
    delta_log_pitch: np.ndarray
    frame_rate: Optional[float] = None

    def __post_init__(self) -> None:
        self.f0 = np.asarray(self.f0, dtype=np.float64)
        self.pov = np.asarray(self.pov, dtype=np.float64)
        self.delta_log_pitch = np.asarray(self.delta_log_pitch, dtype=np.float64)
        if not len(self.f0) == len(self.pov) == len(self.delta_log_pitch):
            raise ValueError("Pitch track columns differ in length")
        if np.any(self.pov < 0) or np.any(self.pov > 1):
            raise ValueError("Probability of voicing must lie in [0, 1]")
        if not all(np.all(np.isfinite(a)) for a in (self.f0, self.pov, self.delta_log_pitch)):
            raise ValueError("Pitch track contains NaN or Inf")

    @property
    def num_frames(self) -> int:
        return len(self.f0)


# =============================================================================
# Augmentation and manifests
# =============================================================================


@dataclass(frozen=True)
class SpeedPerturbSpec:
    """Speed factors s (duration L/s, frequencies x s); warping factor alpha = 1/s."""

    speeds: tuple = (0.9, 1.0, 1.1)
    prefix_template: str = "sp{speed:g}-"

    def __post_init__(self) -> None:
        speeds = tuple(float(s) for s in self.speeds)
        if not speeds:
            raise ValueError("At least one speed factor is required")
        if any(s <= 0 or not math.isfinite(s) for s in speeds):
            raise ValueError(f"Speed factors must be positive, got {speeds}")
        if len(set(speeds)) != len(speeds):
            raise ValueError(f"Speed factors must be distinct, got {speeds}")
        object.__setattr__(self, "speeds", speeds)

    @classmethod
    def from_dict(cls, data: dict) -> "SpeedPerturbSpec":
        """Create SpeedPerturbSpec from dictionary."""
        return cls(
            speeds=tuple(data.get("speeds", (0.9, 1.0, 1.1))),
            prefix_template=data.get("prefix_template", "sp{speed:g}-"),
        )

    @property
    def includes_identity(self) -> bool:
        return 1.0 in self.speeds

    @property
    def perturbed_speeds(self) -> tuple:
        return tuple(s for s in self.speeds if s != 1.0)

    def prefix(self, speed: float) -> str:
        return self.prefix_template.format(speed=speed)

    @staticmethod
    def warping_factor(speed: float) -> float:
        """Duration scale alpha of a copy played at speed s."""
        return 1.0 / speed


@dataclass(frozen=True)
class SegmentRecord:
    """Utterance time span [start, end) in seconds inside one recording."""

    utt_id: str
    recording_id: str
    start: float
    end: float
    channel: Optional[int] = None

    def __post_init__(self) -> None:
        _check_id(self.utt_id, "utterance id")
        _check_id(self.recording_id, "recording id")
        if not (math.isfinite(self.start) and math.isfinite(self.end)):
            raise ValueError(f"Segment {self.utt_id}: times must be finite")
        if not 0.0 <= self.start < self.end:
            raise ValueError(
                f"Segment {self.utt_id}: need 0 <= start < end, got {self.start}, {self.end}"
            )

    @property
    def duration(self) -> float:
        return self.end - self.start

    def to_line(self) -> str:
        return f"{self.utt_id} {self.recording_id} {self.start:.6f} {self.end:.6f}"


@dataclass(frozen=True)
class WavEntry:
    """One wav.scp line: recording id, audio path and optional channel."""

    recording_id: str
    path: str
    channel: Optional[int] = None

    def __post_init__(self) -> None:
        _check_id(self.recording_id, "recording id")
        if not self.path:
            raise ValueError(f"Recording {self.recording_id} has an empty path")

    def to_line(self) -> str:
        if self.channel is None:
            return f"{self.recording_id} {self.path}"
        return f"{self.recording_id} {self.path} {self.channel}"


@dataclass
class Manifest:
    """Recordings plus the utterance segments cut from them."""

    wav_entries: dict = field(default_factory=dict)
    segments: list = field(default_factory=list)
    has_segments: bool = True
    durations: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        self._index: dict = {}
        for seg in self.segments:
            if seg.utt_id in self._index:
                raise ManifestError(f"Duplicate utterance id {seg.utt_id}", item_id=seg.utt_id)
            if seg.recording_id not in self.wav_entries:
                raise ManifestError(
                    f"Utterance {seg.utt_id} references unknown recording {seg.recording_id}",
                    item_id=seg.utt_id,
                )
            duration = self.durations.get(seg.recording_id)
            if duration is not None and seg.end > duration + 1e-6:
                raise ManifestError(
                    f"Utterance {seg.utt_id} ends at {seg.end:.6f}s beyond recording "
                    f"{seg.recording_id} ({duration:.6f}s)",
                    item_id=seg.utt_id,
                )
            self._index[seg.utt_id] = seg

    @property
    def num_utterances(self) -> int:
        return len(self.segments)

    def segment(self, utt_id: str) -> SegmentRecord:
        return self._index[utt_id]

    def segments_for(self, recording_id: str) -> list:
        return [seg for seg in self.segments if seg.recording_id == recording_id]

    def write(
        self,
        wav_scp_path: Union[str, Path],
        segments_path: Optional[Union[str, Path]] = None,
    ) -> None:
        """Write wav.scp (and segments when the manifest has them), sorted by id."""
        lines = [self.wav_entries[key].to_line() for key in sorted(self.wav_entries)]
        Path(wav_scp_path).write_text("".join(f"{line}\n" for line in lines), encoding="utf-8")
        if self.has_segments and segments_path is not None:
            segs = sorted(self.segments, key=lambda s: s.utt_id)
            Path(segments_path).write_text(
                "".join(f"{seg.to_line()}\n" for seg in segs), encoding="utf-8"
            )


@dataclass(eq=False)
class ArchiveEntry:
    """Keyed feature matrix as stored in a binary archive."""

    key: str
    matrix: FeatureMatrix

    def __post_init__(self) -> None:
        _check_id(self.key, "archive key")
        if self.matrix.num_frames < 1 or self.matrix.dim < 1:
            raise ValueError(
                f"Archive entry {self.key}: matrix must have rows >= 1 and cols >= 1, "
                f"got {self.matrix.values.shape}"
            )


# =============================================================================
# Beamforming
# =============================================================================


@dataclass(frozen=True)
class TdoaEstimate:
    """Integer delay of a channel relative to the reference (positive = lags)."""

    delay: int
    confidence: float

    def __post_init__(self) -> None:
        if not math.isfinite(self.confidence):
            raise ValueError("TDOA confidence must be finite")


@dataclass(frozen=True)
class BeamformConfig:
    """Delay search range and reference microphone."""

    max_delay_samples: int = 320
    reference_channel: int = 0

    def __post_init__(self) -> None:
        if self.max_delay_samples < 1:
            raise ValueError(f"max_delay_samples must be >= 1, got {self.max_delay_samples}")
        if self.reference_channel < 0:
            raise ValueError(f"reference_channel must be >= 0, got {self.reference_channel}")

    @classmethod
    def from_dict(cls, data: dict) -> "BeamformConfig":
        """Create BeamformConfig from dictionary."""
        return cls(
            max_delay_samples=data.get("max_delay_samples", 320),
            reference_channel=data.get("reference_channel", 0),
        )


# =============================================================================
# Encoder geometry
# =============================================================================


@dataclass(frozen=True)
class LayerGeometry:
    """Temporal geometry of one convolution or pooling layer."""

    kind: LayerKind
    kernel: int = 3
    stride: int = 1
    padding: int = 0

    def __post_init__(self) -> None:
        if self.kernel < 1 or self.stride < 1 or self.padding < 0:
            raise ValueError(
                f"Invalid layer geometry kernel={self.kernel} stride={self.stride} "
                f"padding={self.padding}"
            )
        object.__setattr__(self, "kind", LayerKind.from_value(self.kind))

    @classmethod
    def conv(cls, kernel: int = 3, stride: int = 1, padding: int = 1) -> "LayerGeometry":
        return cls(LayerKind.CONV, kernel, stride, padding)

    @classmethod
    def pool(cls, kernel: int = 3, stride: int = 2, padding: int = 0) -> "LayerGeometry":
        return cls(LayerKind.POOL, kernel, stride, padding)


@dataclass(frozen=True)
class EncoderSpec:
    """Ordered conv/pool layers followed by per-layer pBLSTM subsampling."""

    layers: tuple = ()
    pool_rounding: PoolRounding = PoolRounding.CEIL
    pblstm_subsample: tuple = (1, 2, 2, 1)

    def __post_init__(self) -> None:
        object.__setattr__(self, "layers", tuple(self.layers))
        object.__setattr__(self, "pblstm_subsample", tuple(int(f) for f in self.pblstm_subsample))
        object.__setattr__(self, "pool_rounding", PoolRounding.from_value(self.pool_rounding))
        if any(f < 1 for f in self.pblstm_subsample):
            raise ValueError(f"pBLSTM subsampling factors must be >= 1, got {self.pblstm_subsample}")

    @classmethod
    def vgg_pblstm(cls, pool_rounding: PoolRounding = PoolRounding.CEIL) -> "EncoderSpec":
        """Two (conv, conv, pool) blocks then a 4-layer pBLSTM."""
        block = (LayerGeometry.conv(), LayerGeometry.conv(), LayerGeometry.pool())
        return cls(layers=block + block, pool_rounding=pool_rounding)

    @classmethod
    def pblstm(cls) -> "EncoderSpec":
        """4-layer pBLSTM without a convolutional front."""
        return cls(layers=())

    @classmethod
    def from_preset(cls, preset: Union[str, EncoderPreset]) -> "EncoderSpec":
        preset = EncoderPreset.from_value(preset)
        if preset is EncoderPreset.VGG_PBLSTM:
            return cls.vgg_pblstm()
        return cls.pblstm()

    @classmethod
    def from_dict(cls, data: dict) -> "EncoderSpec":
        """Create EncoderSpec from a preset name plus optional overrides."""
        base = cls.from_preset(data.get("preset", EncoderPreset.VGG_PBLSTM.value))
        return cls(
            layers=base.layers,
            pool_rounding=PoolRounding.from_value(data.get("pool_rounding", "ceil")),
            pblstm_subsample=tuple(data.get("pblstm_subsample", base.pblstm_subsample)),
        )

    @property
    def conv_layers(self) -> list:
        return [layer for layer in self.layers if layer.kind is LayerKind.CONV]

    @property
    def pool_layers(self) -> list:
        return [layer for layer in self.layers if layer.kind is LayerKind.POOL]
