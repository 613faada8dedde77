"""Front-end Enums - Window, feature, encoding and encoder type definitions."""

from enum import Enum


class _LookupMixin:
    """Case-insensitive construction from configuration strings."""

    @classmethod
    def from_value(cls, value):
        """Create member from string value (case-insensitive, '_' == '-')."""
        if isinstance(value, cls):
            return value
        key = str(value).strip().lower().replace("_", "-")
        for member in cls:
            if member.value.replace("_", "-") == key:
                return member
        choices = ", ".join(m.value for m in cls)
        raise ValueError(f"Unknown {cls.__name__} '{value}' (expected one of: {choices})")


class WindowType(_LookupMixin, Enum):
    """Analysis window applied to each frame (and to the resampling kernel)."""

    HAMMING = "hamming"
    HANN = "hann"
    RECTANGULAR = "rectangular"

    @property
    def scipy_name(self) -> str:
        """Name understood by scipy.signal.get_window."""
        return "boxcar" if self is WindowType.RECTANGULAR else self.value


class FeatureKind(_LookupMixin, Enum):
    """Content of a feature matrix."""

    FBANK = "fbank"
    PITCH = "pitch"
    FBANK_PITCH = "fbank_pitch"
    GENERIC = "generic"

    @classmethod
    def combine(cls, first: "FeatureKind", second: "FeatureKind") -> "FeatureKind":
        """Kind of the column-wise concatenation of two matrices."""
        if {first, second} == {cls.FBANK, cls.PITCH}:
            return cls.FBANK_PITCH
        return cls.GENERIC


class WavEncoding(_LookupMixin, Enum):
    """Sample encodings supported for RIFF/WAVE files."""

    PCM16 = "pcm16"
    FLOAT32 = "float32"

    @property
    def sf_subtype(self) -> str:
        """soundfile subtype name used when writing."""
        return "PCM_16" if self is WavEncoding.PCM16 else "FLOAT"

    @property
    def bytes_per_sample(self) -> int:
        return 2 if self is WavEncoding.PCM16 else 4


class PoolRounding(_LookupMixin, Enum):
    """Rounding of pooling output lengths."""

    FLOOR = "floor"
    CEIL = "ceil"


class LayerKind(_LookupMixin, Enum):
    """Temporal layer types of the encoder front."""

    CONV = "conv"
    POOL = "pool"


class EncoderPreset(_LookupMixin, Enum):
    """Encoder architectures with a known temporal schedule."""

    VGG_PBLSTM = "vgg-pblstm"
    PBLSTM = "pblstm"
