"""Front-end exceptions.

Format errors carry the byte offset at which the problem was detected so
corrupt corpora can be inspected with a hex dump.
"""

from typing import Optional


class FrontendError(Exception):
    """Base class for all front-end errors."""


class _OffsetError(FrontendError, ValueError):
    def __init__(self, message: str, offset: int, path: Optional[str] = None):
        self.offset = offset
        self.path = path
        where = f"{path}@{offset}" if path else f"offset {offset}"
        super().__init__(f"{message} ({where})")


class WavFormatError(_OffsetError):
    """RIFF/WAVE file cannot be decoded."""


class WavHeaderError(WavFormatError):
    """Malformed RIFF/WAVE header or chunk layout."""


class WavCodecError(WavFormatError):
    """Encoding other than PCM16 or IEEE float32."""


class WavTruncatedError(WavFormatError):
    """Data chunk extends past the end of the file."""


class ArchiveFormatError(_OffsetError):
    """Binary feature archive cannot be decoded."""


class ArchiveMagicError(ArchiveFormatError):
    """Expected the binary marker 0x00 'B' at an entry boundary."""


class ArchiveUnsupportedError(ArchiveFormatError):
    """Matrix type other than single-precision 'FM '."""


class ArchiveShapeError(ArchiveFormatError):
    """Negative or overflowing matrix dimensions."""


class ArchiveTruncatedError(ArchiveFormatError):
    """Matrix payload shorter than rows * cols floats."""


class DuplicateKeyError(FrontendError, ValueError):
    """Key written twice to one archive or manifest."""


class ManifestError(FrontendError, ValueError):
    """Invalid wav.scp or segments content."""

    def __init__(
        self,
        message: str,
        path: Optional[str] = None,
        line: Optional[int] = None,
        item_id: Optional[str] = None,
    ):
        self.path = path
        self.line = line
        self.item_id = item_id
        location = ""
        if path is not None:
            location = f" [{path}:{line}]" if line is not None else f" [{path}]"
        super().__init__(f"{message}{location}")


class FeatureMismatchError(FrontendError, ValueError):
    """Feature matrices cannot be combined."""


class FilterbankGeometryError(FrontendError, ValueError):
    """Filterbank parameters leave a filter without any FFT bin."""


class BeamformError(FrontendError, ValueError):
    """Inconsistent channels, delays or weights."""


class AugmentError(FrontendError, ValueError):
    """Speed perturbation would produce an inconsistent manifest."""
