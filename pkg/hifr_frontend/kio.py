"""Binary feature archives, index files and corpus manifests.

Archive entry layout (all integers little-endian)::

    <key> 0x20 0x00 'B' 'F' 'M' ' ' 0x04 <int32 rows> 0x04 <int32 cols> <rows*cols float32>

An index (.scp) line is ``<key> <ark_path>:<offset>`` where offset is the
position of the 0x00 byte that follows the key.
"""

import logging
import struct
from pathlib import Path
from typing import BinaryIO, Iterable, Iterator, Optional, Union

import numpy as np

from .audio import probe_wav
from .data_types import (
    ArchiveEntry,
    FeatureMatrix,
    Manifest,
    SegmentRecord,
    WavEntry,
    round_half_away,
)
from .enums import FeatureKind
from .errors import (
    ArchiveMagicError,
    ArchiveShapeError,
    ArchiveTruncatedError,
    ArchiveUnsupportedError,
    DuplicateKeyError,
    ManifestError,
    WavFormatError,
)

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

BINARY_MARKER = b"\x00B"
FLOAT_MATRIX = b"FM "
_INT_SIZE = b"\x04"
_MAX_ELEMENTS = 2**31 - 1


# =============================================================================
# Archives
# =============================================================================


def _encode_entry(entry: ArchiveEntry) -> bytes:
    values = np.ascontiguousarray(entry.matrix.values, dtype="<f4")
    rows, cols = values.shape
    return (
        BINARY_MARKER
        + FLOAT_MATRIX
        + _INT_SIZE
        + struct.pack("<i", rows)
        + _INT_SIZE
        + struct.pack("<i", cols)
        + values.tobytes()
    )


def write_archive(
    entries: Iterable[ArchiveEntry],
    ark_path: PathLike,
    scp_path: Optional[PathLike] = None,
) -> int:
    """Write entries in the given order; returns the number written.

    Raises:
        DuplicateKeyError: if a key occurs twice (nothing is written).
    """
    entries = list(entries)
    seen = set()
    for entry in entries:
        if entry.key in seen:
            raise DuplicateKeyError(f"Duplicate archive key {entry.key!r}")
        seen.add(entry.key)

    index_lines = []
    with open(ark_path, "wb") as fh:
        for entry in entries:
            fh.write(entry.key.encode("utf-8") + b" ")
            index_lines.append(f"{entry.key} {ark_path}:{fh.tell()}\n")
            fh.write(_encode_entry(entry))
    if scp_path is not None:
        with open(scp_path, "w", encoding="utf-8", newline="\n") as fh:
            fh.writelines(index_lines)
    logger.info(f"Wrote {len(entries)} matrices to {ark_path}")
    return len(entries)


def _read_exact(fh: BinaryIO, size: int, offset: int, path: str, what: str) -> bytes:
    data = fh.read(size)
    if len(data) != size:
        raise ArchiveTruncatedError(
            f"Expected {size} bytes of {what}, found {len(data)}", offset, path
        )
    return data


def _read_dim(fh: BinaryIO, path: str) -> int:
    offset = fh.tell()
    raw = _read_exact(fh, 5, offset, path, "matrix dimension")
    if raw[:1] != _INT_SIZE:
        raise ArchiveShapeError(f"Bad dimension size marker {raw[:1]!r}", offset, path)
    return struct.unpack("<i", raw[1:])[0]


def _read_matrix(fh: BinaryIO, path: str) -> np.ndarray:
    """Decode one matrix starting at the binary marker."""
    offset = fh.tell()
    marker = fh.read(2)
    if marker != BINARY_MARKER:
        raise ArchiveMagicError(f"Expected binary marker, found {marker!r}", offset, path)
    token = _read_exact(fh, 3, offset + 2, path, "matrix type")
    if token != FLOAT_MATRIX:
        raise ArchiveUnsupportedError(
            f"Unsupported matrix type {token.decode('latin-1').strip()!r}; only FM is read",
            offset + 2,
            path,
        )
    rows = _read_dim(fh, path)
    cols = _read_dim(fh, path)
    if rows < 1 or cols < 1 or rows * cols > _MAX_ELEMENTS:
        raise ArchiveShapeError(f"Invalid matrix shape {rows}x{cols}", offset, path)
    payload = _read_exact(fh, rows * cols * 4, fh.tell(), path, f"{rows}x{cols} matrix")
    return np.frombuffer(payload, dtype="<f4").reshape(rows, cols).astype(np.float32)


def _read_key(fh: BinaryIO, path: str) -> Optional[str]:
    """Next key up to its terminating space; None at a clean end of file."""
    start = fh.tell()
    chars = bytearray()
    while True:
        ch = fh.read(1)
        if not ch:
            if chars:
                raise ArchiveTruncatedError("Archive ends inside a key", start, path)
            return None
        if ch == b" ":
            break
        if ch == b"\x00" or len(chars) > 4096:
            raise ArchiveMagicError("No key terminator before binary data", start, path)
        chars += ch
    return chars.decode("utf-8")


def _entry(key: str, values: np.ndarray) -> ArchiveEntry:
    return ArchiveEntry(key, FeatureMatrix(values, kind=FeatureKind.GENERIC, utt_id=key))


def iter_archive(ark_path: PathLike) -> Iterator[ArchiveEntry]:
    """Traverse an archive sequentially, yielding entries in file order."""
    path = str(ark_path)
    with open(ark_path, "rb") as fh:
        while True:
            key = _read_key(fh, path)
            if key is None:
                return
            yield _entry(key, _read_matrix(fh, path))


def _parse_index_line(line: str, scp_path: str, line_no: int) -> tuple[str, str, int]:
    try:
        key, location = line.split(maxsplit=1)
        ark, offset = location.strip().rsplit(":", 1)
        return key, ark, int(offset)
    except ValueError:
        raise ManifestError(f"Malformed index line {line!r}", scp_path, line_no) from None


def read_archive(path: PathLike) -> list:
    """Read entries through an index (.scp) file or straight from an archive."""
    path = str(path)
    if not path.endswith(".scp"):
        entries = list(iter_archive(path))
        logger.debug(f"Read {len(entries)} matrices from {path}")
        return entries

    entries = []
    handles: dict = {}
    try:
        with open(path, encoding="utf-8") as index:
            for line_no, line in enumerate(index, start=1):
                if not line.strip():
                    continue
                key, ark, offset = _parse_index_line(line, path, line_no)
                if ark not in handles:
                    handles[ark] = open(ark, "rb")
                fh = handles[ark]
                fh.seek(offset)
                entries.append(_entry(key, _read_matrix(fh, ark)))
    finally:
        for fh in handles.values():
            fh.close()
    logger.debug(f"Read {len(entries)} matrices via {path}")
    return entries


# =============================================================================
# Manifests
# =============================================================================


def _parse_wav_scp(wav_scp: str) -> dict:
    entries: dict = {}
    with open(wav_scp, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            fields = line.split()
            if not fields:
                continue
            if len(fields) not in (2, 3):
                raise ManifestError(
                    "Expected 'recording_id path [channel]'", wav_scp, line_no, fields[0]
                )
            rec_id = fields[0]
            if rec_id in entries:
                raise ManifestError(f"Duplicate recording id {rec_id}", wav_scp, line_no, rec_id)
            try:
                channel = int(fields[2]) if len(fields) == 3 else None
                entries[rec_id] = WavEntry(rec_id, fields[1], channel)
            except ValueError as e:
                raise ManifestError(str(e), wav_scp, line_no, rec_id) from None
    return entries


def _parse_segments(segments: str, wav_entries: dict, durations: dict) -> list:
    records: list = []
    seen: set = set()
    with open(segments, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            fields = line.split()
            if not fields:
                continue
            if len(fields) not in (4, 5):
                raise ManifestError(
                    "Expected 'utt_id recording_id start end'", segments, line_no, fields[0]
                )
            utt_id, rec_id = fields[0], fields[1]
            if utt_id in seen:
                raise ManifestError(f"Duplicate utterance id {utt_id}", segments, line_no, utt_id)
            if rec_id not in wav_entries:
                raise ManifestError(
                    f"Utterance {utt_id} references unknown recording {rec_id}",
                    segments,
                    line_no,
                    utt_id,
                )
            try:
                start, end = float(fields[2]), float(fields[3])
                channel = int(fields[4]) if len(fields) == 5 else wav_entries[rec_id].channel
                record = SegmentRecord(utt_id, rec_id, start, end, channel)
            except ValueError as e:
                raise ManifestError(f"Utterance {utt_id}: {e}", segments, line_no, utt_id) from None
            duration = durations.get(rec_id)
            if duration is not None and end > duration + 1e-6:
                raise ManifestError(
                    f"Utterance {utt_id} ends at {end:.6f}s beyond recording {rec_id} "
                    f"({duration:.6f}s)",
                    segments,
                    line_no,
                    utt_id,
                )
            seen.add(utt_id)
            records.append(record)
    return records


def parse_manifest(wav_scp: PathLike, segments: Optional[PathLike] = None) -> Manifest:
    """Load wav.scp and, optionally, a segments file.

    Without segments every recording becomes one utterance spanning the
    whole file, named after the recording. Durations come from the WAV
    headers; with a segments file an unreadable recording is tolerated
    here and reported when its audio is extracted.
    """
    wav_scp = str(wav_scp)
    wav_entries = _parse_wav_scp(wav_scp)
    durations: dict = {}
    for rec_id, entry in wav_entries.items():
        try:
            durations[rec_id] = probe_wav(entry.path).duration
        except (OSError, WavFormatError) as e:
            if segments is None:
                raise ManifestError(f"Cannot read recording {rec_id}: {e}", wav_scp, None, rec_id) from e
            logger.warning(f"Cannot read recording {rec_id}: {e}")

    if segments is not None:
        records = _parse_segments(str(segments), wav_entries, durations)
        manifest = Manifest(wav_entries, records, has_segments=True, durations=durations)
    else:
        records = []
        for rec_id, entry in wav_entries.items():
            if durations[rec_id] <= 0:
                raise ManifestError(f"Recording {rec_id} is empty", wav_scp, None, rec_id)
            records.append(SegmentRecord(rec_id, rec_id, 0.0, durations[rec_id], entry.channel))
        manifest = Manifest(wav_entries, records, has_segments=False, durations=durations)
    logger.info(
        f"Loaded manifest: {len(wav_entries)} recordings, {manifest.num_utterances} utterances"
    )
    return manifest


def segment_sample_range(segment: SegmentRecord, sample_rate: int) -> tuple[int, int]:
    """Sample span [start, end) of a segment, rounded half away from zero."""
    return (
        round_half_away(segment.start * sample_rate),
        round_half_away(segment.end * sample_rate),
    )
