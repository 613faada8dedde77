"""Speed perturbation of audio and of the manifests that describe it.

A speed factor s plays the signal s times faster: duration L/s, every
frequency multiplied by s. The duration scale alpha = 1/s.
"""

import logging
import math
from dataclasses import dataclass, field, replace
from functools import partial
from pathlib import Path
from typing import Iterable, Optional, Union

from .audio import probe_wav, read_wav, resample_by_ratio, round_half_away, write_wav
from .data_types import (
    AudioBuffer,
    Manifest,
    ResamplerConfig,
    SegmentRecord,
    SpeedPerturbSpec,
    WavEntry,
)
from .errors import AugmentError
from .pipeline import collect, run_jobs

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]


def perturb_speed(
    buffer: AudioBuffer,
    speed: float,
    cfg: Optional[ResamplerConfig] = None,
) -> AudioBuffer:
    """Copy of buffer played at `speed`, same sample rate, round(L/speed) samples."""
    if not speed > 0 or not math.isfinite(speed):
        raise ValueError(f"Speed factor must be positive, got {speed}")
    if speed == 1.0:
        return AudioBuffer(buffer.samples.copy(), buffer.sample_rate)
    out_len = round_half_away(buffer.num_samples / speed)
    samples = resample_by_ratio(buffer, 1.0 / speed, cfg, out_len)
    return AudioBuffer(samples, buffer.sample_rate)


def rescale_segments(segments: Iterable[SegmentRecord], speed: float) -> list:
    """Divide start and end times by the speed factor."""
    if not speed > 0:
        raise ValueError(f"Speed factor must be positive, got {speed}")
    return [replace(seg, start=seg.start / speed, end=seg.end / speed) for seg in segments]


def shift_segments(segments: Iterable[SegmentRecord], offset: float) -> list:
    """Add a constant offset in seconds, e.g. to align another device's clock."""
    shifted = []
    for seg in segments:
        if seg.start + offset < 0:
            raise ValueError(
                f"Segment {seg.utt_id} would start at {seg.start + offset:.6f}s after shifting"
            )
        shifted.append(replace(seg, start=seg.start + offset, end=seg.end + offset))
    return shifted


@dataclass
class AugmentResult:
    """Combined manifest plus (item_id, reason) failures.

    Items are recording ids for files that could not be read or written,
    and perturbed utterance ids for segments that fall off the end of a copy.
    """

    manifest: Manifest
    failures: list = field(default_factory=list)
    files_written: int = 0

    @property
    def ok(self) -> bool:
        return not self.failures


def _perturb_recording(
    entry: WavEntry,
    speeds: tuple,
    spec: SpeedPerturbSpec,
    wav_dir: str,
    resampler: ResamplerConfig,
) -> tuple:
    """Write one perturbed WAV per speed; returns ([(speed, entry, duration)], failures)."""
    try:
        encoding = probe_wav(entry.path).encoding
        audio = read_wav(entry.path)
    except Exception as e:
        return [], [(entry.recording_id, str(e))]

    outputs, failures = [], []
    for speed in speeds:
        new_id = spec.prefix(speed) + entry.recording_id
        path = str(Path(wav_dir) / f"{new_id}.wav")
        try:
            perturbed = perturb_speed(audio, speed, resampler)
            write_wav(perturbed, path, encoding)
            outputs.append((speed, WavEntry(new_id, path, entry.channel), perturbed.duration))
        except Exception as e:
            failures.append((new_id, str(e)))
    return outputs, failures


def _check_ids(manifest: Manifest, spec: SpeedPerturbSpec) -> None:
    rec_ids = set(manifest.wav_entries) if spec.includes_identity else set()
    utt_ids = {seg.utt_id for seg in manifest.segments} if spec.includes_identity else set()
    for speed in spec.perturbed_speeds:
        prefix = spec.prefix(speed)
        for rec_id in manifest.wav_entries:
            if prefix + rec_id in rec_ids:
                raise AugmentError(f"Generated recording id {prefix + rec_id} already exists")
            rec_ids.add(prefix + rec_id)
        for seg in manifest.segments:
            if prefix + seg.utt_id in utt_ids:
                raise AugmentError(f"Generated utterance id {prefix + seg.utt_id} already exists")
            utt_ids.add(prefix + seg.utt_id)


def augment_manifest(
    manifest: Manifest,
    spec: SpeedPerturbSpec,
    output_dir: PathLike,
    resampler: Optional[ResamplerConfig] = None,
    workers: int = 1,
) -> AugmentResult:
    """Speed-perturbed copies of every recording, plus their rescaled segments.

    Originals are kept when 1.0 is among the speeds. Perturbed WAVs land in
    ``<output_dir>/wav``. A recording that cannot be processed is reported
    and left out; everything else is kept.

    Raises:
        AugmentError: if a generated id collides with another id.
    """
    _check_ids(manifest, spec)
    resampler = resampler or ResamplerConfig()
    wav_entries: dict = {}
    segments: list = []
    durations: dict = {}
    if spec.includes_identity:
        wav_entries.update(manifest.wav_entries)
        segments.extend(manifest.segments)
        durations.update(manifest.durations)

    written: list = []
    failures: list = []
    speeds = spec.perturbed_speeds
    if speeds:
        wav_dir = Path(output_dir) / "wav"
        wav_dir.mkdir(parents=True, exist_ok=True)
        jobs = [manifest.wav_entries[rec_id] for rec_id in sorted(manifest.wav_entries)]
        func = partial(
            _perturb_recording, speeds=speeds, spec=spec, wav_dir=str(wav_dir), resampler=resampler
        )
        written, failures = collect(run_jobs(func, jobs, workers, desc="perturb"))

    for speed, entry, duration in written:
        source_id = entry.recording_id[len(spec.prefix(speed)) :]
        wav_entries[entry.recording_id] = entry
        durations[entry.recording_id] = duration
        for seg in rescale_segments(manifest.segments_for(source_id), speed):
            utt_id = spec.prefix(speed) + seg.utt_id
            # round(L/s) samples can fall up to half a sample short of L/s
            end = min(seg.end, duration)
            if end <= seg.start:
                reason = f"starts at {seg.start:.6f}s, past the {duration:.6f}s copy"
                failures.append((utt_id, reason))
                continue
            segments.append(replace(seg, utt_id=utt_id, recording_id=entry.recording_id, end=end))

    for item_id, reason in failures:
        logger.warning(f"Speed perturbation failed for {item_id}: {reason}")
    segments.sort(key=lambda seg: seg.utt_id)
    combined = Manifest(
        dict(sorted(wav_entries.items())),
        segments,
        has_segments=manifest.has_segments,
        durations=durations,
    )
    logger.info(
        f"Speed perturbation {list(spec.speeds)}: {manifest.num_utterances} -> "
        f"{combined.num_utterances} utterances, {len(written)} files written"
    )
    return AugmentResult(combined, sorted(failures), len(written))
