"""Per-utterance feature extraction and the corpus worker pool."""

import logging
import multiprocessing
import zlib
from dataclasses import dataclass, field, replace
from functools import partial
from typing import Callable, Iterable, Iterator, Optional, Sequence

import numpy as np
from tqdm import tqdm

from .audio import read_wav, resample
from .config import PipelineConfig
from .data_types import ArchiveEntry, AudioBuffer, FeatureMatrix, Manifest
from .enums import FeatureKind
from .fbank import build_mel_filterbank, compute_fbank, concat_features, mean_normalize
from .framing import frame_signal, preemphasize, window_and_spectrum
from .kio import segment_sample_range
from .pitch import pitch_features, track_pitch

logger = logging.getLogger(__name__)


def run_jobs(
    func: Callable,
    jobs: Sequence,
    workers: int = 1,
    desc: str = "jobs",
) -> Iterator:
    """Apply func to every job, in order, inline or on a spawn-context pool.

    func must be picklable and must not raise for expected per-job failures.
    """
    workers = max(1, min(workers, len(jobs)))
    progress = partial(tqdm, total=len(jobs), desc=desc, disable=None, leave=False)
    if workers == 1:
        yield from progress(map(func, jobs))
        return
    logger.debug(f"Starting {workers} worker processes for {len(jobs)} {desc}")
    with multiprocessing.get_context("spawn").Pool(workers) as pool:
        yield from progress(pool.imap(func, jobs))


def utterance_rng(seed: int, utt_id: str) -> np.random.Generator:
    """Dither generator that depends only on the seed and the utterance id."""
    return np.random.default_rng([seed, zlib.crc32(utt_id.encode("utf-8"))])


class FeatureExtractor:
    """FBANK (+ pitch) extraction for single utterances."""

    def __init__(self, config: Optional[PipelineConfig] = None):
        self.config = config or PipelineConfig()

    @property
    def default_kind(self) -> FeatureKind:
        return FeatureKind.FBANK_PITCH if self.config.enable_pitch else FeatureKind.FBANK

    def prepare(self, buffer: AudioBuffer) -> AudioBuffer:
        """Resample to the configured rate when one is set."""
        target = self.config.sample_rate
        if target is not None and buffer.sample_rate != target:
            logger.debug(f"Resampling {buffer.sample_rate} Hz audio to {target} Hz")
            return resample(buffer, target, self.config.resampler)
        return buffer

    def fbank(self, buffer: AudioBuffer, utt_id: str = "") -> FeatureMatrix:
        cfg = self.config
        sr = buffer.sample_rate
        emphasized = AudioBuffer(preemphasize(buffer.mono, cfg.framing.preemphasis_coeff), sr)
        rng = utterance_rng(cfg.seed, utt_id) if cfg.framing.dither_amplitude > 0 else None
        frames = frame_signal(emphasized, cfg.framing, rng)
        spectrum = window_and_spectrum(frames, cfg.framing, sr)
        fb = build_mel_filterbank(
            cfg.fbank.num_mel,
            sr,
            spectrum.fft_size,
            cfg.fbank.low_freq,
            cfg.fbank.resolved_high_freq(sr),
        )
        return compute_fbank(spectrum, fb, cfg.fbank.log_floor, utt_id=utt_id)

    def pitch(self, buffer: AudioBuffer, utt_id: str = "") -> FeatureMatrix:
        framing = replace(self.config.framing, dither_amplitude=0.0)
        frames = frame_signal(buffer, framing)
        track = track_pitch(frames, self.config.pitch, buffer.sample_rate, framing.frame_rate)
        return pitch_features(track, utt_id=utt_id)

    def extract(
        self,
        buffer: AudioBuffer,
        utt_id: str = "",
        kind: Optional[FeatureKind] = None,
    ) -> FeatureMatrix:
        """Features of one mono utterance.

        Mean normalization, when enabled, applies to outputs that contain
        FBANK columns.
        """
        kind = FeatureKind.from_value(kind) if kind is not None else self.default_kind
        buffer = self.prepare(buffer)
        if kind is FeatureKind.PITCH:
            feats = self.pitch(buffer, utt_id)
        elif kind is FeatureKind.FBANK:
            feats = self.fbank(buffer, utt_id)
        elif kind is FeatureKind.FBANK_PITCH:
            feats = concat_features(
                self.fbank(buffer, utt_id), self.pitch(buffer, utt_id), tolerance_frames=0
            )
        else:
            raise ValueError(f"Cannot extract features of kind {kind.value}")

        if feats.num_frames == 0:
            raise ValueError(
                f"Utterance {utt_id!r} ({buffer.num_samples} samples) is shorter than one frame"
            )
        if self.config.mean_norm and kind is not FeatureKind.PITCH:
            feats = mean_normalize(feats)
        logger.debug(f"{utt_id}: {feats.num_frames} frames x {feats.dim} dims")
        return feats


@dataclass
class ExtractionResult:
    """Archive entries sorted by key plus (utt_id, reason) failures."""

    entries: list = field(default_factory=list)
    failures: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.failures


def _extract_recording(job: tuple, config: PipelineConfig, kind: FeatureKind) -> tuple:
    """Decode one recording once and extract each of its segments."""
    wav_entry, segments = job
    entries, failures = [], []
    extractor = FeatureExtractor(config)
    try:
        audio = extractor.prepare(read_wav(wav_entry.path))
    except Exception as e:
        return [], [(seg.utt_id, f"{wav_entry.recording_id}: {e}") for seg in segments]

    for seg in segments:
        try:
            channel = seg.channel if seg.channel is not None else 0
            start, end = segment_sample_range(seg, audio.sample_rate)
            end = min(end, audio.num_samples)
            if start >= end:
                raise ValueError(f"segment [{seg.start}, {seg.end}) s holds no samples")
            piece = audio.channel(channel).slice(start, end)
            feats = extractor.extract(piece, seg.utt_id, kind)
            entries.append(ArchiveEntry(seg.utt_id, feats.with_values(feats.values.astype(np.float32))))
        except Exception as e:
            failures.append((seg.utt_id, str(e)))
    return entries, failures


def extract_manifest(
    manifest: Manifest,
    config: Optional[PipelineConfig] = None,
    kind: Optional[FeatureKind] = None,
    workers: Optional[int] = None,
) -> ExtractionResult:
    """Extract features for every utterance of a manifest.

    One job per recording; failures are logged and returned, successes kept.
    Output is independent of the worker count.
    """
    config = config or PipelineConfig()
    kind = FeatureKind.from_value(kind) if kind is not None else FeatureExtractor(config).default_kind
    workers = workers or config.resolved_workers
    jobs = [
        (manifest.wav_entries[rec_id], manifest.segments_for(rec_id))
        for rec_id in sorted(manifest.wav_entries)
    ]
    jobs = [job for job in jobs if job[1]]

    func = partial(_extract_recording, config=config, kind=kind)
    result = ExtractionResult(*collect(run_jobs(func, jobs, workers, desc="recordings")))
    for utt_id, reason in result.failures:
        logger.warning(f"Feature extraction failed for {utt_id}: {reason}")

    result.entries.sort(key=lambda entry: entry.key)
    result.failures.sort()
    logger.info(
        f"Extracted {kind.value} features for {len(result.entries)} utterances "
        f"({len(result.failures)} failed)"
    )
    return result


def collect(results: Iterable[tuple]) -> tuple[list, list]:
    """Flatten (items, failures) pairs from run_jobs."""
    items, failures = [], []
    for part, failed in results:
        items.extend(part)
        failures.extend(failed)
    return items, failures
