#!/usr/bin/env python3
"""Front-end CLI - Feature extraction, augmentation, beamforming and shape tables.

Run with: hifr-frontend <command> [options]  or  python -m hifr_frontend
"""

import argparse
import logging
import shutil
import sys
import tempfile
from dataclasses import replace
from pathlib import Path
from typing import Optional, Sequence

from hifr_frontend.audio import read_wav, write_wav
from hifr_frontend.augment import augment_manifest
from hifr_frontend.beamform import beamform
from hifr_frontend.config import PipelineConfig
from hifr_frontend.data_types import AudioBuffer, EncoderSpec, SpeedPerturbSpec
from hifr_frontend.enums import EncoderPreset, FeatureKind, PoolRounding
from hifr_frontend.errors import FrontendError
from hifr_frontend.kio import parse_manifest, read_archive, write_archive
from hifr_frontend.pipeline import extract_manifest
from hifr_frontend.shapes import frame_rate_table

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2


def _float_list(text: str) -> list:
    try:
        return [float(item) for item in text.split(",") if item.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


# =============================================================================
# Configuration
# =============================================================================


def build_config(args: argparse.Namespace) -> PipelineConfig:
    """Load the YAML configuration and apply command-line overrides.

    Raises:
        ValueError: if the resulting configuration is invalid.
    """
    config = PipelineConfig.load(args.config)
    framing = config.framing
    if getattr(args, "frame_rate", None) is not None:
        framing = replace(framing, frame_rate=args.frame_rate)
    if getattr(args, "frame_length_ms", None) is not None:
        framing = replace(framing, frame_length_ms=args.frame_length_ms)
    fbank = config.fbank
    if getattr(args, "num_mel", None) is not None:
        fbank = replace(fbank, num_mel=args.num_mel)
    augment = config.augment
    if getattr(args, "speeds", None) is not None:
        augment = SpeedPerturbSpec(tuple(args.speeds), augment.prefix_template)
    encoder = config.encoder
    if getattr(args, "encoder", None):
        encoder = replace(EncoderSpec.from_preset(args.encoder), pool_rounding=encoder.pool_rounding)
    if getattr(args, "pool_rounding", None):
        encoder = replace(encoder, pool_rounding=PoolRounding.from_value(args.pool_rounding))
    beam = config.beamform
    if getattr(args, "max_delay", None) is not None:
        beam = replace(beam, max_delay_samples=args.max_delay)
    if getattr(args, "reference_channel", None) is not None:
        beam = replace(beam, reference_channel=args.reference_channel)

    return config.with_overrides(
        framing=framing,
        fbank=fbank,
        augment=augment,
        encoder=encoder,
        beamform=beam,
        sample_rate=getattr(args, "sample_rate", None) or config.sample_rate,
        enable_pitch=config.enable_pitch and not getattr(args, "no_pitch", False),
        mean_norm=config.mean_norm and not getattr(args, "no_mean_norm", False),
        workers=args.workers if args.workers is not None else config.workers,
        seed=args.seed if args.seed is not None else config.seed,
    )


# =============================================================================
# Commands
# =============================================================================


def _extract(args: argparse.Namespace, config: PipelineConfig, kind: FeatureKind) -> int:
    manifest = parse_manifest(args.wav_scp, args.segments)
    result = extract_manifest(manifest, config, kind, config.resolved_workers)
    for entry in result.entries:
        print(f"{entry.key} {entry.matrix.num_frames}")
    write_archive(result.entries, args.out_ark, args.out_scp)
    if result.failures:
        for utt_id, reason in result.failures:
            print(f"FAILED {utt_id}: {reason}", file=sys.stderr)
        return EXIT_FAILURE
    return EXIT_OK


def cmd_fbank(args: argparse.Namespace, config: PipelineConfig) -> int:
    """Write FBANK (+ pitch) archives for every utterance of the manifest."""
    kind = FeatureKind.FBANK_PITCH if config.enable_pitch else FeatureKind.FBANK
    return _extract(args, config, kind)


def cmd_pitch(args: argparse.Namespace, config: PipelineConfig) -> int:
    """Write 3-column pitch archives."""
    return _extract(args, config, FeatureKind.PITCH)


def _check_writable(out_dir: Path) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    with tempfile.NamedTemporaryFile(dir=out_dir):
        pass


def cmd_perturb(args: argparse.Namespace, config: PipelineConfig) -> int:
    """Write speed-perturbed copies and combined manifests to --out-dir."""
    out_dir = Path(args.out_dir)
    try:
        _check_writable(out_dir)
    except OSError as e:
        logger.error(f"Output directory {out_dir} is not writable: {e}")
        return EXIT_FAILURE

    wav_scp_out = out_dir / "wav.scp"
    segments_out = out_dir / "segments"
    spec = config.augment
    if spec.speeds == (1.0,):
        shutil.copyfile(args.wav_scp, wav_scp_out)
        if args.segments:
            shutil.copyfile(args.segments, segments_out)
        logger.info(f"Speeds [1.0]: copied manifests to {out_dir}")
        return EXIT_OK

    manifest = parse_manifest(args.wav_scp, args.segments)
    result = augment_manifest(
        manifest, spec, out_dir, config.resampler, config.resolved_workers
    )
    result.manifest.write(wav_scp_out, segments_out if result.manifest.has_segments else None)
    print(
        f"{manifest.num_utterances} utterances -> {result.manifest.num_utterances} "
        f"({result.files_written} files written)"
    )
    if result.failures:
        for item_id, reason in result.failures:
            print(f"FAILED {item_id}: {reason}", file=sys.stderr)
        return EXIT_FAILURE
    return EXIT_OK


def _load_channels(paths: Sequence[str]) -> AudioBuffer:
    buffers = [read_wav(path) for path in paths]
    rates = {buf.sample_rate for buf in buffers}
    if len(rates) > 1:
        raise ValueError(f"Channel files have different sample rates: {sorted(rates)}")
    length = min(buf.num_samples for buf in buffers)
    if any(buf.num_samples != length for buf in buffers):
        logger.warning(f"Channel lengths differ; truncating to {length} samples")
    channels = [row[:length] for buf in buffers for row in buf.samples]
    if not 2 <= len(channels) <= 8:
        raise ValueError(f"Beamforming needs 2-8 channels, got {len(channels)}")
    return AudioBuffer.from_channels(channels, rates.pop())


def cmd_beamform(args: argparse.Namespace, config: PipelineConfig) -> int:
    """Beamform channel files into one mono WAV."""
    channels = _load_channels(args.channels)
    beam = config.beamform
    limit = max(1, channels.num_samples // 4)
    if beam.max_delay_samples > limit:
        logger.warning(f"max_delay {beam.max_delay_samples} too long for the input; using {limit}")
        beam = replace(beam, max_delay_samples=limit)

    result = beamform(channels, beam)
    write_wav(result.output, args.output)
    for index, (tdoa, weight) in enumerate(zip(result.tdoas, result.weights)):
        print(
            f"channel {index}: delay {tdoa.delay} confidence {tdoa.confidence:.3f} "
            f"weight {weight:.3f}"
        )
    return EXIT_OK


def cmd_shapes(args: argparse.Namespace, config: PipelineConfig) -> int:
    """Print encoder output lengths per duration and frame rate."""
    rows = frame_rate_table(
        args.durations, args.frame_rates, config.encoder, config.framing, args.sample_rate or 16000
    )
    print("duration frame_rate input_frames encoder_frames extracted_frames extracted_encoder_frames")
    for row in rows:
        print(
            f"{row.duration:g} {row.frame_rate:g} {row.input_frames} {row.encoder_frames} "
            f"{row.extracted_frames} {row.extracted_encoder_frames}"
        )
    return EXIT_OK


def cmd_inspect(args: argparse.Namespace, config: PipelineConfig) -> int:
    """Print key, rows and cols of every archive entry."""
    for entry in read_archive(args.archive):
        print(f"{entry.key} {entry.matrix.num_frames} {entry.matrix.dim}")
    return EXIT_OK


# =============================================================================
# Parser
# =============================================================================


def _build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=str, default=None, help="YAML config file")
    common.add_argument("--workers", type=int, default=None, help="Worker processes (default: all cores)")
    common.add_argument("--seed", type=int, default=None, help="Dither seed")
    common.add_argument("--sample-rate", type=int, default=None, help="Resample audio to this rate")
    common.add_argument("--verbose", action="store_true", help="Enable verbose logging")

    manifest = argparse.ArgumentParser(add_help=False)
    manifest.add_argument("--wav-scp", required=True, help="Recording manifest")
    manifest.add_argument("--segments", default=None, help="Segments manifest (default: whole files)")

    features = argparse.ArgumentParser(add_help=False)
    features.add_argument("--out-ark", required=True, help="Output archive")
    features.add_argument("--out-scp", default=None, help="Output index file")
    features.add_argument("--frame-rate", type=float, default=None, help="Frames per second")
    features.add_argument("--frame-length-ms", type=float, default=None, help="Frame length in ms")
    features.add_argument("--num-mel", type=int, default=None, help="Number of mel filters")
    features.add_argument("--no-pitch", action="store_true", help="Skip the 3 pitch columns")
    features.add_argument("--no-mean-norm", action="store_true", help="Skip mean normalization")

    parser = argparse.ArgumentParser(
        prog="hifr-frontend",
        description="High-frame-rate speech front-end",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fbank", parents=[common, manifest, features], help="FBANK (+pitch) features")
    p.set_defaults(func=cmd_fbank)
    p = sub.add_parser("pitch", parents=[common, manifest, features], help="Pitch features")
    p.set_defaults(func=cmd_pitch)

    p = sub.add_parser("perturb", parents=[common, manifest], help="Speed perturbation")
    p.add_argument("--speeds", type=_float_list, default=None, help="e.g. 0.9,1.0,1.1")
    p.add_argument("--out-dir", required=True, help="Directory for WAVs and manifests")
    p.set_defaults(func=cmd_perturb)

    p = sub.add_parser("beamform", parents=[common], help="Delay-and-sum beamforming")
    p.add_argument("--channels", nargs="+", required=True, help="Channel WAV files")
    p.add_argument("--output", required=True, help="Output mono WAV")
    p.add_argument("--max-delay", type=int, default=None, help="Maximum delay in samples")
    p.add_argument("--reference-channel", type=int, default=None, help="Reference channel index")
    p.set_defaults(func=cmd_beamform)

    p = sub.add_parser("shapes", parents=[common], help="Encoder output lengths")
    p.add_argument("--durations", type=_float_list, default=[1.0], help="Seconds, e.g. 1,2.5")
    p.add_argument("--frame-rates", type=_float_list, default=[100.0, 200.0, 400.0])
    p.add_argument("--encoder", choices=[e.value for e in EncoderPreset], default=None)
    p.add_argument("--pool-rounding", choices=[r.value for r in PoolRounding], default=None)
    p.set_defaults(func=cmd_shapes)

    p = sub.add_parser("inspect", parents=[common], help="List archive entries")
    p.add_argument("archive", help="Archive (.ark) or index (.scp)")
    p.set_defaults(func=cmd_inspect)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Main entry point for the front-end CLI."""
    args = _build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(asctime)s | %(name)s | %(levelname)s | %(message)s",
    )
    if args.verbose:
        logging.getLogger().setLevel(logging.DEBUG)

    try:
        config = build_config(args)
    except (ValueError, OSError) as e:
        logger.error(f"Invalid configuration: {e}")
        return EXIT_USAGE

    try:
        return args.func(args, config)
    except (FrontendError, OSError) as e:
        logger.error(str(e))
        return EXIT_FAILURE
    except ValueError as e:
        logger.error(str(e))
        return EXIT_USAGE


if __name__ == "__main__":
    raise SystemExit(main())
