"""
High-frame-rate speech front-end

Feature extraction and data preparation for end-to-end speech recognition
at raised feature frame rates (100, 200 or 400 frames per second).

Main features:
- 40-dimensional log mel filterbank (FBANK) features at any frame rate
- 3-dimensional pitch features (ln f0, delta log-pitch, probability of voicing)
- Speed perturbation of recordings and their segment manifests
- GCC-PHAT weighted delay-and-sum beamforming
- Encoder temporal shape arithmetic (VGG + pBLSTM subsampling)
- Binary feature archives with index files, wav.scp/segments manifests

Example:
    from hifr_frontend import FeatureExtractor, PipelineConfig, read_wav

    config = PipelineConfig.load()
    feats = FeatureExtractor(config).extract(read_wav("utt.wav"), "utt1")
    print(feats.values.shape)  # (98, 43) for 1 s at 100 fps

License: MIT
"""

__version__ = "0.1.0"

from .enums import EncoderPreset, FeatureKind, LayerKind, PoolRounding, WavEncoding, WindowType
from .errors import (
    ArchiveFormatError,
    AugmentError,
    BeamformError,
    DuplicateKeyError,
    FeatureMismatchError,
    FilterbankGeometryError,
    FrontendError,
    ManifestError,
    WavFormatError,
)
from .data_types import (
    ArchiveEntry,
    AudioBuffer,
    BeamformConfig,
    EncoderSpec,
    FbankConfig,
    FeatureMatrix,
    FramingConfig,
    LayerGeometry,
    Manifest,
    MelFilterbank,
    PitchConfig,
    PitchTrack,
    ResamplerConfig,
    SegmentRecord,
    SpectrumMatrix,
    SpeedPerturbSpec,
    TdoaEstimate,
    WavEntry,
)
from .config import PipelineConfig
from .audio import probe_wav, read_wav, resample, write_wav
from .framing import frame_signal, num_frames, preemphasize, window_and_spectrum
from .fbank import build_mel_filterbank, compute_fbank, concat_features, mean_normalize
from .pitch import compute_nccf, pitch_features, track_pitch
from .augment import augment_manifest, perturb_speed, rescale_segments, shift_segments
from .beamform import beamform, delay_and_sum, gcc_phat_tdoa
from .shapes import encoder_output_length, layer_out_len, total_subsample_factor
from .kio import parse_manifest, read_archive, write_archive
from .pipeline import FeatureExtractor, extract_manifest

__all__ = [
    # Enums
    "EncoderPreset",
    "FeatureKind",
    "LayerKind",
    "PoolRounding",
    "WavEncoding",
    "WindowType",
    # Errors
    "ArchiveFormatError",
    "AugmentError",
    "BeamformError",
    "DuplicateKeyError",
    "FeatureMismatchError",
    "FilterbankGeometryError",
    "FrontendError",
    "ManifestError",
    "WavFormatError",
    # Data types
    "ArchiveEntry",
    "AudioBuffer",
    "BeamformConfig",
    "EncoderSpec",
    "FbankConfig",
    "FeatureMatrix",
    "FramingConfig",
    "LayerGeometry",
    "Manifest",
    "MelFilterbank",
    "PipelineConfig",
    "PitchConfig",
    "PitchTrack",
    "ResamplerConfig",
    "SegmentRecord",
    "SpectrumMatrix",
    "SpeedPerturbSpec",
    "TdoaEstimate",
    "WavEntry",
    # Operations
    "FeatureExtractor",
    "augment_manifest",
    "beamform",
    "build_mel_filterbank",
    "compute_fbank",
    "compute_nccf",
    "concat_features",
    "delay_and_sum",
    "encoder_output_length",
    "extract_manifest",
    "frame_signal",
    "gcc_phat_tdoa",
    "layer_out_len",
    "mean_normalize",
    "num_frames",
    "parse_manifest",
    "perturb_speed",
    "pitch_features",
    "preemphasize",
    "probe_wav",
    "read_archive",
    "read_wav",
    "rescale_segments",
    "resample",
    "shift_segments",
    "total_subsample_factor",
    "track_pitch",
    "window_and_spectrum",
    "write_archive",
    "write_wav",
]
