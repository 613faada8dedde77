"""Front-end Configuration - YAML configuration loading and management."""

import os
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional

import yaml

from .data_types import (
    BeamformConfig,
    EncoderSpec,
    FbankConfig,
    FramingConfig,
    PitchConfig,
    ResamplerConfig,
    SpeedPerturbSpec,
)


@dataclass
class PipelineConfig:
    """Main front-end configuration container."""

    framing: FramingConfig = field(default_factory=FramingConfig)
    fbank: FbankConfig = field(default_factory=FbankConfig)
    pitch: PitchConfig = field(default_factory=PitchConfig)
    resampler: ResamplerConfig = field(default_factory=ResamplerConfig)
    augment: SpeedPerturbSpec = field(default_factory=SpeedPerturbSpec)
    encoder: EncoderSpec = field(default_factory=EncoderSpec.vgg_pblstm)
    beamform: BeamformConfig = field(default_factory=BeamformConfig)
    sample_rate: Optional[int] = None
    enable_pitch: bool = True
    mean_norm: bool = True
    workers: Optional[int] = None
    seed: int = 0

    def __post_init__(self) -> None:
        if self.sample_rate is not None and self.sample_rate <= 0:
            raise ValueError(f"sample_rate must be positive, got {self.sample_rate}")
        if self.workers is not None and self.workers < 1:
            raise ValueError(f"workers must be >= 1, got {self.workers}")

    @classmethod
    def from_dict(cls, data: dict) -> "PipelineConfig":
        """Create PipelineConfig from a parsed YAML document."""
        general = data.get("frontend", {}) or {}
        return cls(
            framing=FramingConfig.from_dict(data.get("framing", {}) or {}),
            fbank=FbankConfig.from_dict(data.get("fbank", {}) or {}),
            pitch=PitchConfig.from_dict(data.get("pitch", {}) or {}),
            resampler=ResamplerConfig.from_dict(data.get("resampler", {}) or {}),
            augment=SpeedPerturbSpec.from_dict(data.get("augment", {}) or {}),
            encoder=EncoderSpec.from_dict(data.get("encoder", {}) or {}),
            beamform=BeamformConfig.from_dict(data.get("beamform", {}) or {}),
            sample_rate=general.get("sample_rate"),
            enable_pitch=general.get("enable_pitch", True),
            mean_norm=general.get("mean_norm", True),
            workers=general.get("workers"),
            seed=general.get("seed", 0),
        )

    @classmethod
    def load(cls, config_path: Optional[str] = None) -> "PipelineConfig":
        """Load configuration from YAML file."""
        if config_path is None:
            # Try default locations
            possible_paths = [
                "frontend_config.yaml",
                "hifr_frontend/frontend_config.yaml",
                os.path.join(os.path.dirname(__file__), "frontend_config.yaml"),
            ]
            for path in possible_paths:
                if Path(path).exists():
                    config_path = path
                    break

        if config_path is None or not Path(config_path).exists():
            # Return default configuration
            return cls()

        with open(config_path, "r") as f:
            try:
                data = yaml.safe_load(f)
            except yaml.YAMLError as e:
                raise ValueError(f"{config_path}: {e}") from e

        if data is None:
            return cls()
        if not isinstance(data, dict):
            raise ValueError(f"{config_path}: expected a mapping at the top level")
        return cls.from_dict(data)

    @property
    def resolved_workers(self) -> int:
        """Worker count, defaulting to the machine's cores."""
        return self.workers or os.cpu_count() or 1

    def with_overrides(self, **changes) -> "PipelineConfig":
        """Copy with selected fields replaced; nested sections revalidate."""
        return replace(self, **changes)
