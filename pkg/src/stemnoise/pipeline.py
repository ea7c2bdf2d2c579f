"""Image -> normalisation -> per-block AR fit -> feature vector."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .ar_core import EXCLUDED_R1, FULL_R1, PIPELINE_EPSILON, BlockFit, check_mode, compute_energy_map
from .features import ArStats, EnergyStats, ar_statistics, energy_stats
from .imageio import load_image
from .normalization import NormalizationConfig, NormalizedImage, normalize

# Feature names in report order: AR-space statistics, then energy statistics.
FEATURES = (
    "mean_ar",
    "var_ar",
    "mean_horizontal",
    "var_horizontal",
    "mean_vertical",
    "var_vertical",
    "mean_main_diagonal",
    "var_main_diagonal",
    "mean_secondary_diagonal",
    "var_secondary_diagonal",
    "mean_energy",
    "var_energy",
    "mean_abs_energy",
    "mean_energy_full_r1",
    "var_energy_full_r1",
)


@dataclass(frozen=True)
class PipelineConfig:
    mode: str = EXCLUDED_R1
    epsilon: float = PIPELINE_EPSILON
    normalization: NormalizationConfig = field(default_factory=NormalizationConfig)

    def __post_init__(self):
        check_mode(self.mode)
        if not self.epsilon >= 0:
            raise ValueError(f"epsilon must be >= 0, got {self.epsilon!r}")

    @classmethod
    def from_options(cls, acf_mode="excluded", epsilon=PIPELINE_EPSILON, window="uniform", c=1.0):
        mode = {"excluded": EXCLUDED_R1, "full": FULL_R1}.get(acf_mode, acf_mode)
        return cls(mode=mode, epsilon=epsilon, normalization=NormalizationConfig.preset(window, c))


@dataclass(frozen=True)
class ImageAnalysis:
    normalized: NormalizedImage
    fit: BlockFit
    energy: EnergyStats
    ar: ArStats

    def as_dict(self) -> dict:
        layout = self.fit.layout
        return {
            "height": self.normalized.height,
            "width": self.normalized.width,
            "blocks_down": layout.blocks_down,
            "blocks_across": layout.blocks_across,
            "acf_mode": self.fit.mode,
            "epsilon": self.fit.epsilon,
            "degenerate_fraction": float(np.mean(self.fit.degenerate)),
            **self.energy.as_dict(),
            "ar": self.ar.as_dict(),
        }


def analyze(image, config: PipelineConfig | None = None) -> ImageAnalysis:
    config = config or PipelineConfig()
    norm = normalize(image, config.normalization)
    fit = compute_energy_map(norm, config.mode, config.epsilon)
    return ImageAnalysis(
        normalized=norm,
        fit=fit,
        energy=energy_stats(fit.energy),
        ar=ar_statistics(fit.coeffs, fit.secondary_diagonal),
    )


def feature_vector(image, config: PipelineConfig | None = None) -> dict[str, float]:
    """Every feature in :data:`FEATURES` for one luminance image.

    The ``*_full_r1`` entries always use the full lag-1 estimate, whatever
    ``config.mode`` says.
    """
    config = config or PipelineConfig()
    result = analyze(image, config)
    full = compute_energy_map(result.normalized, FULL_R1, config.epsilon)
    full_stats = energy_stats(full.energy)
    values = dict(result.ar.as_dict())
    values["mean_energy"] = result.energy.mean
    values["var_energy"] = result.energy.variance
    values["mean_abs_energy"] = result.energy.mean_abs
    values["mean_energy_full_r1"] = full_stats.mean
    values["var_energy_full_r1"] = full_stats.variance
    return {name: values[name] for name in FEATURES}


def analyze_path(path, config: PipelineConfig | None = None) -> ImageAnalysis:
    return analyze(load_image(path), config)
