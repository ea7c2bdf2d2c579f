"""Stem noise energy: block-wise AR(3) residual energy as a no-reference quality feature."""

__version__ = "0.1.0"

from ._backend import kernels as _kernels
from .ar_core import (
    ACF_MODES,
    EXCLUDED_R1,
    FULL_R1,
    PIPELINE_EPSILON,
    SOLVER_EPSILON,
    AcfEstimate,
    ArParams,
    BlockFit,
    BlockLayout,
    BlockSequence,
    compute_energy_map,
    estimate_acf,
    partition_blocks,
    solve_yule_walker,
    stem_noise_energy,
)
from .distortions import DistortionSpec, add_white_noise, blockify, gaussian_blur
from .evaluation import (
    CorrelationReport,
    DatasetManifest,
    evaluate_dataset,
    parse_manifest,
    srocc,
)
from .features import (
    ArStats,
    EnergyStats,
    Histogram,
    LabelMap,
    ar_statistics,
    energy_histogram,
    energy_stats,
    footprint_point,
    render_snem,
    threshold_segment,
)
from .imageio import load_image, write_gray
from .normalization import NormalizationConfig, NormalizedImage, local_moments, normalize
from .pipeline import FEATURES, PipelineConfig, analyze, feature_vector

BACKEND = _kernels.BACKEND
