"""Random-dynamical-systems experiments on top of the solver."""

from .absorbing import AbsorbingEstimate, absorbing_radius, beta_scan
from .cocycle import CocycleRun, phi, pullback_images, start_state
from .dimension import DimensionEstimate, attractor_samples, box_dimension, fractal_dimension, synthetic_cloud
from .modes import ModesReport, determining_modes
from .projector import ProjectorSpec
from .pullback import PullbackReport, diameter, hausdorff_semidistance, pullback_experiment
from .squeezing import SqueezingEstimate, linear_delta, log_linear_delta, squeezing_estimate

__all__ = [
    "AbsorbingEstimate", "absorbing_radius", "beta_scan", "CocycleRun", "phi", "pullback_images",
    "start_state", "DimensionEstimate", "attractor_samples", "box_dimension", "fractal_dimension",
    "synthetic_cloud", "ModesReport", "determining_modes", "ProjectorSpec", "PullbackReport",
    "diameter", "hausdorff_semidistance", "pullback_experiment", "SqueezingEstimate",
    "linear_delta", "log_linear_delta", "squeezing_estimate",
]
