"""Numerical laboratory for the 1D stochastic Allen-Cahn equation with space-time white noise."""

from .drift import DriftPolynomial, allen_cahn, make_drift
from .errors import AcsheetError, ConfigInvalid
from .green_kernel import KernelParams, kernel, kernel_images, kernel_spectral
from .grid_noise import GridSpec, NoisePath, TestFunction, make_grid
from .solver import SolveConfig, solve_u, step_v
from .stoch_conv import OUState, evolve, z_kernel_quadrature

__version__ = "0.1.0"

__all__ = [
    "DriftPolynomial", "allen_cahn", "make_drift", "AcsheetError", "ConfigInvalid", "KernelParams",
    "kernel", "kernel_images", "kernel_spectral", "GridSpec", "NoisePath", "TestFunction", "make_grid",
    "SolveConfig", "solve_u", "step_v", "OUState", "evolve", "z_kernel_quadrature",
]
