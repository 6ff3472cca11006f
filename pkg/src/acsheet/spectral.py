"""Discrete sine basis on the interior nodes of a Dirichlet grid.

The basis ``e_n(x_i) = sqrt(2/L) sin(n pi x_i / L)``, ``n = 1..N``, is exactly
orthonormal for the discrete inner product ``(u, v)_h = dx * sum(u_i v_i)``,
so the transforms below are exact inverses of each other (up to round-off)
and Parseval holds for the discrete L2 norm.
"""

from functools import lru_cache

import numpy as np
from scipy.fft import dst


def mode_numbers(N):
    return np.arange(1, N + 1, dtype=float)


def discrete_eigenvalues(L, N):
    """Eigenvalues of the negative 3-point Dirichlet Laplacian."""
    dx = L / (N + 1)
    n = mode_numbers(N)
    return (4.0 / dx**2) * np.sin(n * np.pi * dx / (2.0 * L)) ** 2


def continuum_eigenvalues(L, N):
    return (mode_numbers(N) * np.pi / L) ** 2


def to_modes(u, L):
    """Coefficients ``(u, e_n)_h`` of interior values ``u`` (last axis)."""
    N = u.shape[-1]
    dx = L / (N + 1)
    return (0.5 * dx * np.sqrt(2.0 / L)) * dst(u, type=1, axis=-1)


def from_modes(c, L):
    """Interior values of ``sum_n c_n e_n`` (last axis holds the modes)."""
    return (0.5 * np.sqrt(2.0 / L)) * dst(c, type=1, axis=-1)


def eval_modes(c, L, x):
    """Evaluate the sine series with coefficients ``c`` at arbitrary points."""
    c = np.asarray(c, dtype=float)
    n = mode_numbers(c.shape[-1])
    basis = np.sqrt(2.0 / L) * np.sin(np.multiply.outer(np.asarray(x, float), n) * np.pi / L)
    return basis @ c


@lru_cache(maxsize=32)
def _cell_projection(L, N):
    dx = L / (N + 1)
    n = mode_numbers(N)[:, None]
    edges = np.arange(N + 2) * dx
    k = n * np.pi / L
    # (1/dx) * int_cell e_n(y) dy, exact
    cos_e = np.cos(k * edges[None, :])
    C = np.sqrt(2.0 / L) * (cos_e[:, :-1] - cos_e[:, 1:]) / (k * dx)
    C.setflags(write=False)
    return C


def cell_projection(L, N):
    """Matrix ``C[n-1, j]`` mapping cell increments to mode increments.

    For noise that is constant in each cell the mode-n integral of the cell
    increments ``xi_j`` is ``sum_j C[n-1, j] xi_j``.
    """
    return _cell_projection(float(L), int(N))
