"""Stochastic convolution Z_beta = int int G_{beta,t-s}(x, y) W(ds, dy).

Two discretizations share the same cell increments, so they can be compared
path by path:

* spectral: every sine mode is an Ornstein-Uhlenbeck process, advanced by
  the exponential-Euler step, which is exact for noise that is constant on
  each space-time cell;
* quadrature: the kernel sum over cells with G taken at the space midpoint
  of each cell, and in time either at the midpoint lag or, next to the
  diagonal, integrated exactly over the cell.
"""

import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import spectral
from .errors import EnsembleTooSmall, GridMismatch, StepMisalignment
from .green_kernel import KernelParams, kernel, kernel_time_integral
from .grid_noise import NoisePath, TestFunction, l2_norm, lp_norm, make_grid


@dataclass(frozen=True)
class OUState:
    """Sine coefficients of Z at absolute view step ``k``."""

    grid: object
    beta: float
    k: int
    z: np.ndarray

    @property
    def t(self):
        return self.k * self.grid.dt

    @property
    def n_modes(self):
        return self.z.shape[-1]

    @classmethod
    def zero(cls, grid, beta, k=None, n_modes=None):
        n = grid.N if n_modes is None else n_modes
        if n > grid.N:
            raise ValueError(f"{n} modes requested on a grid with N={grid.N}")
        return cls(grid, float(beta), grid.k0 if k is None else int(k), np.zeros(n))

    def nodal(self):
        return reconstruct(self.z, self.grid)


def ou_coefficients(grid, beta, n_modes=None):
    """Per-mode decay ``a`` and noise weight ``b`` of the exponential-Euler step."""
    n = grid.N if n_modes is None else n_modes
    mu = beta + grid.lambdas[:n]
    h = mu * grid.dt
    a = np.exp(-h)
    b = -np.expm1(-h) / h
    return a, b


def stationary_variance(grid, beta, n=1):
    return 1.0 / (2.0 * (beta + grid.lam(n)))


def _check_noise(noise, grid):
    if noise.grid.L != grid.L or noise.grid.N != grid.N or noise.grid.dt != grid.dt:
        raise GridMismatch("noise path and state live on different grids")


def z_spectral_step(state, noise, k):
    """One exponential-Euler step from view step ``k`` to ``k + 1``."""
    if k != state.k:
        raise StepMisalignment(f"state is at step {state.k}, asked to advance step {k}")
    _check_noise(noise, state.grid)
    a, b = ou_coefficients(state.grid, state.beta, state.n_modes)
    g = noise.modal_increments(k, k + 1)[0, : state.n_modes]
    return replace(state, k=k + 1, z=a * state.z + b * g)


def evolve(state, noise, k1, record=False):
    """Advance ``state`` to step ``k1``; optionally return every intermediate z.

    The recursion is the same sequence of floating point operations as
    repeated ``z_spectral_step`` calls.
    """
    _check_noise(noise, state.grid)
    if k1 < state.k:
        raise StepMisalignment(f"cannot evolve backwards from {state.k} to {k1}")
    a, b = ou_coefficients(state.grid, state.beta, state.n_modes)
    z = state.z
    traj = [z] if record else None
    k = state.k
    chunk = 4096
    while k < k1:
        k_end = min(k + chunk, k1)
        g = noise.modal_increments(k, k_end)[:, : state.n_modes]
        for row in g:
            z = a * z + b * row
            if record:
                traj.append(z)
        k = k_end
    out = replace(state, k=k1, z=z)
    if record:
        return out, np.array(traj)
    return out


def reconstruct(z, grid):
    """Nodal values of the sine series (zero-padded to the grid's N modes)."""
    z = np.asarray(z, float)
    if z.shape[-1] < grid.N:
        pad = np.zeros(z.shape[:-1] + (grid.N - z.shape[-1],))
        z = np.concatenate([z, pad], axis=-1)
    return spectral.from_modes(z, grid.L)


def z_kernel_quadrature(noise, t, x, beta=0.0, near_steps=32):
    """Kernel sum for Z(t, x) with Z starting from zero at grid.t0.

    Space uses the cell midpoints.  Time uses the lag at the cell midpoint,
    except for the ``near_steps`` cells closest to ``t`` where the kernel is
    integrated over the cell exactly (the midpoint rule there is off by O(1)
    once dt is not small against dx^2).  ``near_steps=0`` gives the plain
    midpoint rule in time.
    """
    grid = noise.grid
    params = KernelParams(L=grid.L, beta=beta)
    k_start = grid.k0
    k_end = int(round(t / grid.dt))
    if abs(k_end * grid.dt - t) > 1e-9 * max(1.0, abs(t)):
        raise GridMismatch(f"t={t} is not on the time grid")
    x = np.atleast_1d(np.asarray(x, float))
    if k_end <= k_start:
        return np.zeros(x.shape)
    xi = noise.increments(k_start, k_end)
    if not np.any(xi):
        return np.zeros(x.shape)
    y = grid.midpoints
    steps = np.arange(k_start, k_end)
    lag = t - (steps + 0.5) * grid.dt
    near = steps >= k_end - near_steps
    W = np.empty((x.size, steps.size, y.size))
    far = ~near
    if far.any():
        W[:, far] = kernel(params, lag[far][None, :, None], x[:, None, None], y[None, None, :])
    if near.any():
        lo = np.maximum(t - (steps[near] + 1) * grid.dt, 0.0)
        hi = t - steps[near] * grid.dt
        exact = kernel_time_integral(params, lo[None, :, None], hi[None, :, None],
                                     x[:, None, None], y[None, None, :])
        W[:, near] = np.exp(-beta * lag[near])[None, :, None] * exact / grid.dt
    return np.einsum("pkj,kj->p", W, xi)


@dataclass
class ZDiagnostics:
    """Raw per-checkpoint values for one noise path."""

    seed: int
    times: np.ndarray
    sup_norm: np.ndarray
    z_phi: np.ndarray
    l2: np.ndarray
    l2p: np.ndarray

    def rows(self):
        for i, t in enumerate(self.times):
            yield dict(seed=self.seed, t=t, sup_norm=self.sup_norm[i],
                       z_phi_over_t=self.z_phi[i] / t if t > 0 else 0.0,
                       l2_norm=self.l2[i], l2p_norm=self.l2p[i])


@dataclass
class GrowthSummary:
    epsilon: float
    checkpoints: np.ndarray
    exceedance: np.ndarray
    exceedance_se: np.ndarray
    median_zphi_over_t: np.ndarray
    max_zphi_over_t: np.ndarray
    paths: list = field(repr=False, default_factory=list)

    def at(self, t):
        i = int(np.argmin(np.abs(self.checkpoints - t)))
        return i


def z_diagnostics(seed, grid, beta, checkpoints, phi, q=4, cache_blocks=8):
    """Evolve Z on one path from zero at time 0 and record the diagnostics."""
    noise = NoisePath(seed, grid, cache_blocks=cache_blocks)
    state = OUState.zero(grid, beta)
    steps = [int(round(t / grid.dt)) for t in checkpoints]
    sup, zphi, l2, lq = [], [], [], []
    acc = 0.0
    k_prev = state.k
    for k in steps:
        # martingale part int int phi(y) W(ds, dy), accumulated blockwise
        for k0 in range(k_prev, k, 4096):
            k1 = min(k0 + 4096, k)
            acc += float(np.sum(noise.increments(k0, k1) @ phi.phi_mid))
        state = evolve(state, noise, k)
        k_prev = k
        u = state.nodal()
        sup.append(float(np.max(u)) if k > 0 else 0.0)
        zphi.append(acc)
        l2.append(float(l2_norm(u, grid.dx)))
        lq.append(float(lp_norm(u, grid.dx, q)))
    return ZDiagnostics(seed, np.asarray(checkpoints, float), np.array(sup), np.array(zphi),
                        np.array(l2), np.array(lq))


def growth_report(seeds, beta, t_max, epsilon, L=1.0, N=128, dt=1e-2, checkpoints=None,
                  exponent=None, map_fn=map):
    """Exceedance of Zhat(t) > t^(1/4 + eps) and decay of |Z^phi(t)|/t over an ensemble.

    ``exponent`` overrides the threshold exponent 1/4 + eps.
    """
    seeds = list(seeds)
    if len(seeds) < 50:
        raise EnsembleTooSmall(f"need at least 50 paths, got {len(seeds)}")
    grid = make_grid(L, N, 0.0, t_max, dt)
    if checkpoints is None:
        checkpoints = [2.0**m for m in range(0, int(math.log2(t_max)) + 1)]
        checkpoints = sorted(set(checkpoints) | {10.0, 100.0} if t_max >= 100 else set(checkpoints))
    checkpoints = np.asarray([c for c in checkpoints if c <= t_max], float)
    phi = TestFunction.sine(grid, 1)
    paths = list(map_fn(lambda s: z_diagnostics(s, grid, beta, checkpoints, phi), seeds))
    expo = 0.25 + epsilon if exponent is None else exponent
    sup = np.array([p.sup_norm for p in paths])
    zphi = np.abs(np.array([p.z_phi for p in paths])) / checkpoints
    exc = np.mean(sup > checkpoints**expo, axis=0)
    se = np.sqrt(np.maximum(exc * (1 - exc), 1.0 / len(seeds)) / len(seeds))
    return GrowthSummary(epsilon, checkpoints, exc, se, np.median(zphi, axis=0),
                         np.max(zphi, axis=0), paths)


def ito_variance(grid, beta, t, x):
    """int_0^t int_0^L G_{beta,s}(x, y)^2 dy ds, the Ito-isometry variance."""
    from .green_kernel import space_time_integral

    return space_time_integral(KernelParams(L=grid.L, beta=beta), 2, x, t)


def holder_slopes(traj, grid, lags=(1, 2, 4, 8, 16)):
    """Log-log slopes of mean-square increments of Z in time and space.

    For space-time white noise these scale like |dt|^(1/2) and |dx|^1 in
    mean square, i.e. Holder exponents 1/4 and 1/2.
    """
    U = reconstruct(traj, grid)
    lt, lx, st, sx = [], [], [], []
    for h in lags:
        if h < U.shape[0]:
            lt.append(h * grid.dt)
            st.append(np.sqrt(np.mean((U[h:] - U[:-h]) ** 2)))
        if h < U.shape[1]:
            lx.append(h * grid.dx)
            sx.append(np.sqrt(np.mean((U[:, h:] - U[:, :-h]) ** 2)))
    slope_t = float(np.polyfit(np.log(lt), np.log(st), 1)[0])
    slope_x = float(np.polyfit(np.log(lx), np.log(sx), 1)[0])
    return slope_t, slope_x
