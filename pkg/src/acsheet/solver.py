"""Pathwise solver for V_t = V_xx + f(V + Z) + beta Z, with U = V + Z.

Z is carried as sine coefficients (exponential-Euler, see ``stoch_conv``)
and V as nodal values.  The default step is semi-implicit:

    (I - dt D_h) V' = V + dt [f(V + Z) + beta Z]

with D_h the 3-point Dirichlet Laplacian.  ``scheme="etd"`` instead treats
``D_h + a_1`` exactly in the discrete sine basis (exponential Euler), which
is exact for linear drifts and is what the linear squeezing oracle needs.
"""

import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.linalg import lapack

from . import spectral
from .drift import DriftPolynomial
from .errors import GridMismatch, StabilityGuardViolated, StepMisalignment
from .grid_noise import TestFunction, inner, l2_norm
from .stoch_conv import OUState, ou_coefficients, reconstruct

SCHEMES = ("semi-implicit", "etd")


@dataclass(frozen=True)
class SolveConfig:
    drift: DriftPolynomial
    beta: float = 1.0
    dt: float = 1e-4
    scheme: str = "semi-implicit"

    def __post_init__(self):
        if self.beta < 0:
            raise ValueError("beta must be non-negative")
        if self.scheme not in SCHEMES:
            raise ValueError(f"unknown scheme {self.scheme!r}; expected one of {SCHEMES}")
        if not self.dt * self.drift.K < 1:
            raise StabilityGuardViolated(
                f"dt*K = {self.dt * self.drift.K:.6g} >= 1 (dt={self.dt}, K={self.drift.K})")


def laplacian(u, dx):
    """3-point Dirichlet Laplacian over the last axis (zeros beyond the ends)."""
    out = -2.0 * u
    out[..., 1:] += u[..., :-1]
    out[..., :-1] += u[..., 1:]
    return out / dx**2


class Stepper:
    """Precomputed linear algebra for one (grid, config) pair."""

    def __init__(self, grid, cfg):
        if abs(cfg.dt - grid.dt) > 1e-12 * grid.dt:
            raise GridMismatch(f"config dt={cfg.dt} differs from grid dt={grid.dt}")
        self.grid = grid
        self.cfg = cfg
        self.f = cfg.drift
        N, dx, dt = grid.N, grid.dx, grid.dt
        r = dt / dx**2
        dl = np.full(N - 1, -r)
        d = np.full(N, 1.0 + 2.0 * r)
        du = np.full(N - 1, -r)
        self._lu = lapack.dgttrf(dl, d, du)[:5]
        lam = grid.lambdas_h
        if cfg.scheme == "etd":
            a1 = self.f.coeffs[1] if len(self.f.coeffs) > 1 else 0.0
            self.a1 = a1
            h = (a1 - lam) * dt
            self.E = np.exp(h)
            # phi_1(h) dt = (e^h - 1)/(h/dt), with the h -> 0 limit
            self.P1 = np.where(np.abs(h) > 1e-12, np.expm1(h) / np.where(h == 0, 1, h), 1.0) * dt
            rest = list(self.f.coeffs)
            if len(rest) > 1:
                rest[1] = 0.0
            self.rest = DriftPolynomial(tuple(rest), K=self.f.K)
        self.za, self.zb = ou_coefficients(grid, cfg.beta)

    def solve(self, rhs):
        """(I - dt D_h)^{-1} rhs for rhs of shape (..., N)."""
        shape = rhs.shape
        b = np.asfortranarray(rhs.reshape(-1, shape[-1]).T)
        x, info = lapack.dgttrs(*self._lu, b)
        if info != 0:
            raise RuntimeError(f"dgttrs failed with info={info}")
        return x.T.reshape(shape)

    def step_v(self, V, Z):
        dt, beta = self.grid.dt, self.cfg.beta
        if self.cfg.scheme == "semi-implicit":
            return self.solve(V + dt * (self.f(V + Z) + beta * Z))
        L = self.grid.L
        forcing = self.rest(V + Z) + (self.a1 + beta) * Z
        return spectral.from_modes(self.E * spectral.to_modes(V, L)
                                   + self.P1 * spectral.to_modes(forcing, L), L)

    def step_difference(self, Y, U):
        """Noise-free update of a difference Y = U1 - U2 with U2 = U."""
        dt = self.grid.dt
        if self.cfg.scheme == "semi-implicit":
            return self.solve(Y + dt * self.f.difference(U, Y))
        L = self.grid.L
        return spectral.from_modes(self.E * spectral.to_modes(Y, L)
                                   + self.P1 * spectral.to_modes(self.rest.difference(U, Y), L), L)


def step_v(V, Z, cfg, grid):
    """One step of the random PDE for V (see module docstring)."""
    V = np.asarray(V, float)
    Z = np.asarray(Z, float)
    if V.shape[-1] != grid.N or Z.shape[-1] != grid.N:
        raise GridMismatch("V and Z must live on the grid's interior nodes")
    return _stepper(grid, cfg).step_v(V, Z)


_STEPPERS = {}


def _stepper(grid, cfg):
    key = (grid.L, grid.N, grid.dt, cfg)
    st = _STEPPERS.get(key)
    if st is None:
        st = Stepper(grid.with_window(0.0, grid.dt), cfg)
        if len(_STEPPERS) > 64:
            _STEPPERS.clear()
        _STEPPERS[key] = st
    return st


@dataclass(frozen=True)
class PairState:
    """Solver state at absolute view step k: V (batch, N) and Z sine modes."""

    k: int
    V: np.ndarray
    z: np.ndarray

    def U(self, grid):
        return self.V + reconstruct(self.z, grid)

    def Z(self, grid):
        return reconstruct(self.z, grid)


@dataclass
class Trajectory:
    grid: object
    times: np.ndarray
    U: np.ndarray
    V: np.ndarray
    Z: np.ndarray
    final: PairState = field(repr=False, default=None)

    def rows(self):
        x = self.grid.nodes
        for i, t in enumerate(self.times):
            for b in range(self.U.shape[1]):
                for j, xj in enumerate(x):
                    yield dict(t=t, member=b, x=xj, U=self.U[i, b, j], V=self.V[i, b, j], Z=self.Z[i, j])


def spin_up_steps(grid, beta):
    return int(math.ceil(10.0 / (beta + grid.lam(1)) / grid.dt))


def initial_z(noise, beta, k_start, z0=None):
    """Z modes at step k_start: zero at time 0, else spun up from zero.

    The spin-up runs over the ``10/(beta + lambda_1)`` window before the start
    on the same two-sided noise, so different horizons see consistent Z.
    """
    grid = noise.grid
    if z0 is not None:
        return np.asarray(z0, float)
    if k_start == 0:
        return np.zeros(grid.N)
    from .stoch_conv import evolve

    k0 = k_start - spin_up_steps(grid, beta)
    st = OUState(grid, float(beta), k0, np.zeros(grid.N))
    return evolve(st, noise, k_start).z


def advance(state, noise, cfg, k1, record_steps=None, stepper=None):
    """Advance the pair state to absolute step ``k1``.

    ``record_steps`` is a sorted iterable of absolute steps at which to
    store (U, V, Z).  Noise for step k is only ever requested when the state
    sits at step k, i.e. the run is adapted.
    """
    grid = noise.grid
    if k1 < state.k:
        raise StepMisalignment(f"cannot advance backwards from {state.k} to {k1}")
    st = stepper or _stepper(grid, cfg)
    want = set(record_steps or ())
    recU, recV, recZ, rect = [], [], [], []
    V, z, k = state.V, state.z, state.k
    za, zb = st.za, st.zb
    L = grid.L

    def rec(k, V, Znod):
        rect.append(k * grid.dt)
        recU.append(V + Znod)
        recV.append(V)
        recZ.append(Znod)

    chunk = 1024
    while True:
        kc = min(k + chunk, k1)
        g = noise.modal_increments(k, kc) if kc > k else None
        for i in range(kc - k):
            Znod = spectral.from_modes(z, L)
            if k in want:
                rec(k, V, Znod)
            V = st.step_v(V, Znod)
            z = za * z + zb * g[i]
            k += 1
        if k >= k1:
            break
    if k in want:
        rec(k, V, spectral.from_modes(z, L))
    final = PairState(k, V, z)
    return final, (np.array(rect), np.array(recU), np.array(recV), np.array(recZ))


def _as_batch(u0, grid):
    u0 = np.asarray(u0, float)
    if u0.shape[-1] != grid.N:
        raise GridMismatch(f"initial data has {u0.shape[-1]} nodes, grid has N={grid.N}")
    if not np.all(np.isfinite(u0)):
        raise ValueError("initial data must be finite")
    return np.atleast_2d(u0)


def steps_of(grid, t):
    k = round(t / grid.dt)
    if abs(k * grid.dt - t) > 1e-9 * max(1.0, abs(t)):
        raise StepMisalignment(f"t={t} is not a multiple of dt={grid.dt}")
    return int(k)


def solve_u(u0, noise, cfg, t_span, record_every=1, z0=None, record_times=None):
    """Solve from t_span[0] to t_span[1]; returns a Trajectory of U = V + Z.

    At the start V = u0 - Z(t0) so that U(t0) = u0.
    """
    grid = noise.grid
    k0, k1 = steps_of(grid, t_span[0]), steps_of(grid, t_span[1])
    batch = _as_batch(u0, grid)
    z = initial_z(noise, cfg.beta, k0, z0)
    V = batch - reconstruct(z, grid)
    if record_times is not None:
        steps = sorted(steps_of(grid, t) for t in record_times)
    else:
        steps = range(k0, k1 + 1, record_every)
    final, (t, U, Vr, Zr) = advance(PairState(k0, V, z), noise, cfg, k1, steps)
    return Trajectory(grid, t, U, Vr, Zr, final)


def tff_residual(traj, noise, phi, u0, drift):
    """R(t_k) of the test-function formulation with left-rectangle quadrature.

    R(t) = (U(t) - u0, phi) - int (U, phi'') - int (f(U), phi) - int int phi dW,
    evaluated for every recorded step of a trajectory recorded at every step.
    """
    grid = traj.grid
    if not isinstance(phi, TestFunction):
        raise TypeError("phi must be a TestFunction")
    dt, dx = grid.dt, grid.dx
    U = traj.U  # (n, B, N)
    k = np.round(traj.times / dt).astype(int)
    if np.any(np.diff(k) != 1):
        raise StepMisalignment("tff_residual needs a trajectory recorded at every step")
    u0 = np.atleast_2d(np.asarray(u0, float))
    pair = inner(U - u0, phi.phi, dx)
    lin = dt * np.concatenate([np.zeros((1, U.shape[1])), np.cumsum(inner(U[:-1], phi.phi_pp, dx), axis=0)])
    nl = dt * np.concatenate([np.zeros((1, U.shape[1])), np.cumsum(inner(drift(U[:-1]), phi.phi, dx), axis=0)])
    xi = noise.increments(k[0], k[-1])
    mart = np.concatenate([[0.0], np.cumsum(xi @ phi.phi_mid)])
    return pair - lin - nl - mart[:, None]


@dataclass
class DifferenceReport:
    times: np.ndarray
    y_norm: np.ndarray
    defect: float
    gronwall_ok: bool
    traj: Trajectory = field(repr=False, default=None)


def difference_dynamics(u0, v0, noise, cfg, t_span, record_every=1):
    """Run two initial data on the same noise and test the noise-free Y equation.

    The defect is max_k |A Y_{k+1} - Y_k - dt (f(U1_k) - f(U2_k))| divided by
    max_k (|Y_k| + dt |f(U1_k) - f(U2_k)|), with A = I - dt D_h for the
    semi-implicit scheme.
    """
    grid = noise.grid
    a, b = _as_batch(u0, grid), _as_batch(v0, grid)
    if a.shape != b.shape:
        raise GridMismatch("u0 and v0 have different shapes")
    traj = solve_u(np.concatenate([a, b]), noise, cfg, t_span, record_every=1)
    n = a.shape[0]
    # the scheme's own U = V + Z, formed exactly as the stepper forms it
    U1, U2 = traj.U[:, :n], traj.U[:, n:]
    V1, V2 = traj.V[:, :n], traj.V[:, n:]
    Y = V1 - V2
    dt, dx = grid.dt, grid.dx
    st = _stepper(grid, cfg)
    f = cfg.drift
    fd = f(U1[:-1]) - f(U2[:-1])
    if cfg.scheme == "semi-implicit":
        lhs = Y[1:] - dt * laplacian(Y[1:], dx)
        res = lhs - Y[:-1] - dt * fd
    else:
        L = grid.L
        fr = st.rest(U1[:-1]) - st.rest(U2[:-1])
        pred = spectral.from_modes(st.E * spectral.to_modes(Y[:-1], L) + st.P1 * spectral.to_modes(fr, L), L)
        res = Y[1:] - pred
    scale = np.max(np.abs(Y[:-1]) + dt * np.abs(fd))
    defect = float(np.max(np.abs(res)) / scale) if scale > 0 else float(np.max(np.abs(res)))
    ynorm = l2_norm(U1 - U2, dx)
    t = traj.times - traj.times[0]
    bound = np.exp(f.K * t)[:, None] * ynorm[0] * (1 + 1e-9) + 1e-300
    ok = bool(np.all(ynorm <= bound))
    keep = slice(None, None, record_every)
    return DifferenceReport(traj.times[keep], ynorm[keep], defect, ok, traj)


def gl_energy(u, drift, dx):
    """Ginzburg-Landau energy 1/2 |D u|^2 - int F(u), F' = f, F(0) = 0."""
    c = drift.coeffs
    Fc = [0.0] + [a / (k + 1) for k, a in enumerate(c)]
    Fu = np.zeros_like(u)
    for a in Fc[::-1]:
        Fu = Fu * u + a
    pad = np.zeros(u.shape[:-1] + (1,))
    full = np.concatenate([pad, u, pad], axis=-1)
    grad = 0.5 * dx * np.sum((np.diff(full, axis=-1) / dx) ** 2, axis=-1)
    return grad - dx * np.sum(Fu, axis=-1)
