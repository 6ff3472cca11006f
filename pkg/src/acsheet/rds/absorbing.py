"""Empirical absorbing radius for |V(t)|_{L^{2p}}^{2p}."""

from dataclasses import dataclass, field

import numpy as np

from ..errors import BetaBelowThreshold
from ..grid_noise import NoisePath, l2_norm, lp_norm, make_grid
from ..solver import solve_u


@dataclass
class AbsorbingEstimate:
    seed: int
    beta: float
    magnitudes: np.ndarray
    radius: float  # r_hat, max over the ensemble
    radii: np.ndarray  # per initial datum
    entry_times: np.ndarray
    spread: float  # (max - min)/max of the per-datum radii
    tempered_shifts: np.ndarray = field(default_factory=lambda: np.zeros(0))
    tempered_series: np.ndarray = field(default_factory=lambda: np.zeros(0))

    @property
    def tempered_decreasing(self):
        s = self.tempered_series
        return bool(len(s) > 1 and np.all(np.diff(s) < 0))

    def rows(self):
        for m, r, e in zip(self.magnitudes, self.radii, self.entry_times):
            yield dict(kind="entry", seed=self.seed, beta=self.beta, magnitude=m, radius=r,
                       r_hat=self.radius, entry_time=e)
        for tau, v in zip(self.tempered_shifts, self.tempered_series):
            yield dict(kind="tempered", seed=self.seed, beta=self.beta, magnitude="", radius=v,
                       r_hat=self.radius, entry_time=tau)


def sine_data(grid, magnitudes):
    s = np.sin(np.pi * grid.nodes / grid.L)
    s = s / l2_norm(s, grid.dx)
    return np.array([m * s for m in magnitudes])


def _power_norms(u0, noise, cfg, t0, T, every):
    tr = solve_u(u0, noise, cfg, (t0, t0 + T), record_every=every)
    p = cfg.drift.p
    return tr.times - t0, lp_norm(tr.V, noise.grid.dx, 2 * p) ** (2 * p)


def radius_from_norms(times, norms, T):
    late = times >= T / 2 - 1e-12
    radii = np.max(norms[late], axis=0)
    r_hat = float(np.max(radii))
    entry = np.array([times[np.argmax(norms[:, i] <= r_hat)] if np.any(norms[:, i] <= r_hat) else np.inf
                      for i in range(norms.shape[1])])
    return r_hat, radii, entry


def absorbing_radius(seed, beta, magnitudes, cfg, L=1.0, N=128, T=4.0, record_every=10,
                     beta_threshold=0.0, epsilon=0.1, shifts=(), shift_magnitudes=(1.0,),
                     shift_cfg=None, noise_scale=1.0):
    """r_hat = max over the ensemble of max_{t in [T/2, T]} |V(t)|^{2p}.

    ``shifts`` gives the temperedness series r_hat(theta_tau omega) e^{-eps tau},
    computed from ``shift_magnitudes`` (and ``shift_cfg`` if given, so the
    shifted runs can use a coarser step than the large-data run).
    ``noise_scale=0`` gives the deterministic equation.
    """
    if beta < beta_threshold:
        raise BetaBelowThreshold(f"beta={beta} is below the configured threshold {beta_threshold}")
    grid = make_grid(L, N, 0.0, T, cfg.dt)
    noise = NoisePath(seed, grid).scaled(noise_scale)
    u0 = sine_data(grid, magnitudes)
    t, nrm = _power_norms(u0, noise, cfg, 0.0, T, record_every)
    r_hat, radii, entry = radius_from_norms(t, nrm, T)
    spread = float((radii.max() - radii.min()) / radii.max()) if radii.max() > 0 else 0.0
    ser = []
    if len(shifts):
        scfg = shift_cfg or cfg
        sgrid = make_grid(L, N, 0.0, T, scfg.dt)
        snoise = NoisePath(seed, sgrid).scaled(noise_scale)
        su0 = sine_data(sgrid, shift_magnitudes)
        for tau in shifts:
            ts, ns = _power_norms(su0, snoise.shift(tau), scfg, 0.0, T, record_every)
            ser.append(radius_from_norms(ts, ns, T)[0] * np.exp(-epsilon * tau))
    return AbsorbingEstimate(seed, beta, np.asarray(magnitudes, float), r_hat, radii, entry, spread,
                             np.asarray(shifts, float), np.asarray(ser))


def beta_scan(seed, betas, magnitudes, cfg_for_beta, L=1.0, N=128, T=4.0, tol=0.05):
    """Smallest beta whose radius is the same (within tol) across initial data."""
    out = []
    for b in betas:
        est = absorbing_radius(seed, b, magnitudes, cfg_for_beta(b), L=L, N=N, T=T)
        out.append((b, est.radius, est.spread))
    stable = [b for b, _, s in out if s < tol]
    return out, (min(stable) if stable else None)
