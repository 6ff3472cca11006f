"""Random squeezing: |Q(Phi u - Phi v)| <= delta exp(int c) |u - v| over unit windows.

The difference Y of a pair evolves by the noise-free equation
Y_t = D_h Y + f(U + Y) - f(U) along the base trajectory U, so it is carried
directly, in sine coordinates.  At the start of each window the pair is
reset to ``u + eps * Q Y / |Q Y|`` (a power iteration restricted to the
Q-range), which drives the statistic towards the worst Q-direction.  For a
linear drift the difference equation is linear and is renormalised every
step, which keeps ratios like exp(-10^4) representable as logarithms.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .. import spectral
from ..errors import DegeneratePair, InsufficientSamples
from ..grid_noise import NoisePath, make_grid
from ..solver import PairState, _stepper, advance, steps_of
from ..stoch_conv import reconstruct

MIN_WINDOWS = 30
GEOM_MEDIAN_SE = math.sqrt(math.pi / 2)  # asymptotic se of a median, in std units


@dataclass
class SqueezingEstimate:
    m: int
    log_rho: np.ndarray = field(repr=False)
    log_delta: float = 0.0
    se_log_delta: float = 0.0
    c_hat: np.ndarray = field(repr=False, default=None)

    @property
    def delta(self):
        return math.exp(self.log_delta)

    @property
    def n(self):
        return len(self.log_rho)

    @property
    def mean_c(self):
        return float(np.mean(self.c_hat))

    @property
    def verdict(self):
        if self.n < MIN_WINDOWS:
            raise InsufficientSamples(f"verdict needs >= {MIN_WINDOWS} windows, have {self.n}")
        return bool(self.mean_c < -self.log_delta)

    def rows(self):
        for i, lr in enumerate(self.log_rho):
            yield dict(m=self.m, window=i, log_rho=lr, log_delta=self.log_delta,
                       se_log_delta=self.se_log_delta, c_hat=self.c_hat[i])


def factor(m, log_rho):
    """delta_hat = geometric median of rho; c_hat = log residuals."""
    log_rho = np.asarray(log_rho, float)
    ld = float(np.median(log_rho))
    se = float(GEOM_MEDIAN_SE * np.std(log_rho, ddof=1) / math.sqrt(len(log_rho))) if len(log_rho) > 1 else math.inf
    return SqueezingEstimate(m, log_rho, ld, se, log_rho - ld)


def _q_unit(c, m):
    q = c.copy()
    q[..., :m] = 0.0
    n = np.sqrt(np.sum(q * q, axis=-1, keepdims=True))
    return q, n


def squeezing_estimate(seed, pair, m_list, cfg, L=1.0, N=128, n_windows=32, burn_in=2.0,
                       eps=1e-2, window=1.0):
    """Estimate delta_hat(m) for every m in ``m_list`` along one base path.

    ``pair = (u0, v0)``: u0 starts the base trajectory at time 0; the Q-part of
    v0 - u0 gives the first window's direction.
    """
    u0, v0 = (np.asarray(a, float) for a in pair)
    if float(np.sqrt(np.sum((u0 - v0) ** 2) * L / (N + 1))) < 1e-12:
        raise DegeneratePair("|u - v| < 1e-12")
    m_list = [int(m) for m in m_list]
    T = burn_in + n_windows * window
    grid = make_grid(L, N, 0.0, T, cfg.dt)
    noise = NoisePath(seed, grid)
    st = _stepper(grid, cfg)
    f = cfg.drift
    linear = f.is_linear
    dt = grid.dt
    lam = grid.lambdas_h

    state = PairState(0, np.atleast_2d(u0), np.zeros(N))
    state, _ = advance(state, noise, cfg, steps_of(grid, burn_in), stepper=st)
    c0 = spectral.to_modes(v0 - u0, L)
    Yc = np.empty((len(m_list), N))
    for i, m in enumerate(m_list):
        q, n = _q_unit(c0, m)
        if n[0] == 0:
            raise DegeneratePair(f"v0 - u0 has no component above mode {m}")
        Yc[i] = eps * q / n
    w_steps = steps_of(grid, window)
    log_rho = np.zeros((len(m_list), n_windows))
    za, zb = st.za, st.zb
    for w in range(n_windows):
        V, z, k = state.V, state.z, state.k
        logscale = np.zeros(len(m_list))
        y0 = np.sqrt(np.sum(Yc * Yc, axis=-1))
        g = noise.modal_increments(k, k + w_steps)
        for i in range(w_steps):
            Znod = spectral.from_modes(z, L)
            U = V + Znod
            if cfg.scheme == "etd":
                nl = st.rest.difference(U, spectral.from_modes(Yc, L)) if not _is_zero(st.rest) else None
                Yc = st.E * Yc + (st.P1 * spectral.to_modes(nl, L) if nl is not None else 0.0)
            else:
                fd = f.difference(U, spectral.from_modes(Yc, L))
                Yc = (Yc + dt * spectral.to_modes(fd, L)) / (1.0 + dt * lam)
            if linear:
                s = np.sqrt(np.sum(Yc * Yc, axis=-1))
                logscale += np.log(s)
                Yc = Yc / s[:, None]
            V = st.step_v(V, Znod)
            z = za * z + zb * g[i]
        state = PairState(k + w_steps, V, z)
        for i, m in enumerate(m_list):
            q, n = _q_unit(Yc[i], m)
            n = float(n[0])
            if n == 0:
                log_rho[i, w] = -math.inf
                continue
            log_rho[i, w] = math.log(n) + logscale[i] - math.log(y0[i])
            Yc[i] = eps * q / n
    return [factor(m, log_rho[i]) for i, m in enumerate(m_list)]


def _is_zero(poly):
    return all(a == 0.0 for a in poly.coeffs[1:])


def log_linear_delta(grid, a1, m):
    """a1 - lambda^h_{m+1}: log of the exact unit-time Q-contraction of a linear drift."""
    return float(a1 - grid.lambdas_h[m])


def linear_delta(grid, a1, m):
    return math.exp(log_linear_delta(grid, a1, m))


def monotone_in_m(estimates, n_se=2.0):
    """delta_hat(m) decreasing along the list, allowing n_se combined standard errors."""
    ok = []
    for a, b in zip(estimates, estimates[1:]):
        tol = n_se * math.hypot(a.se_log_delta, b.se_log_delta)
        ok.append(b.log_delta < a.log_delta + tol)
    return all(ok)


def strictly_decreasing(estimates):
    return all(b.log_delta < a.log_delta for a, b in zip(estimates, estimates[1:]))
