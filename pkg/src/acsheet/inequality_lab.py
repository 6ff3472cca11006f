"""Numerical checks of three integral inequalities on random sample functions.

* L^p Poincare: |v|_{L^p} <= L |Dv|_{L^p} when v(0) = 0.
* odd power: int v'' v^{2p-1} <= -(2p-1)/(p^2 L) |v|_{L^2p}^{2p} when
  v(0) = v(L) = 0 (and the gradient form -int v' (v^{2p-1})').
* derivative bound: |int u0(y) d/dx p_t(x, y) dy| <= C Lambda for Lipschitz
  u0 on R, with p_t the free-space kernel of u_t = u_xx.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import BoundaryConditionViolated, NonpositiveTime
from .green_kernel import gauss_legendre_panels

TOL = 1e-7
QUAD_TOL = 1e-9
GAUSS_SDS = 12.0


@dataclass(frozen=True)
class SampleFunction:
    """Closed-form v with exact derivatives.

    kind "sine": v = sum_k b_k sin(k pi x / L)     (v(0) = v(L) = 0)
    kind "xpoly": v = x * sum_k c_k x^k            (v(0) = 0)
    """

    kind: str
    coeffs: tuple
    L: float

    def v(self, x, d=0):
        x = np.asarray(x, float)
        c = np.asarray(self.coeffs, float)
        if self.kind == "sine":
            w = np.arange(1, len(c) + 1) * math.pi / self.L
            ph = np.outer(x.ravel(), w)
            if d == 0:
                out = np.sin(ph) @ c
            elif d == 1:
                out = np.cos(ph) @ (c * w)
            else:
                out = -np.sin(ph) @ (c * w * w)
            return out.reshape(x.shape)
        poly = np.polynomial.Polynomial(np.concatenate([[0.0], c]))
        return poly.deriv(d)(x) if d else poly(x)

    def dv(self, x):
        return self.v(x, 1)

    def d2v(self, x):
        return self.v(x, 2)

    def check_bc(self, both):
        ends = [abs(float(self.v(0.0)))]
        if both:
            ends.append(abs(float(self.v(self.L))))
        if max(ends) > 1e-12:
            raise BoundaryConditionViolated(f"{self.kind} sample does not vanish at the required ends: {ends}")


def random_sine(rng, L=None, k_max=8, decay=1.0):
    L = float(rng.uniform(0.5, 2.0)) if L is None else L
    K = int(rng.integers(1, k_max + 1))
    b = rng.standard_normal(K) / np.arange(1, K + 1) ** decay
    return SampleFunction("sine", tuple(b), L)


def random_xpoly(rng, L=None, deg_max=4):
    L = float(rng.uniform(0.5, 2.0)) if L is None else L
    deg = int(rng.integers(0, deg_max + 1))
    c = rng.standard_normal(deg + 1) / L ** np.arange(deg + 1)
    return SampleFunction("xpoly", tuple(c), L)


def _quad(fn, a, b, breaks=(), order=24, max_panels=4096):
    """Composite Gauss-Legendre on [a, b], panels doubled until converged.

    ``fn`` must accept arrays.  ``breaks`` are kinks of the integrand (zeros
    of v for |v|^p); each piece between them is refined independently.
    """
    edges = np.unique(np.clip(np.concatenate([[a, b], np.asarray(breaks, float)]), a, b))
    prev = None
    panels = 4
    while True:
        pts = np.concatenate([np.linspace(lo, hi, panels + 1) for lo, hi in zip(edges[:-1], edges[1:])])
        x, w = gauss_legendre_panels(a, b, pts, order)
        val = float(np.sum(w * fn(x)))
        if prev is not None and abs(val - prev) <= QUAD_TOL * max(abs(val), 1e-3):
            return val
        if panels >= max_panels:
            return val
        prev = val
        panels *= 2


def _roots(v, L, d=0, n=4000):
    """Interior zeros of the d-th derivative of a sample (sign changes + Newton)."""
    x = np.linspace(0.0, L, n + 1)
    y = v.v(x, d)
    idx = np.nonzero(np.sign(y[:-1]) * np.sign(y[1:]) < 0)[0]
    r = 0.5 * (x[idx] + x[idx + 1])
    for _ in range(30):
        g = v.v(r, d + 1)
        step = np.where(g != 0, v.v(r, d) / np.where(g == 0, 1, g), 0.0)
        r = np.clip(r - step, x[idx], x[idx + 1])
    return r


def _pnorm(fn, L, p, breaks=()):
    return _quad(lambda x: np.abs(fn(x)) ** p, 0.0, L, breaks) ** (1.0 / p)


@dataclass
class CheckResult:
    lemma: str
    passed: bool
    margin: float
    lhs: float
    rhs: float
    p: float = math.nan
    extra: dict = field(default_factory=dict)


def check_lp_poincare(v, p, L=None):
    L = v.L if L is None else L
    if p < 1:
        raise ValueError("p must be >= 1")
    v.check_bc(both=False)
    lhs = _pnorm(v.v, L, p, _roots(v, L, 0))
    rhs = L * _pnorm(v.dv, L, p, _roots(v, L, 1))
    margin = rhs - lhs
    return CheckResult("lp_poincare", margin >= -TOL, margin, lhs, rhs, p)


def check_odd_power(v, p, L=None):
    """Both forms of the odd-power inequality; ``passed`` needs both."""
    L = v.L if L is None else L
    if p < 1 or int(p) != p:
        raise ValueError("p must be an integer >= 1")
    p = int(p)
    v.check_bc(both=True)
    q = 2 * p - 1
    lap = _quad(lambda x: v.d2v(x) * v.v(x) ** q, 0.0, L)
    grad = -_quad(lambda x: q * v.dv(x) ** 2 * v.v(x) ** (q - 1), 0.0, L)
    norm = _quad(lambda x: v.v(x) ** (2 * p), 0.0, L)
    rhs = -(q / (p * p * L)) * norm
    margin = min(rhs - lap, rhs - grad)
    return CheckResult("odd_power", margin >= -TOL, margin, lap, rhs, p, dict(gradient_form=grad))


@dataclass(frozen=True)
class LipschitzSample:
    """Piecewise-linear u0 on R: slopes[i] on (knots[i-1], knots[i])."""

    knots: tuple
    slopes: tuple
    offset: float = 0.0

    @property
    def lipschitz(self):
        return float(np.max(np.abs(self.slopes)))

    def __call__(self, y):
        y = np.asarray(y, float)
        k = np.asarray(self.knots, float)
        s = np.asarray(self.slopes, float)
        # value = offset + s0 * (y - k0) for y < k0, then accumulate ramps
        out = self.offset + s[0] * (y - k[0])
        for i in range(len(k)):
            out = out + (s[i + 1] - s[i]) * np.maximum(y - k[i], 0.0)
        return out


def constant(c=1.0):
    return LipschitzSample((0.0,), (0.0, 0.0), c)


def identity():
    return LipschitzSample((0.0,), (1.0, 1.0), 0.0)


def absolute():
    return LipschitzSample((0.0,), (-1.0, 1.0), 0.0)


def random_lipschitz(rng, n_knots=None):
    n = int(rng.integers(1, 6)) if n_knots is None else n_knots
    knots = np.sort(rng.uniform(-3, 3, n))
    slopes = rng.uniform(-2, 2, n + 1)
    return LipschitzSample(tuple(knots), tuple(slopes), float(rng.normal()))


def derivative_integral(u0, t, x, order=16):
    """int u0(y) d/dx p_t(x, y) dy, p_t(x, y) = exp(-(x-y)^2/4t)/sqrt(4 pi t).

    ``x`` may be an array; all points share one composite rule on a uniform
    panel grid of width 1.5 sqrt(2t), with extra breaks at the kinks of u0.
    """
    if t <= 0:
        raise NonpositiveTime("t must be positive")
    xs = np.atleast_1d(np.asarray(x, float))
    sd = math.sqrt(2 * t)
    lo, hi = xs.min() - GAUSS_SDS * sd, xs.max() + GAUSS_SDS * sd
    n_pan = int(math.ceil((hi - lo) / (1.5 * sd)))
    br = np.concatenate([np.linspace(lo, hi, n_pan + 1), np.asarray(u0.knots, float)])
    y, w = gauss_legendre_panels(lo, hi, br, order)
    d = xs[:, None] - y[None, :]
    dp = -d / (2 * t) * np.exp(-(d * d) / (4 * t)) / math.sqrt(4 * math.pi * t)
    out = dp @ (w * u0(y))
    return out if np.ndim(x) else float(out[0])


def proof_constant(t, order=48):
    """(1/2t) E|x - B_t|^2 by the same quadrature; exactly 1 for B variance 2t."""
    sd = math.sqrt(2 * t)
    z, w = gauss_legendre_panels(-GAUSS_SDS * sd, GAUSS_SDS * sd, sd * np.array([-4, -2, -1, 0, 1, 2, 4.0]), order)
    dens = np.exp(-(z**2) / (4 * t)) / math.sqrt(4 * math.pi * t)
    return float(np.sum(w * z * z * dens) / (2 * t))


X_UNITS = np.linspace(-6.0, 6.0, 50)


def check_derivative_bound(u0, t_list, x_points=None):
    """max over (x, t) of |int u0 d_x p_t| against C * Lambda.

    ``x_points`` defaults to 50 points spread over +-6 sqrt(t) around 0 (the
    diffusive scale for each t).  C is the quadrature value of
    (1/2t) E|x - B_t|^2, maximised over t.
    """
    t_list = list(t_list)
    if any(t <= 0 for t in t_list):
        raise NonpositiveTime("all t must be positive")
    maxes = []
    for t in t_list:
        xs = X_UNITS * math.sqrt(t) if x_points is None else np.asarray(x_points, float)
        maxes.append(float(np.max(np.abs(derivative_integral(u0, t, xs)))))
    C = max(proof_constant(t) for t in t_list)
    bound = C * u0.lipschitz
    worst = max(maxes)
    uniform = (worst - min(maxes)) <= 0.1 * worst if worst > 0 else True
    return CheckResult("derivative_bound", worst <= bound + TOL, bound - worst, worst, bound, math.nan,
                       dict(per_t=maxes, t_uniform=uniform, C=C))


def run_suite(n=1000, seed=0, lp_range=(1.0, 12.0), t_list=(0.01, 1.0, 100.0), map_fn=map):
    """n random samples per inequality; returns a list of CheckResult rows with ids."""
    rng = np.random.default_rng(seed)
    jobs = []
    for i in range(n):
        v = random_xpoly(rng) if i % 2 == 0 else random_sine(rng)
        jobs.append(("lp", i, v, float(rng.uniform(*lp_range))))
    for i in range(n):
        jobs.append(("odd", i, random_sine(rng), int(rng.integers(1, 5))))
    for i in range(n):
        jobs.append(("der", i, random_lipschitz(rng), None))

    def run(job):
        kind, i, v, p = job
        if kind == "lp":
            return i, check_lp_poincare(v, p)
        if kind == "odd":
            return i, check_odd_power(v, p)
        return i, check_derivative_bound(v, t_list, x_points=_lip_points(v))

    return list(map_fn(run, jobs))


def _lip_points(u0):
    # 50 points covering the kinks and the far field on both sides
    k = np.asarray(u0.knots)
    return np.linspace(k.min() - 4.0, k.max() + 4.0, 50)
