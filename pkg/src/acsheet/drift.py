"""Odd-degree polynomial drifts f(u) = sum_k a_k u^k with a_{2p-1} < 0.

The structural constants are certified numerically at construction:

* K   with f'(v) <= K everywhere (reported as max(K, 0)),
* c1, c0 with f(v) v <= -c1 v^{2p} + c0,
* k1, k0 with |f(v)| <= k1 |v|^{2p-1} + k0.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import EvenDegree, NonnegativeLeadingCoefficient

CERT_STEP = 1e-3


def _horner(coeffs, v):
    v = np.asarray(v, dtype=float)
    out = np.zeros_like(v) + coeffs[-1]
    for a in coeffs[-2::-1]:
        out = out * v + a
    return out


@dataclass(frozen=True)
class DriftPolynomial:
    coeffs: tuple
    K: float = field(default=0.0)
    c1: float = field(default=0.0)
    c0: float = field(default=0.0)
    k1: float = field(default=0.0)
    k0: float = field(default=0.0)
    radius: float = field(default=0.0)

    @property
    def degree(self):
        return len(self.coeffs) - 1

    @property
    def p(self):
        return (self.degree + 1) // 2

    @property
    def is_linear(self):
        return self.degree == 1

    def __call__(self, v):
        return _horner(self.coeffs, v)

    def prime(self, v):
        d = [k * a for k, a in enumerate(self.coeffs)][1:]
        return _horner(d, v)

    def difference(self, u, y):
        """f(u + y) - f(u) without cancellation: y * sum_k a_k sum_i w^i u^(k-1-i)."""
        u = np.asarray(u, float)
        y = np.asarray(y, float)
        w = u + y
        total = np.zeros(np.broadcast(u, y).shape)
        for k in range(1, self.degree + 1):
            a = self.coeffs[k]
            if a == 0:
                continue
            s = np.zeros_like(total)
            for i in range(k):
                s = s + w**i * u ** (k - 1 - i)
            total = total + a * s
        return y * total


def _certify(coeffs):
    a = np.asarray(coeffs, float)
    deg = len(a) - 1
    p = (deg + 1) // 2
    lead = a[-1]
    poly = np.polynomial.Polynomial(a)
    dpoly = poly.deriv()

    # one-sided derivative bound: f' is even degree with negative lead, so
    # its maximum sits at a real critical point (or f' is constant)
    if deg == 1:
        K = float(a[1])
    else:
        crit = dpoly.deriv().roots()
        crit = crit[np.abs(crit.imag) < 1e-9].real
        K = float(np.max(dpoly(crit))) if crit.size else float(dpoly(0.0))

    radius = 1.0 + float(np.max(np.abs(a[:-1] / lead))) if deg > 0 else 1.0

    # f(v) v + c1 v^{2p} = (lead + c1) v^{2p} + lower; with c1 = |lead| the
    # remainder is a polynomial of degree < 2p which must be bounded above
    rem = (poly * np.polynomial.Polynomial([0, 1])).coef.copy()
    rem[-1] = 0.0
    rem = np.polynomial.Polynomial(rem).trim()
    rem_deg = rem.degree()
    bounded = rem_deg <= 0 or (rem_deg % 2 == 0 and rem.coef[-1] < 0)
    c1 = abs(lead) if bounded else abs(lead) / 2
    g = np.polynomial.Polynomial(np.append((poly * np.polynomial.Polynomial([0, 1])).coef[:-1],
                                           lead + c1)).trim()
    crit = g.deriv().roots() if g.degree() > 0 else np.array([])
    crit = crit[np.abs(crit.imag) < 1e-9].real if crit.size else crit
    cand = np.concatenate([[0.0], crit])
    grid = np.arange(-radius, radius + CERT_STEP, CERT_STEP)
    c0 = max(float(np.max(g(cand))), float(np.max(g(grid))), 0.0)

    k1 = float(np.sum(np.abs(a[1:])))
    k0 = float(abs(a[0]) + np.sum(np.abs(a[1:deg])))
    return dict(K=max(K, 0.0), c1=float(c1), c0=c0, k1=k1, k0=k0, radius=radius), p


def make_drift(coeffs):
    """Build a drift from ``a0, a1, ..., a_{2p-1}`` and certify its constants."""
    coeffs = [float(c) for c in coeffs]
    while len(coeffs) > 1 and coeffs[-1] == 0.0:
        coeffs.pop()
    deg = len(coeffs) - 1
    if deg % 2 == 0:
        raise EvenDegree(f"drift degree {deg} is not odd")
    if not coeffs[-1] < 0:
        raise NonnegativeLeadingCoefficient(f"leading coefficient {coeffs[-1]} must be negative")
    consts, _ = _certify(coeffs)
    return DriftPolynomial(tuple(coeffs), **consts)


def parse_coeffs(text):
    return [float(tok) for tok in str(text).split(",") if tok.strip()]


def allen_cahn():
    return make_drift([0.0, 1.0, 0.0, -1.0])


def eval(f, v):  # noqa: A001 - mirrors the documented operation name
    return f(v)


def eval_prime(f, v):
    return f.prime(v)
