"""Forward and pullback determining-modes experiments."""

from dataclasses import dataclass, field

import numpy as np

from ..errors import GridMismatch
from ..grid_noise import NoisePath, l2_norm, make_grid
from ..solver import solve_u
from .cocycle import pullback_images
from .projector import ProjectorSpec


@dataclass
class ModesReport:
    mode: str
    tol: float
    m_list: list
    rows_: list = field(default_factory=list)
    implication: dict = field(default_factory=dict)  # m -> bool, None if inapplicable
    m_star: object = None

    def rows(self):
        return iter(self.rows_)


def _m_star(m_list, implication, converged):
    ok = [m for m in m_list if implication[m] is not None]
    for i, m in enumerate(ok):
        if all(implication[k] and converged[k] for k in ok[i:]):
            return m
    return None


def determining_modes(u0, v0, m_list, mode, seed, cfg, L=1.0, N=128, T=20.0, horizons=(4, 8, 16),
                      eval_times=(-1.0, 0.0), tol=1e-6, alpha=0.0, record_every=100):
    """For each m: does |P_m Y| < tol (+alpha) imply |Y| < tol (+alpha)?

    ``forward``: Y = U1 - U2 on [0, T], judged at T.  ``pullback``: judged at
    every evaluation time r, for every horizon s (start at -s).  m = 0 has a
    vacuous projector and is reported as inapplicable.
    """
    u0, v0 = np.asarray(u0, float), np.asarray(v0, float)
    if u0.shape != v0.shape or u0.shape[-1] != N:
        raise GridMismatch("u0 and v0 must both live on the N interior nodes")
    m_list = [int(m) for m in m_list]
    thr = tol + alpha
    rep = ModesReport(mode, tol, m_list)
    converged = {}
    if mode == "forward":
        grid = make_grid(L, N, 0.0, T, cfg.dt)
        noise = NoisePath(seed, grid)
        tr = solve_u(np.stack([u0, v0]), noise, cfg, (0.0, T), record_every=record_every)
        Y = tr.U[:, 0] - tr.U[:, 1]
        full = l2_norm(Y, grid.dx)
        for m in m_list:
            pn = ProjectorSpec.for_grid(grid, m).p_norm(Y)
            for t, a, b in zip(tr.times, pn, full):
                rep.rows_.append(dict(mode=mode, m=m, horizon="", t=t, p_diff=a, full_diff=b))
            if m == 0:
                rep.implication[m] = None
            else:
                rep.implication[m] = bool(pn[-1] >= thr or full[-1] < thr)
            converged[m] = bool(full[-1] < thr and pn[-1] < thr)
    elif mode == "pullback":
        grid = make_grid(L, N, -max(horizons), max(eval_times), cfg.dt)
        noise = NoisePath(seed, grid)
        res = {}
        for s in horizons:
            t, U = pullback_images(np.stack([u0, v0]), noise, cfg, s, eval_times)
            res[s] = (t, U[:, 0] - U[:, 1])
        for m in m_list:
            proj = ProjectorSpec.for_grid(grid, m)
            imp, conv = True, True
            for s in horizons:
                t, Y = res[s]
                pn, full = proj.p_norm(Y), l2_norm(Y, grid.dx)
                for r, a, b in zip(t, pn, full):
                    rep.rows_.append(dict(mode=mode, m=m, horizon=s, t=r, p_diff=a, full_diff=b))
                imp &= bool(np.all((pn >= thr) | (full < thr)))
                conv &= bool(np.all(full < thr))
            rep.implication[m] = None if m == 0 else imp
            converged[m] = conv
    else:
        raise ValueError(f"mode must be 'forward' or 'pullback', got {mode!r}")
    rep.m_star = _m_star(m_list, rep.implication, converged)
    return rep
