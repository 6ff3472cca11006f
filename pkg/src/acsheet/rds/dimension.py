"""Box-counting dimension of a point cloud and of pullback attractor samples."""

import math
from dataclasses import dataclass, field

import numpy as np

from ..errors import InsufficientSamples
from ..grid_noise import NoisePath, make_grid
from .cocycle import check_bounded, pullback_images
from .projector import ProjectorSpec

MIN_SAMPLES = 1000


@dataclass
class DimensionEstimate:
    dimension: float
    m_embed: int
    scales: np.ndarray = field(repr=False)
    counts: np.ndarray = field(repr=False)
    window: tuple = (math.nan, math.nan)  # (eps_small, eps_large) used in the fit
    n_points: int = 0

    def rows(self):
        for e, c in zip(self.scales, self.counts):
            yield dict(m_embed=self.m_embed, eps=e, count=c, dimension=self.dimension,
                       eps_lo=self.window[0], eps_hi=self.window[1])


def box_counts(points, scales):
    pts = np.asarray(points, float)
    origin = pts.min(axis=0)
    out = []
    for eps in scales:
        idx = np.floor((pts - origin) / eps).astype(np.int64)
        out.append(len(np.unique(idx, axis=0)))
    return np.array(out)


def box_dimension(points, eps_max=1.0, eps_min=1e-8, saturation=20, min_samples=MIN_SAMPLES, m_embed=None):
    """Slope of log N_eps against log(1/eps) over dyadic eps in [eps_min, eps_max].

    The fit uses the scales where 1 < N_eps <= n/saturation (so each box still
    holds many points on average); if the cloud never splits the estimate is
    0 (a point at this resolution).
    """
    pts = np.asarray(points, float)
    n = len(pts)
    if n < min_samples:
        raise InsufficientSamples(f"need at least {min_samples} points, got {n}")
    k = int(math.floor(math.log2(eps_max / eps_min)))
    scales = eps_max * 2.0 ** -np.arange(k + 1)
    counts = box_counts(pts, scales)
    use = (counts > 1) & (counts <= n / saturation)
    # include the last single-box scale as the anchor of the scaling range
    ones = np.nonzero(counts == 1)[0]
    if use.any() and ones.size and ones[-1] + 1 < len(scales) and use[ones[-1] + 1]:
        use[ones[-1]] = True
    m = pts.shape[1] if m_embed is None else m_embed
    if use.sum() < 2:
        return DimensionEstimate(0.0, m, scales, counts, (math.nan, math.nan), n)
    x = np.log(1.0 / scales[use])
    y = np.log(counts[use])
    slope = float(np.polyfit(x, y, 1)[0])
    return DimensionEstimate(slope, m, scales, counts, (float(scales[use].min()), float(scales[use].max())), n)


def fractal_dimension(samples, m_embed, L=1.0, **kw):
    """Box dimension of nodal samples projected onto their first m_embed modes."""
    samples = np.asarray(samples, float)
    proj = ProjectorSpec(L, samples.shape[1], m_embed)
    return box_dimension(proj.coords(samples), m_embed=m_embed, **kw)


def attractor_samples(seed, cfg, n, horizon, L=1.0, N=128, cap=5.0, batch=250, rng_seed=0, map_fn=map,
                      noise_scale=1.0):
    """Pullback images at time 0 of n random bounded initial data (one omega).

    Initial data are random sine series rescaled to L2 norms uniform in
    (0, cap]; drawing them uses a generator separate from the noise.
    """
    grid = make_grid(L, N, -horizon, 0.0, cfg.dt)
    rng = np.random.default_rng([rng_seed, seed])
    modes = np.arange(1, 17)
    coef = rng.standard_normal((n, modes.size)) / modes
    x = grid.nodes
    D = coef @ np.sin(np.outer(modes, x) * np.pi / L)
    D *= (cap * rng.uniform(0.05, 1.0, n) / np.sqrt(grid.dx * np.sum(D * D, axis=1)))[:, None]
    check_bounded(D, grid.dx, cap)
    noise = NoisePath(seed, grid).scaled(noise_scale)
    chunks = [D[i:i + batch] for i in range(0, n, batch)]
    parts = list(map_fn(lambda c: pullback_images(c, noise, cfg, horizon)[1][-1], chunks))
    return np.concatenate(parts)


def synthetic_cloud(d, n, ambient=None, seed=0):
    """n uniform points on a d-cube, linearly embedded (rotated) in R^ambient."""
    rng = np.random.default_rng(seed)
    ambient = ambient or d
    pts = rng.uniform(0.0, 1.0, (n, d))
    if ambient > d:
        q, _ = np.linalg.qr(rng.standard_normal((ambient, ambient)))
        pts = np.concatenate([pts, np.zeros((n, ambient - d))], axis=1) @ q.T
    return pts
