"""Pullback attraction of a bounded set D at time 0."""

from dataclasses import dataclass

import numpy as np

from ..grid_noise import NoisePath, l2_norm, make_grid
from .cocycle import check_bounded, pullback_images


def pairwise_l2(A, B, dx):
    d = A[:, None, :] - B[None, :, :]
    return np.sqrt(dx * np.sum(d * d, axis=-1))


def diameter(A, dx):
    if len(A) < 2:
        return 0.0
    return float(np.max(pairwise_l2(A, A, dx)))


def hausdorff_semidistance(A, B, dx):
    """sup_{a in A} inf_{b in B} |a - b|, brute force."""
    return float(np.max(np.min(pairwise_l2(A, B, dx), axis=1)))


@dataclass
class PullbackReport:
    seed: int
    horizons: list
    diameters: np.ndarray
    semidistances: np.ndarray  # dist(image_t_i, image_t_{i+1})
    images: list
    monotone: bool

    def rows(self):
        for i, h in enumerate(self.horizons):
            yield dict(seed=self.seed, horizon=h, diameter=self.diameters[i],
                       semidistance_to_next=self.semidistances[i] if i < len(self.semidistances) else "")


def _overlap_consistent(seed, grid, t_short, t_long):
    # two independently cached sheets must agree on the common window
    a = NoisePath(seed, grid, cache_blocks=4)
    b = NoisePath(seed, grid, cache_blocks=4)
    k0 = int(round(-t_short / grid.dt))
    kb = int(round(-t_long / grid.dt))
    b.increments(kb, k0)  # touch the long run's private window first
    return np.array_equal(a.increments(k0, 0), b.increments(k0, 0))


def pullback_experiment(D, horizons, seed, cfg, L=1.0, N=128, norm_cap=5.0, tol=1e-12,
                        verify_overlap=False, map_fn=map):
    """Images at time 0 of D started at -t for each horizon t, same omega."""
    horizons = [float(h) for h in horizons]
    if any(b <= a for a, b in zip(horizons, horizons[1:])):
        raise ValueError("horizons must be strictly increasing")
    grid = make_grid(L, N, -max(horizons), 0.0, cfg.dt)
    D = np.atleast_2d(np.asarray(D, float))
    check_bounded(D, grid.dx, norm_cap)
    noise = NoisePath(seed, grid)
    if verify_overlap:
        for a, b in zip(horizons, horizons[1:]):
            if not _overlap_consistent(seed, grid, a, b):
                raise RuntimeError(f"noise differs on the overlap of horizons {a} and {b}")

    def one(h):
        return pullback_images(D, noise, cfg, h)[1][-1]

    images = list(map_fn(one, horizons))
    diam = np.array([diameter(A, grid.dx) for A in images])
    semi = np.array([hausdorff_semidistance(A, B, grid.dx) for A, B in zip(images, images[1:])])
    mono = bool(np.all(diam[1:] <= diam[:-1] + tol))
    return PullbackReport(seed, horizons, diam, semi, images, mono)


def default_initial_set(grid, radii=(1, 2, 3, 4, 5)):
    """{+-c sin(pi x / L)} scaled to L2 norm c."""
    s = np.sin(np.pi * grid.nodes / grid.L)
    s = s / l2_norm(s, grid.dx)
    return np.array([sign * c * s for c in radii for sign in (1.0, -1.0)])
