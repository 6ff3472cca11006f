"""Modal projectors P_m (first m sine modes) and Q_m = I - P_m."""

from dataclasses import dataclass

import numpy as np

from .. import spectral


@dataclass(frozen=True)
class ProjectorSpec:
    L: float
    N: int
    m: int

    def __post_init__(self):
        if not 0 <= self.m <= self.N:
            raise ValueError(f"mode cutoff m={self.m} outside [0, {self.N}]")

    @classmethod
    def for_grid(cls, grid, m):
        return cls(grid.L, grid.N, int(m))

    @property
    def mask(self):
        return np.arange(1, self.N + 1) <= self.m

    def P(self, u):
        c = spectral.to_modes(np.asarray(u, float), self.L)
        return spectral.from_modes(np.where(self.mask, c, 0.0), self.L)

    def Q(self, u):
        c = spectral.to_modes(np.asarray(u, float), self.L)
        return spectral.from_modes(np.where(self.mask, 0.0, c), self.L)

    def p_norm(self, u):
        """|P u| in discrete L2 via Parseval."""
        c = spectral.to_modes(np.asarray(u, float), self.L)
        return np.sqrt(np.sum(c[..., : self.m] ** 2, axis=-1))

    def q_norm(self, u):
        c = spectral.to_modes(np.asarray(u, float), self.L)
        return np.sqrt(np.sum(c[..., self.m:] ** 2, axis=-1))

    def coords(self, u):
        """First m sine coefficients; the embedding used for box counting."""
        return spectral.to_modes(np.asarray(u, float), self.L)[..., : self.m]
