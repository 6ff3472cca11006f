"""Space-time grids and reproducible two-sided white-noise sheets.

A :class:`NoisePath` hands out the cell integrals ``xi(k, j)`` of a Brownian
sheet over ``[k dt, (k+1) dt] x [j dx, (j+1) dx]``.  Every value is a pure
function of ``(seed, k, j)``: time is cut into blocks of ``BLOCK_STEPS``
steps and each block is drawn from its own Philox stream whose key is hashed
from ``(seed, block)``.  Consequently any window, requested in any order or
from any shifted copy, reproduces the same numbers.
"""

import math
import threading
from collections import OrderedDict
from dataclasses import dataclass, field

import numpy as np

from . import spectral
from .errors import (
    CellOutOfRange,
    DegenerateGrid,
    NonIntegralShift,
    NonIntegralStepCount,
    TestFunctionBoundaryViolation,
)

BLOCK_STEPS = 256
REL_TOL = 1e-9


def _as_integer(value, exc, what):
    r = round(value)
    if abs(value - r) > REL_TOL * max(1.0, abs(value)):
        raise exc(f"{what} = {value!r} is not an integer")
    return int(r)


@dataclass(frozen=True)
class GridSpec:
    L: float
    N: int
    t0: float
    t1: float
    dt: float
    M: int = field(init=False)

    def __post_init__(self):
        if self.N < 2 or not self.L > 0:
            raise DegenerateGrid(f"need N >= 2 and L > 0, got N={self.N}, L={self.L}")
        if not self.dt > 0:
            raise DegenerateGrid(f"dt must be positive, got {self.dt}")
        if not self.t0 < self.t1:
            raise DegenerateGrid(f"need t0 < t1, got [{self.t0}, {self.t1}]")
        M = _as_integer((self.t1 - self.t0) / self.dt, NonIntegralStepCount, "(t1-t0)/dt")
        object.__setattr__(self, "M", M)

    @property
    def dx(self):
        return self.L / (self.N + 1)

    @property
    def n_cells(self):
        return self.N + 1

    @property
    def nodes(self):
        """Interior node positions x_1..x_N."""
        return np.arange(1, self.N + 1) * self.dx

    @property
    def midpoints(self):
        """Centres of the N+1 spatial cells."""
        return (np.arange(self.N + 1) + 0.5) * self.dx

    @property
    def times(self):
        return self.t0 + np.arange(self.M + 1) * self.dt

    @property
    def k0(self):
        """Absolute noise index of the first time step of the window."""
        return _as_integer(self.t0 / self.dt, NonIntegralShift, "t0/dt")

    def lam(self, n):
        """Continuum Dirichlet eigenvalue (n pi / L)^2."""
        return (n * math.pi / self.L) ** 2

    @property
    def lambdas(self):
        return spectral.continuum_eigenvalues(self.L, self.N)

    @property
    def lambdas_h(self):
        return spectral.discrete_eigenvalues(self.L, self.N)

    def with_window(self, t0, t1, dt=None):
        return GridSpec(self.L, self.N, t0, t1, self.dt if dt is None else dt)


def make_grid(L, N, t0, t1, dt):
    return GridSpec(float(L), int(N), float(t0), float(t1), float(dt))


def _zigzag(b):
    return 2 * b if b >= 0 else -2 * b - 1


class _Sheet:
    """Block generator and LRU cache shared by all views of one seed."""

    def __init__(self, seed, n_cells, dt, dx, cache_blocks):
        if not 0 <= seed < 2**64:
            raise ValueError(f"seed must be an unsigned 64-bit integer, got {seed}")
        self.seed = int(seed)
        self.n_cells = n_cells
        self.scale = math.sqrt(dt * dx)
        self.capacity = cache_blocks
        self._cache = OrderedDict()
        self._lock = threading.Lock()

    def _draw(self, b):
        key = np.random.SeedSequence([self.seed, _zigzag(b)]).generate_state(2, np.uint64)
        gen = np.random.Generator(np.random.Philox(key=key))
        out = self.scale * gen.standard_normal((BLOCK_STEPS, self.n_cells))
        out.setflags(write=False)
        return out

    def cached(self, key, make):
        with self._lock:
            hit = self._cache.get(key)
            if hit is not None:
                self._cache.move_to_end(key)
                return hit
        value = make()
        with self._lock:
            self._cache[key] = value
            while len(self._cache) > self.capacity:
                self._cache.popitem(last=False)
        return value

    def raw_block(self, b):
        return self.cached(("raw", b), lambda: self._draw(b))


class NoisePath:
    """A (possibly shifted, coarsened or scaled) view of a white-noise sheet.

    ``increments(k0, k1)`` returns the cell integrals for view time steps
    ``k0 <= k < k1`` as an array of shape ``(k1 - k0, N + 1)`` with variance
    ``dt * dx`` per entry.  Index ``k`` refers to the time cell
    ``[(k + offset) dt, (k + offset + 1) dt]`` of the unshifted sheet.
    """

    def __init__(self, seed, grid, *, cache_blocks=64, _sheet=None, _offset=0,
                 _amplitude=1.0, _factors=(1, 1)):
        self.grid = grid
        self.offset = _offset
        self.amplitude = float(_amplitude)
        self.factors = _factors
        if _sheet is None:
            _sheet = _Sheet(seed, grid.n_cells, grid.dt, grid.dx, cache_blocks)
        self._sheet = _sheet

    @property
    def seed(self):
        return self._sheet.seed

    def _view(self, **kw):
        args = dict(_sheet=self._sheet, _offset=self.offset, _amplitude=self.amplitude,
                    _factors=self.factors)
        grid = kw.pop("grid", self.grid)
        args.update(kw)
        return NoisePath(self.seed, grid, **args)

    def shift(self, tau):
        steps = _as_integer(tau / self.grid.dt, NonIntegralShift, "tau/dt")
        return self._view(_offset=self.offset + steps)

    def scaled(self, a):
        return self._view(_amplitude=self.amplitude * a)

    def coarsen(self, time_factor=1, space_factor=1):
        """View with cells merged ``time_factor x space_factor`` at a time."""
        tf, sf = self.factors
        tf2, sf2 = tf * time_factor, sf * space_factor
        base_cells = self._sheet.n_cells
        if BLOCK_STEPS % tf2 or base_cells % sf2:
            raise ValueError("coarsening factors must divide the block length and cell count")
        if self.offset % time_factor:
            raise NonIntegralShift("shift offset is not a multiple of the time factor")
        g = self.grid
        grid = GridSpec(g.L, base_cells // sf2 - 1, g.t0, g.t1, g.dt * time_factor)
        return self._view(grid=grid, _offset=self.offset // time_factor, _factors=(tf2, sf2))

    @property
    def _block_len(self):
        return BLOCK_STEPS // self.factors[0]

    def _block(self, b):
        tf, sf = self.factors
        if tf == 1 and sf == 1:
            return self._sheet.raw_block(b)

        def make():
            raw = self._sheet.raw_block(b)
            out = raw.reshape(BLOCK_STEPS // tf, tf, raw.shape[1] // sf, sf).sum(axis=(1, 3))
            out.setflags(write=False)
            return out

        return self._sheet.cached(("inc", tf, sf, b), make)

    def _modal_block(self, b):
        tf, sf = self.factors

        def make():
            C = spectral.cell_projection(self.grid.L, self.grid.N)
            out = self._block(b) @ C.T
            out.setflags(write=False)
            return out

        return self._sheet.cached(("modal", tf, sf, b), make)

    def _gather(self, k0, k1, get):
        a0, a1 = k0 + self.offset, k1 + self.offset
        B = self._block_len
        parts = []
        for b in range(a0 // B, (a1 - 1) // B + 1):
            blk = get(b)
            lo = max(a0 - b * B, 0)
            hi = min(a1 - b * B, B)
            parts.append(blk[lo:hi])
        out = parts[0] if len(parts) == 1 else np.concatenate(parts, axis=0)
        if self.amplitude != 1.0:
            out = self.amplitude * out
        return out

    def increments(self, k0, k1):
        if k1 <= k0:
            return np.zeros((0, self.grid.n_cells))
        return self._gather(k0, k1, self._block)

    def modal_increments(self, k0, k1):
        """Sine-mode integrals ``sum_j C[n, j] xi(k, j)`` for steps k0..k1-1."""
        if k1 <= k0:
            return np.zeros((0, self.grid.N))
        return self._gather(k0, k1, self._modal_block)

    def increment(self, k, j):
        if not 0 <= j <= self.grid.N:
            raise CellOutOfRange(f"cell index {j} outside [0, {self.grid.N}]")
        return float(self.increments(k, k + 1)[0, j])

    def same_law_as(self, other):
        return self.grid == other.grid and self.factors == other.factors


def sample_increment(path, k, j):
    return path.increment(k, j)


def shift(path, tau):
    return path.shift(tau)


@dataclass(frozen=True)
class TestFunction:
    """Smooth phi with phi(0) = phi(L) = 0, tabulated on a grid."""

    __test__ = False

    grid: GridSpec
    phi: np.ndarray  # at interior nodes
    phi_pp: np.ndarray  # phi'' at interior nodes
    phi_mid: np.ndarray  # phi at cell midpoints
    name: str = "phi"

    @classmethod
    def from_callables(cls, grid, phi, phi_pp, name="phi"):
        ends = np.abs([phi(0.0), phi(grid.L)])
        if np.any(ends > 1e-12):
            raise TestFunctionBoundaryViolation(f"{name} does not vanish at 0 and L: {ends}")
        x = grid.nodes
        return cls(grid, np.asarray(phi(x), float), np.asarray(phi_pp(x), float),
                   np.asarray(phi(grid.midpoints), float), name)

    @classmethod
    def sine(cls, grid, n=1):
        k = n * math.pi / grid.L
        return cls.from_callables(grid, lambda x: np.sin(k * x),
                                  lambda x: -k * k * np.sin(k * x), name=f"sin{n}")

    @classmethod
    def bump(cls, grid):
        """x^2 (L - x)^2, a polynomial test function with zero ends."""
        L = grid.L
        return cls.from_callables(
            grid,
            lambda x: (x * (L - x)) ** 2,
            lambda x: 2 * (L - x) ** 2 - 8 * x * (L - x) + 2 * x**2,
            name="bump",
        )


def inner(u, v, dx):
    """Discrete L2 inner product over the last axis."""
    return dx * np.sum(u * v, axis=-1)


def l2_norm(u, dx):
    return np.sqrt(inner(u, u, dx))


def lp_norm(u, dx, p):
    return (dx * np.sum(np.abs(u) ** p, axis=-1)) ** (1.0 / p)


def h1_seminorm(u, dx):
    pad = np.zeros(u.shape[:-1] + (1,))
    full = np.concatenate([pad, u, pad], axis=-1)
    return np.sqrt(dx * np.sum((np.diff(full, axis=-1) / dx) ** 2, axis=-1))
