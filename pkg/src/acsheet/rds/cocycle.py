"""The solution cocycle Phi(t, theta_s omega) on the pair state (V, Z modes)."""

from dataclasses import dataclass, field

import numpy as np

from ..errors import UnboundedInitialSet
from ..grid_noise import NoisePath, l2_norm, make_grid
from ..solver import PairState, advance, initial_z, steps_of
from ..stoch_conv import reconstruct


@dataclass
class CocycleRun:
    """Images of a set D under the same omega."""

    seed: int
    horizon: float
    start: float
    D: np.ndarray = field(repr=False)
    eval_time: float = 0.0
    fields: np.ndarray = field(repr=False, default=None)


def noise_for(seed, L, N, dt, t0=0.0, t1=1.0, cache_blocks=64):
    return NoisePath(seed, make_grid(L, N, t0, t1, dt), cache_blocks=cache_blocks)


def start_state(D, noise, beta, t_start):
    """Pair state at ``t_start`` with U(t_start) = D (Z spun up if t_start != 0)."""
    grid = noise.grid
    k = steps_of(grid, t_start)
    z = initial_z(noise, beta, k)
    V = np.atleast_2d(np.asarray(D, float)) - reconstruct(z, grid)
    return PairState(k, V, z)


def phi(t, state, noise, cfg):
    """Phi(t, theta_{k dt} omega) applied to a pair state at step k."""
    if t == 0:
        return state
    k1 = state.k + steps_of(noise.grid, t)
    return advance(state, noise, cfg, k1)[0]


def check_bounded(D, dx, cap):
    norms = l2_norm(np.atleast_2d(D), dx)
    if np.any(~np.isfinite(norms)) or np.max(norms) > cap * (1 + 1e-12):
        raise UnboundedInitialSet(f"initial set has L2 norm {np.max(norms):.6g} above the cap {cap}")
    return norms


def pullback_images(D, noise, cfg, horizon, eval_times=(0.0,)):
    """Evolve every member of D from -horizon, returning U at each eval time."""
    grid = noise.grid
    state = start_state(D, noise, cfg.beta, -horizon)
    steps = [steps_of(grid, r) for r in eval_times]
    final, (t, U, _, _) = advance(state, noise, cfg, max(steps), record_steps=steps)
    return t, U
