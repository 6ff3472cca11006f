import threading

import numpy as np
import pytest

from acsheet.drift import allen_cahn, make_drift
from acsheet.errors import GridMismatch, StabilityGuardViolated, StepMisalignment
from acsheet.grid_noise import NoisePath, TestFunction, l2_norm, make_grid
from acsheet.solver import (PairState, SolveConfig, Stepper, advance, difference_dynamics, gl_energy, laplacian,
                            solve_u, step_v, tff_residual)

F = allen_cahn()


def test_linear_solve_eigenvalue():
    g = make_grid(1, 64, 0, 1, 1e-3)
    st = Stepper(g, SolveConfig(F, beta=0.0, dt=1e-3))
    V = np.sin(np.pi * g.nodes)
    lam_h = (2 / g.dx**2) * (1 - np.cos(np.pi * g.dx))
    assert np.allclose(st.solve(V), V / (1 + g.dt * lam_h), rtol=1e-13, atol=1e-15)
    assert np.allclose(laplacian(V, g.dx), -lam_h * V, atol=1e-10)


def test_zero_fixed_point():
    g = make_grid(1, 16, 0, 1, 1e-3)
    out = step_v(np.zeros(g.N), np.zeros(g.N), SolveConfig(F, dt=1e-3), g)
    assert np.array_equal(out, np.zeros(g.N))


def test_stability_guard():
    with pytest.raises(StabilityGuardViolated):
        SolveConfig(make_drift([0, 2, 0, -1]), dt=1.0)
    with pytest.raises(StabilityGuardViolated):
        SolveConfig(F, dt=1.0)
    SolveConfig(F, dt=0.99)


def test_config_errors(small_grid):
    with pytest.raises(ValueError):
        SolveConfig(F, scheme="rk4")
    with pytest.raises(GridMismatch):
        step_v(np.zeros(5), np.zeros(5), SolveConfig(F, dt=1e-3), small_grid)
    with pytest.raises(GridMismatch):
        Stepper(small_grid, SolveConfig(F, dt=2e-3))


def test_deterministic_decay_to_zero():
    g = make_grid(1, 63, 0, 2, 1e-3)
    cfg = SolveConfig(F, beta=1.0, dt=1e-3)
    quiet = NoisePath(1, g).scaled(0.0)
    u0 = 0.5 * np.sin(np.pi * g.nodes)
    tr = solve_u(u0, quiet, cfg, (0, 2), record_every=500)
    nrm = l2_norm(tr.U[:, 0], g.dx)
    assert np.all(np.diff(nrm) < 0)
    assert nrm[-1] < 1e-6
    # fine-grid reference at t = 0.5
    gf = make_grid(1, 127, 0, 0.5, 2.5e-4)
    ref = solve_u(0.5 * np.sin(np.pi * gf.nodes), NoisePath(1, gf).scaled(0.0),
                  SolveConfig(F, dt=2.5e-4), (0, 0.5), record_every=2000)
    coarse = tr.U[1, 0]
    # first-order in time: about lambda^2 dt t / 2 ~ 2% relative at dt = 1e-3
    assert np.max(np.abs(ref.U[-1, 0][1::2] - coarse)) < 0.03 * np.max(np.abs(coarse))


def test_linear_damping_gives_z():
    # f(u) = -beta u with V(0) = 0: f(V + Z) + beta Z = 0, so U = Z exactly
    g = make_grid(1, 31, 0, 0.5, 1e-3)
    beta = 2.0
    cfg = SolveConfig(make_drift([0.0, -beta]), beta=beta, dt=1e-3)
    tr = solve_u(np.zeros(g.N), NoisePath(2, g), cfg, (0, 0.5), record_every=10)
    assert not np.any(tr.V)
    assert np.array_equal(tr.U[:, 0], tr.Z)


def test_tff_residual_zero_path(small_grid):
    quiet = NoisePath(1, small_grid).scaled(0.0)
    cfg = SolveConfig(F, dt=small_grid.dt)
    tr = solve_u(np.zeros(small_grid.N), quiet, cfg, (0, 0.1))
    r = tff_residual(tr, quiet, TestFunction.sine(small_grid), np.zeros(small_grid.N), F)
    assert not np.any(r)


def test_tff_residual_first_order_linear():
    f = make_drift([0.0, -1.0])
    base = NoisePath(6, make_grid(1, 32, 0, 1, 2.5e-4))
    res = []
    for fac in (4, 2, 1):
        p = base.coarsen(fac, 1) if fac > 1 else base
        g = p.grid
        u0 = np.sin(np.pi * g.nodes)
        tr = solve_u(u0, p, SolveConfig(f, dt=g.dt), (0, 1))
        res.append(np.max(np.abs(tff_residual(tr, p, TestFunction.sine(g), u0, f))))
    ratios = np.array(res[:-1]) / np.array(res[1:])
    assert np.all((ratios > 1.6) & (ratios < 2.4))


def test_tff_needs_every_step(small_grid):
    tr = solve_u(np.zeros(small_grid.N), NoisePath(1, small_grid), SolveConfig(F, dt=small_grid.dt), (0, 0.1),
                 record_every=2)
    with pytest.raises(StepMisalignment):
        tff_residual(tr, NoisePath(1, small_grid), TestFunction.sine(small_grid), np.zeros(small_grid.N), F)


def test_difference_identical_inputs(small_grid):
    u0 = np.sin(np.pi * small_grid.nodes)
    rep = difference_dynamics(u0, u0, NoisePath(1, small_grid), SolveConfig(F, dt=small_grid.dt), (0, 0.2))
    assert not np.any(rep.y_norm)
    with pytest.raises(GridMismatch):
        difference_dynamics(u0, u0[:-1], NoisePath(1, small_grid), SolveConfig(F, dt=small_grid.dt), (0, 0.2))


def test_difference_noise_free(small_grid):
    x = small_grid.nodes
    for scheme in ("semi-implicit", "etd"):
        cfg = SolveConfig(F, dt=small_grid.dt, scheme=scheme)
        rep = difference_dynamics(np.sin(np.pi * x), -np.sin(2 * np.pi * x), NoisePath(3, small_grid), cfg, (0, 0.5))
        assert rep.defect < 1e-12
        assert rep.gronwall_ok


def test_bit_identical_runs_and_threads(small_grid):
    cfg = SolveConfig(F, dt=small_grid.dt)
    u0 = 0.7 * np.sin(np.pi * small_grid.nodes)
    ref = solve_u(u0, NoisePath(9, small_grid), cfg, (0, 0.5), record_every=50).U
    out = {}

    def job(i):
        out[i] = solve_u(u0, NoisePath(9, small_grid), cfg, (0, 0.5), record_every=50).U

    ts = [threading.Thread(target=job, args=(i,)) for i in range(4)]
    for t in ts:
        t.start()
    for t in ts:
        t.join()
    assert all(np.array_equal(ref, v) for v in out.values())


def test_cocycle_restart_bit_exact(small_grid):
    cfg = SolveConfig(F, dt=small_grid.dt)
    n = NoisePath(9, small_grid)
    s0 = PairState(0, np.sin(np.pi * small_grid.nodes)[None], np.zeros(small_grid.N))
    full, _ = advance(s0, n, cfg, 500)
    mid, _ = advance(s0, n, cfg, 200)
    rest, _ = advance(PairState(0, mid.V, mid.z), n.shift(200 * small_grid.dt), cfg, 300)
    assert np.array_equal(full.V, rest.V) and np.array_equal(full.z, rest.z)


def test_energy_decreases_without_noise():
    g = make_grid(1, 63, 0, 1, 1e-3)
    tr = solve_u(1.2 * np.sin(np.pi * g.nodes), NoisePath(1, g).scaled(0.0), SolveConfig(F, dt=1e-3), (0, 1),
                 record_every=50)
    E = gl_energy(tr.U[:, 0], F, g.dx)
    assert np.all(np.diff(E) <= 1e-12)
