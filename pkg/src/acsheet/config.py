"""Flat ``key = value`` experiment configuration.

Lines are ``key = value``; ``#`` starts a comment; lists are comma
separated.  Unknown keys and malformed values raise :class:`ConfigInvalid`
naming the offending field.  ``validate`` checks every module precondition
up front, so no experiment starts on a bad config.
"""

import dataclasses
import math
from dataclasses import dataclass, fields

from .drift import make_drift
from .errors import AcsheetError, ConfigInvalid


def _floats(text):
    return tuple(float(t) for t in str(text).split(",") if t.strip())


def _ints(text):
    out = []
    for t in str(text).split(","):
        if t.strip():
            v = float(t)
            if v != int(v):
                raise ValueError(f"{t.strip()} is not an integer")
            out.append(int(v))
    return tuple(out)


def _int(text):
    v = _ints(text)
    if len(v) != 1:
        raise ValueError("expected one integer")
    return v[0]


@dataclass(frozen=True)
class ExperimentConfig:
    # grid and model
    L: float = 1.0
    N: int = 128
    dt: float = 1e-4
    drift: tuple = (0.0, 1.0, 0.0, -1.0)
    beta: float = 1.0
    seed: int = 1
    seeds: int = 3
    out: str = "out"
    # kernel
    kernel_points: int = 300
    green_p: tuple = (1.0, 2.0)
    green_gamma: float = 0.0
    green_times: tuple = (0.05, 0.1, 0.2, 0.35, 0.5, 0.75, 1.0)
    # noise and stochastic convolution
    noise_samples: int = 10_000
    z_levels: int = 4
    z_seeds: int = 2
    z_t: float = 0.25
    zdiag_dt: float = 1e-2
    zdiag_tmax: float = 100.0
    ensemble: int = 100
    epsilon: float = 0.05
    # random dynamics
    horizons: tuple = (1.0, 2.0, 4.0, 8.0)
    pullback_cap: float = 5.0
    magnitudes: tuple = (1.0, 10.0, 100.0)
    absorb_dt: float = 2e-5
    absorb_T: float = 4.0
    absorb_every: int = 10
    shifts: tuple = (0.0, 20.0, 40.0, 60.0, 80.0)
    temper_rate: float = 0.1
    beta_scan: tuple = (0.0, 0.5, 1.0, 2.0, 4.0)
    m_list: tuple = (4, 8, 16, 32)
    squeeze_windows: int = 32
    dim_samples: int = 1000
    dim_dt: float = 1e-3
    dim_horizon: float = 4.0
    dim_modes: tuple = (16, 32)
    synthetic_points: int = 20_000
    modes_list: tuple = (0, 1, 2, 4, 8, 16, 32)
    modes_T: float = 20.0
    modes_horizons: tuple = (4.0, 8.0, 16.0)
    modes_tol: float = 1e-6
    # appendix inequalities
    ineq_samples: int = 1000
    ineq_t: tuple = (0.01, 1.0, 100.0)
    # simulate
    sim_T: float = 1.0
    sim_record: float = 0.1

    @property
    def f(self):
        return make_drift(self.drift)

    def seed_list(self, n=None):
        n = self.seeds if n is None else n
        return [self.seed + i for i in range(n)]

    def replace(self, **kw):
        return dataclasses.replace(self, **kw)

    def to_text(self, exclude=()):
        lines = []
        for fl in fields(self):
            if fl.name in exclude:
                continue
            v = getattr(self, fl.name)
            if isinstance(v, tuple):
                v = ", ".join(repr(x) for x in v)
            lines.append(f"{fl.name} = {v}")
        return "\n".join(lines) + "\n"


_PARSERS = {float: float, int: _int, str: str}
_TUPLE_PARSERS = {"drift": _floats, "m_list": _ints, "modes_list": _ints, "dim_modes": _ints}


def _parser(name, default):
    if isinstance(default, tuple):
        return _TUPLE_PARSERS.get(name, _floats)
    return _PARSERS[type(default)]


def parse_text(text, base=None):
    base = base or ExperimentConfig()
    known = {fl.name: getattr(base, fl.name) for fl in fields(base)}
    values = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigInvalid(f"line {lineno}", f"expected 'key = value', got {raw.strip()!r}")
        key, val = (s.strip() for s in line.split("=", 1))
        if key not in known:
            raise ConfigInvalid(key, "unknown key")
        try:
            values[key] = _parser(key, known[key])(val)
        except ValueError as e:
            raise ConfigInvalid(key, f"cannot parse {val!r}: {e}") from None
    return dataclasses.replace(base, **values)


def load(path=None, overrides=None):
    """Config from ``path`` (or defaults), then ``overrides`` (field -> value), validated."""
    cfg = ExperimentConfig()
    if path is not None:
        try:
            with open(path) as fh:
                text = fh.read()
        except OSError as e:
            raise ConfigInvalid("config", f"cannot read {path}: {e.strerror}") from None
        cfg = parse_text(text, cfg)
    if overrides:
        cfg = dataclasses.replace(cfg, **{k: v for k, v in overrides.items() if v is not None})
    validate(cfg)
    return cfg


def _require(cond, name, reason):
    if not cond:
        raise ConfigInvalid(name, reason)


def _increasing(v):
    return all(b > a for a, b in zip(v, v[1:]))


def validate(cfg):
    _require(cfg.L > 0 and math.isfinite(cfg.L), "L", "must be positive")
    _require(cfg.N >= 2, "N", "need at least 2 interior nodes")
    _require(cfg.beta >= 0, "beta", "must be non-negative")
    _require(0 <= cfg.seed < 2**64 - 1000, "seed", "must be an unsigned 64-bit integer")
    _require(cfg.seeds >= 1, "seeds", "need at least one seed")
    try:
        f = make_drift(cfg.drift)
    except AcsheetError as e:
        raise ConfigInvalid("drift", str(e)) from None
    for name in ("dt", "absorb_dt", "dim_dt", "zdiag_dt"):
        dt = getattr(cfg, name)
        _require(dt > 0, name, "time step must be positive")
        if name != "zdiag_dt":
            _require(dt * f.K < 1, name, f"stability guard dt*K < 1 violated: dt*K = {dt * f.K:.6g}")
    for name in ("sim_T", "z_t", "zdiag_tmax", "absorb_T", "dim_horizon", "modes_T", "sim_record"):
        _require(getattr(cfg, name) > 0, name, "must be positive")
    _require(cfg.ensemble >= 50, "ensemble", "growth statistics need at least 50 paths")
    _require(cfg.epsilon > 0, "epsilon", "must be positive")
    _require(len(cfg.green_p) >= 1 and all(0 < p <= 2.5 for p in cfg.green_p), "green_p",
             "exponents must lie in (0, 2.5]")
    _require(all(0 <= cfg.green_gamma < min(1.0, 3 - p) for p in cfg.green_p), "green_gamma",
             "need 0 <= gamma < min(1, 3 - p)")
    _require(len(cfg.green_times) >= 2 and min(cfg.green_times) > 0, "green_times",
             "need at least two positive times")
    _require(len(cfg.horizons) >= 2 and min(cfg.horizons) > 0 and _increasing(cfg.horizons), "horizons",
             "need at least two positive, strictly increasing horizons")
    _require(len(cfg.modes_horizons) >= 1 and _increasing(cfg.modes_horizons) and min(cfg.modes_horizons) > 0,
             "modes_horizons", "must be positive and strictly increasing")
    _require(len(cfg.magnitudes) >= 2 and min(cfg.magnitudes) > 0, "magnitudes",
             "need at least two positive magnitudes")
    _require(_increasing(cfg.shifts) and min(cfg.shifts, default=0) >= 0, "shifts",
             "must be non-negative and strictly increasing")
    for name in ("m_list", "modes_list", "dim_modes"):
        v = getattr(cfg, name)
        _require(len(v) >= 1 and all(0 <= m < cfg.N for m in v), name, f"modes must lie in [0, {cfg.N})")
    _require(_increasing(cfg.m_list) and min(cfg.m_list) >= 1, "m_list", "must be strictly increasing, >= 1")
    _require(cfg.squeeze_windows >= 30, "squeeze_windows", "the squeezing verdict needs at least 30 windows")
    _require(cfg.dim_samples >= 1000, "dim_samples", "box counting needs at least 1000 samples")
    _require(cfg.synthetic_points >= 1000, "synthetic_points", "box counting needs at least 1000 samples")
    _require(cfg.ineq_samples >= 1, "ineq_samples", "need at least one sample")
    _require(len(cfg.ineq_t) >= 1 and min(cfg.ineq_t) > 0, "ineq_t", "times must be positive")
    _require(cfg.kernel_points >= 1, "kernel_points", "need at least one point")
    _require(cfg.noise_samples >= 100, "noise_samples", "need at least 100 samples")
    _require(cfg.z_levels >= 2 and cfg.z_seeds >= 1, "z_levels", "need at least two refinement levels")
    _require(len(cfg.beta_scan) >= 1 and min(cfg.beta_scan) >= 0 and _increasing(cfg.beta_scan),
             "beta_scan", "need increasing non-negative values")
    _require(cfg.absorb_every >= 1, "absorb_every", "must be >= 1")
    _require(0 < cfg.modes_tol, "modes_tol", "must be positive")
    return cfg
