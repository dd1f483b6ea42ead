"""Scenario configuration: a flat ``key = value`` format with dotted sections.

Example::

    # canonical admissible Burgers scenario
    system = burgers
    params.mu = 1
    params.nu = 1
    initial.family = bump
    initial.amplitude = 1
    disturbance.family = ramped_cosine
    disturbance.amplitude = 0.1
    forcing.family = separable
    forcing.amplitude = 0.05
    checks = theorem1, theorem2

Blank lines and ``#`` comments are ignored. Every error names the offending
key and line.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

from .backstepping import ReactionDiffusionParams
from .burgers import DEFAULT_DT, DEFAULT_N_NODES, DEFAULT_T_END, BurgersParams
from .signals import (FORCING_FAMILIES, INITIAL_FAMILIES, SIGNAL_FAMILIES, ForcingSpec,
                      InitialConditionSpec, SignalSpec)

__all__ = [
    "ConfigError",
    "SYSTEMS",
    "CHECKS",
    "ScenarioConfig",
    "parse_config",
    "load_config",
]

#: Checks applicable to each system.
CHECKS = {
    "burgers": ("theorem1", "theorem2"),
    "burgers_split_a": ("lemma4", "lemma5", "splitting", "levelset"),
    "burgers_split_b": ("lemma6", "lemma7", "splitting"),
    "reaction_diffusion_closed_loop": ("prop2",),
    "reaction_diffusion_open_loop": (),
    "target_split": ("g_sup", "h_sup", "lyapunov"),
}
SYSTEMS = tuple(CHECKS)
RD_SYSTEMS = ("reaction_diffusion_closed_loop", "reaction_diffusion_open_loop", "target_split")

#: Extra initial-data family for reaction-diffusion systems: bump plus the
#: feedback-compatible correction.
COMPATIBLE = "compatible"

#: Upper bound on the number of time rows written to a trajectory CSV. Bound
#: evaluation always uses every recorded sample; only the file is thinned.
DEFAULT_TRAJECTORY_ROWS = 401


class ConfigError(ValueError):
    """Invalid configuration; ``key`` and ``line`` locate the problem when known."""

    def __init__(self, message: str, key: str | None = None, line: int | None = None):
        self.key = key
        self.line = line
        where = []
        if key is not None:
            where.append(f"key '{key}'")
        if line is not None:
            where.append(f"line {line}")
        super().__init__(f"{', '.join(where)}: {message}" if where else message)


def _float(v: str) -> float:
    x = float(v)
    if not math.isfinite(x):
        raise ValueError("must be finite")
    return x


def _int(v: str) -> int:
    x = float(v)
    if not x.is_integer():
        raise ValueError("must be an integer")
    return int(x)


def _word(v: str) -> str:
    return v.strip()


def _checks(v: str) -> tuple[str, ...]:
    return tuple(c.strip() for c in v.split(",") if c.strip())


_KEYS = {
    "system": _word,
    "params.mu": _float,
    "params.nu": _float,
    "params.a0": _float,
    "params.a1": _float,
    "initial.family": _word,
    "initial.amplitude": _float,
    "disturbance.family": _word,
    "disturbance.amplitude": _float,
    "disturbance.omega": _float,
    "disturbance.terms": _int,
    "disturbance.seed": _int,
    "forcing.family": _word,
    "forcing.amplitude": _float,
    "forcing.space": _word,
    "forcing.wavenumber": _int,
    "forcing.time": _word,
    "forcing.omega": _float,
    "forcing.terms": _int,
    "forcing.seed": _int,
    "grid.n_nodes": _int,
    "time.dt": _float,
    "time.t_end": _float,
    "output.stride": _int,
    "output.trajectory_rows": _int,
    "checks": _checks,
    "eps": _float,
    "seed": _int,
}
_TOL_PREFIX = "tolerance."


@dataclass(frozen=True)
class ScenarioConfig:
    """Validated scenario.

    ``entries`` keeps the raw text values with their line numbers, so a
    config can be re-parsed with one value replaced (see :meth:`with_value`).
    """

    system: str
    mu: float
    nu: float
    a0: float
    a1: float
    initial: InitialConditionSpec | None
    initial_amplitude: float
    disturbance: SignalSpec
    forcing: ForcingSpec
    n_nodes: int
    dt: float
    t_end: float
    output_stride: int
    trajectory_rows: int
    checks: tuple[str, ...]
    eps: float
    seed: int
    tolerances: dict = field(default_factory=dict)
    entries: dict = field(default_factory=dict, repr=False)

    @property
    def burgers_params(self) -> BurgersParams:
        return BurgersParams(self.mu, self.nu)

    @property
    def rd_params(self) -> ReactionDiffusionParams:
        return ReactionDiffusionParams(self.mu, self.nu, self.a0, self.a1)

    @property
    def is_reaction_diffusion(self) -> bool:
        return self.system in RD_SYSTEMS

    def to_text(self) -> str:
        return "\n".join(f"{k} = {v}" for k, (v, _) in self.entries.items()) + "\n"

    def with_value(self, key: str, value) -> "ScenarioConfig":
        """Re-validated copy with ``key`` set to ``value``."""
        if key not in _KEYS and not key.startswith(_TOL_PREFIX):
            raise ConfigError("unknown key", key)
        entries = dict(self.entries)
        entries[key] = (str(value), entries.get(key, (None, None))[1])
        return _build(entries)


def parse_config(text: str) -> ScenarioConfig:
    """Parse and validate a configuration document.

    Defaults: ``grid.n_nodes = 401``, ``time.dt = 2.5e-5``, ``time.t_end = 2``,
    ``output.stride = 1``,
    ``output.trajectory_rows = 401``, ``eps = mu / 2``, ``system = burgers``, zero
    disturbances and initial data, all applicable checks.

    Raises
    ------
    ConfigError
        Unknown or duplicated key, malformed line or value, missing required
        key, or an invariant violation.
    """
    entries: dict[str, tuple[str, int]] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError("expected 'key = value'", line=lineno)
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in _KEYS and not key.startswith(_TOL_PREFIX):
            raise ConfigError("unknown key", key, lineno)
        if key in entries:
            raise ConfigError(f"duplicate key (first set on line {entries[key][1]})",
                              key, lineno)
        if not value:
            raise ConfigError("empty value", key, lineno)
        entries[key] = (value, lineno)
    return _build(entries)


def load_config(path) -> ScenarioConfig:
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read())


def _build(entries: dict) -> ScenarioConfig:
    vals = {}
    for key, (raw, line) in entries.items():
        conv = _float if key.startswith(_TOL_PREFIX) else _KEYS[key]
        try:
            vals[key] = conv(raw)
        except ValueError as exc:
            raise ConfigError(f"bad value {raw!r} ({exc})", key, line) from None

    def get(key, default=None):
        return vals.get(key, default)

    def line(key):
        return entries.get(key, (None, None))[1]

    def fail(msg, key):
        raise ConfigError(msg, key, line(key))

    system = get("system", "burgers")
    if system not in SYSTEMS:
        fail(f"unknown system {system!r}; expected one of {', '.join(SYSTEMS)}", "system")
    rd = system in RD_SYSTEMS

    required = ["params.mu", "params.nu"] + (["params.a0"] if rd else [])
    for key in required:
        if key not in vals:
            raise ConfigError("missing required key", key)
    for key in ("params.mu", "params.nu"):
        if vals[key] <= 0:
            fail("must be positive", key)
    if not rd:
        for key in ("params.a0", "params.a1"):
            if key in vals:
                fail(f"only used by reaction-diffusion systems, not {system}", key)

    n_nodes = get("grid.n_nodes", DEFAULT_N_NODES)
    if n_nodes < 3:
        fail("need at least 3 nodes", "grid.n_nodes")
    dt = get("time.dt", DEFAULT_DT)
    if dt <= 0:
        fail("must be positive", "time.dt")
    t_end = get("time.t_end", DEFAULT_T_END)
    if t_end <= 0:
        fail("must be positive", "time.t_end")
    n_steps = round(t_end / dt)
    if n_steps < 1 or abs(n_steps * dt - t_end) > 1e-9 * max(1.0, t_end):
        fail("t_end must be a whole number of time steps", "time.t_end")
    stride = get("output.stride", 1)
    if stride < 1:
        fail("must be a positive integer", "output.stride")
    rows = get("output.trajectory_rows", DEFAULT_TRAJECTORY_ROWS)
    if rows < 2:
        fail("need at least 2 rows", "output.trajectory_rows")

    mu = vals["params.mu"]
    eps = get("eps", 0.5 * mu)
    if not 0 < eps < mu:
        fail(f"must lie in (0, mu) = (0, {mu})", "eps")
    seed = get("seed", 0)

    allowed = CHECKS[system]
    checks = get("checks", allowed)
    for c in checks:
        if c not in allowed:
            applicable = ", ".join(allowed) or "none"
            fail(f"check {c!r} does not apply to system {system} (applicable: {applicable})",
                 "checks")
    tolerances = {}
    for key, v in vals.items():
        if key.startswith(_TOL_PREFIX):
            name = key[len(_TOL_PREFIX):]
            if name not in allowed:
                fail(f"no check named {name!r} for system {system}", key)
            if v < 0:
                fail("must be nonnegative", key)
            tolerances[name] = v

    init_family = get("initial.family", COMPATIBLE if rd else "zero")
    init_amp = get("initial.amplitude", 1.0 if init_family != "zero" else 0.0)
    if init_family == COMPATIBLE:
        if not rd:
            fail("the compatible profile needs a feedback kernel "
                 "(reaction-diffusion systems only)", "initial.family")
        initial = None
    else:
        if init_family not in INITIAL_FAMILIES:
            fail(f"unknown family {init_family!r}", "initial.family")
        initial = InitialConditionSpec(init_family, init_amp)

    d_family = get("disturbance.family", "zero")
    if d_family not in SIGNAL_FAMILIES:
        fail(f"unknown family {d_family!r}", "disturbance.family")
    if get("disturbance.terms", 4) < 1:
        fail("must be positive", "disturbance.terms")
    disturbance = SignalSpec(d_family, get("disturbance.amplitude", 0.0),
                             get("disturbance.omega", 1.0), get("disturbance.terms", 4),
                             get("disturbance.seed", seed))

    f_family = get("forcing.family", "zero")
    if f_family not in FORCING_FAMILIES:
        fail(f"unknown family {f_family!r}", "forcing.family")
    space = get("forcing.space", "sine")
    if space not in ("sine", "bump"):
        fail(f"unknown space profile {space!r}", "forcing.space")
    tprof = get("forcing.time", "sin2")
    if tprof not in ("sin2", "relax"):
        fail(f"unknown time profile {tprof!r}", "forcing.time")
    if get("forcing.wavenumber", 1) < 1:
        fail("must be a positive integer", "forcing.wavenumber")
    if get("forcing.terms", 4) < 1:
        fail("must be positive", "forcing.terms")
    forcing = ForcingSpec(f_family, get("forcing.amplitude", 0.0), space,
                          get("forcing.wavenumber", 1), tprof, get("forcing.omega", 1.0),
                          get("forcing.terms", 4), get("forcing.seed", seed))

    return ScenarioConfig(
        system=system, mu=mu, nu=vals["params.nu"], a0=get("params.a0", 0.0),
        a1=get("params.a1", 0.0), initial=initial, initial_amplitude=init_amp,
        disturbance=disturbance, forcing=forcing, n_nodes=n_nodes, dt=dt, t_end=t_end,
        output_stride=stride, trajectory_rows=rows, checks=tuple(checks), eps=eps, seed=seed,
        tolerances=tolerances, entries=dict(entries))
