"""End-to-end scenario runs, parameter sweeps and artifact output.

A run goes compatibility check -> kernels (reaction-diffusion systems) ->
simulation -> requested evaluators. Artifacts written by :func:`write_artifacts`:

``trajectory_<name>.csv``
    one row per stored time: ``t``, the boundary disturbance ``d`` and the
    nodal values ``u0 ... u{n-1}``.
``report_<check>.csv``
    ``t,lhs,rhs,margin`` for each evaluated estimate.
``plot/<check>_lhs.dat``, ``plot/<check>_rhs.dat``, ``plot/manifest.txt``
    two-column ``t value`` curves for external plotting.
``summary.csv``
    ``item,value,limit,passed`` rows for every check, admissibility and
    compatibility condition, divergence status and the overall verdict.

Numbers are written with 17 significant digits and LF line endings; no
timing information goes into files, so repeated runs are byte-identical.
"""
from __future__ import annotations

import math
import os
import time
from dataclasses import dataclass, field

import numpy as np

from . import backstepping as bs
from . import iss
from .burgers import (CompatibilityCondition, check_compatibility, simulate,
                      simulate_splitting_A, simulate_splitting_B)
from .config import CHECKS, ConfigError, ScenarioConfig
from .inequalities import (check_embedding, check_poincare_dirichlet, check_pointwise,
                           random_sine_series, random_trig_polynomial)
from .numerics import INF, Grid1D, l2_norm
from .stepping import BLOWUP_GUARD, DivergenceError, Trajectory
from .signals import ForcingSpec, SignalSpec

__all__ = [
    "SPLITTING_TOL",
    "LYAPUNOV_ORDERS",
    "RunArtifacts",
    "run_scenario",
    "write_artifacts",
    "trajectory_csv",
    "trajectory_rows",
    "SweepRow",
    "sweep",
    "sweep_csv",
    "inequality_suite",
    "fmt",
]

SPLITTING_TOL = 5e-3
LYAPUNOV_ORDERS = (1, 2, 4, 8)

_DEFAULT_TOL = {
    "splitting": 0.0,
    "levelset": 0.0,
    "h_sup": iss.ALGEBRAIC_TOL,
    "lyapunov": iss.LYAPUNOV_RTOL,
}


def fmt(x: float) -> str:
    """Canonical number format for every CSV: 17 significant digits."""
    return f"{x:.17g}"


@dataclass
class RunArtifacts:
    """Outcome of one scenario.

    ``passed`` requires every report satisfied, every compatibility condition
    met, every admissibility condition met and no divergence.
    """

    config: ScenarioConfig
    trajectories: dict = field(default_factory=dict)
    reports: list = field(default_factory=list)
    compatibility: list = field(default_factory=list)
    admissibility: list = field(default_factory=list)
    diverged: bool = False
    divergence_time: float | None = None
    message: str = ""
    info: dict = field(default_factory=dict)
    wall_time: float = 0.0
    files: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return (not self.diverged
                and all(r.satisfied for r in self.reports)
                and all(c.passed for c in self.compatibility)
                and all(a.passed for a in self.admissibility))

    def min_margins(self) -> dict:
        return {r.name: r.min_margin for r in self.reports}

    def summary_rows(self) -> list[tuple[str, float, float, bool]]:
        rows = []
        for r in self.reports:
            rows.append((r.name, r.min_margin, -r.tol, r.satisfied))
        for a in self.admissibility:
            rows.append((f"admissibility_{a.name}", a.value, a.threshold, a.passed))
        for c in self.compatibility:
            rows.append((f"compatibility {c.name}", c.residual, math.nan, c.passed))
        rows.append(("divergence", self.divergence_time if self.diverged else math.nan,
                     BLOWUP_GUARD, not self.diverged))
        for key in sorted(self.info):
            rows.append((key, self.info[key], math.nan, True))
        rows.append(("overall", math.nan, math.nan, self.passed))
        return rows

    def summary_csv(self) -> str:
        lines = ["item,value,limit,passed"]
        lines += [f"{name},{fmt(v)},{fmt(lim)},{str(ok).lower()}"
                  for name, v, lim, ok in self.summary_rows()]
        return "\n".join(lines) + "\n"


def _tol(config: ScenarioConfig, name: str, override: float | None) -> float:
    if override is not None:
        return override
    base = name.split("_p")[0] if name.startswith("lyapunov") else name
    if base in config.tolerances:
        return config.tolerances[base]
    return _DEFAULT_TOL.get(base, iss.SOLVER_TOL)


def _difference_report(name, a: Trajectory, b: Trajectory, tol: float) -> iss.BoundReport:
    err = np.max(np.abs(a.fields - b.fields), axis=1)
    return iss.BoundReport(name, a.times, err, np.full(err.shape, SPLITTING_TOL), tol)


def _levelset_report(w: Trajectory, params, tol: float) -> iss.BoundReport:
    level = iss.lemma4_level(w, params)
    prof = iss.level_set_profile(w, [level])
    meas = prof.measures[:, 0]
    return iss.BoundReport("levelset", w.times, meas, np.full(meas.shape, w.grid.h), tol)


def _initial_rd(config: ScenarioConfig, k: bs.Kernel):
    if config.initial is None:
        return bs.compatible_initial_condition(k, config.rd_params, config.initial_amplitude)
    return config.initial


def _growth_rate(traj: Trajectory) -> float:
    sup = traj.sup_norms()
    half = len(traj) // 2
    t, s = traj.times[half:], sup[half:]
    if t.size < 2 or np.any(s <= 0):
        return math.nan
    return float(np.polyfit(t, np.log(s), 1)[0])


def run_scenario(config: ScenarioConfig, evaluate: bool = True,
                 tol: float | None = None) -> RunArtifacts:
    """Run one scenario; ``evaluate=False`` skips the bound evaluators.

    Solver divergence is caught and recorded, not raised. For the open-loop
    system a run that stays below the blow-up guard is still flagged as
    diverging when the discrete operator has a positive eigenvalue and the
    sup-norm of the undisturbed run grows; the reported time is the projected
    crossing of the guard at that fitted growth rate.
    """
    start = time.perf_counter()
    grid = Grid1D(config.n_nodes)
    art = RunArtifacts(config)
    checks = config.checks if evaluate else ()
    d, f = config.disturbance, config.forcing
    args = (config.t_end, config.dt, grid, config.output_stride)
    try:
        if config.is_reaction_diffusion:
            _run_rd(config, art, grid, checks, tol, d, f, args)
        else:
            _run_burgers(config, art, grid, checks, tol, d, f, args)
    except DivergenceError as exc:
        art.diverged = True
        art.divergence_time = exc.time
        art.message = str(exc)
    art.wall_time = time.perf_counter() - start
    return art


def _run_burgers(config, art, grid, checks, tol, d, f, args):
    p = config.burgers_params
    u0 = config.initial
    art.compatibility = check_compatibility(u0, d, f)
    u0_l2 = l2_norm(u0.sample(grid), grid)
    adm1 = iss.admissibility_theorem1(d, f, p)
    adm2 = iss.admissibility_theorem2(d, p)
    needs = {"theorem1": adm1, "lemma4": adm1, "lemma5": adm1,
             "theorem2": adm2, "lemma6": adm2, "lemma7": adm2}
    used = []
    for c in checks:
        if c in needs and needs[c] not in used:
            used.append(needs[c])
    art.admissibility = used
    T = lambda name: _tol(config, name, tol)  # noqa: E731

    if config.system == "burgers":
        u = simulate(p, u0, d, f, *args)
        art.trajectories["u"] = u
        if "theorem1" in checks:
            art.reports.append(iss.evaluate_theorem1(u, u0_l2, p, T("theorem1"), adm1))
        if "theorem2" in checks:
            art.reports.append(iss.evaluate_theorem2(u, u0_l2, p, config.eps,
                                                     T("theorem2"), adm2))
        return

    split = simulate_splitting_A if config.system == "burgers_split_a" else simulate_splitting_B
    w, v = split(p, u0, d, f, *args)
    art.trajectories["w"] = w
    art.trajectories["v"] = v
    if "lemma4" in checks:
        art.reports.append(iss.evaluate_lemma4(w, p, T("lemma4"), adm1))
    if "lemma5" in checks:
        art.reports.append(iss.evaluate_lemma5(v, u0_l2, p, T("lemma5"), adm1))
    if "lemma6" in checks:
        art.reports.append(iss.evaluate_lemma6(w, p, T("lemma6"), adm2))
    if "lemma7" in checks:
        art.reports.append(iss.evaluate_lemma7(v, u0_l2, p, config.eps, T("lemma7"), adm2))
    if "levelset" in checks:
        art.reports.append(_levelset_report(w, p, T("levelset")))
    if "splitting" in checks:
        u = simulate(p, u0, d, f, *args)
        art.trajectories["u"] = u
        art.reports.append(_difference_report("splitting", u, w + v, T("splitting")))


def _run_rd(config, art, grid, checks, tol, d, f, args):
    p = config.rd_params
    T = lambda name: _tol(config, name, tol)  # noqa: E731
    k = bs.solve_kernel(p, grid)
    u0 = _initial_rd(config, k)
    u0_samples = u0.sample(grid)

    if config.system == "reaction_diffusion_open_loop":
        lam = bs.largest_eigenvalue(*bs.open_loop_operator(p, grid))
        art.info["open_loop_eigenvalue"] = lam
        u = bs.simulate_open_loop(p, u0, d, f, *args)
        art.trajectories["u"] = u
        # The disturbances themselves can make the norm grow; the rate of the
        # unstable mode is read off the undisturbed companion run.
        free = bs.simulate_open_loop(p, u0, SignalSpec("zero"), ForcingSpec("zero"), *args)
        rate = _growth_rate(free)
        art.info["growth_rate"] = rate
        final = float(u.sup_norms()[-1])
        if lam > 0 and rate > 0 and final > 0:
            art.diverged = True
            art.divergence_time = config.t_end + math.log(BLOWUP_GUARD / final) / rate
            art.message = (f"open loop unstable: eigenvalue {lam:.6g} > 0, sup-norm grows "
                           f"at rate {rate:.6g}; projected blow-up at "
                           f"t = {art.divergence_time:.6g}")
        return

    art.compatibility = bs.check_closed_loop_compatibility(u0, k, p, d, f)
    if config.system == "reaction_diffusion_closed_loop":
        l = bs.solve_inverse_kernel(p, grid)
        gains = bs.gain_constants(k, l)
        art.info.update(C0=gains.C0, C1=gains.C1)
        u = bs.simulate_closed_loop(p, u0, d, f, *args, kernel=k)
        art.trajectories["u"] = u
        if "prop2" in checks:
            art.reports.append(iss.evaluate_prop2(u, float(np.max(np.abs(u0_samples))),
                                                  gains, p, T("prop2")))
        return

    w0 = bs.forward_transform(u0_samples, k, grid)
    g, h = bs.simulate_target_split(p, w0, d, f, *args, kernel=k)
    art.trajectories["g"] = g
    art.trajectories["h"] = h
    if "g_sup" in checks:
        art.reports.append(iss.evaluate_g_sup(g, p, T("g_sup")))
    if "h_sup" in checks:
        art.reports.append(iss.h_sup_decay(h, p, tol=T("h_sup")))
    if "lyapunov" in checks:
        for q in LYAPUNOV_ORDERS:
            art.reports.append(iss.lyapunov_lp_decay(h, p, q, T(f"lyapunov_p{q}")))


def _write(path: str, text: str, art: RunArtifacts) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
    art.files.append(path)


def trajectory_rows(n_samples: int, max_rows: int) -> np.ndarray:
    """Indices of the samples written to a trajectory file.

    Every ``ceil((n_samples - 1) / (max_rows - 1))``-th sample, always
    including the first and the last.
    """
    if n_samples <= max_rows:
        return np.arange(n_samples)
    step = -(-(n_samples - 1) // (max_rows - 1))
    idx = np.arange(0, n_samples, step)
    if idx[-1] != n_samples - 1:
        idx = np.append(idx, n_samples - 1)
    return idx


def trajectory_csv(traj: Trajectory, max_rows: int | None = None) -> str:
    """CSV with columns ``t, d, u0, ..., u{n-1}``, optionally thinned in time."""
    idx = np.arange(len(traj)) if max_rows is None else trajectory_rows(len(traj), max_rows)
    header = "t,d," + ",".join(f"u{i}" for i in range(traj.grid.n_nodes))
    lines = [header]
    for j in idx:
        lines.append(",".join([fmt(traj.times[j]), fmt(traj.boundary_history[j])]
                              + [fmt(v) for v in traj.fields[j]]))
    return "\n".join(lines) + "\n"


def write_artifacts(art: RunArtifacts, out_dir: str) -> list[str]:
    """Serialize trajectories, reports, plot data and the summary into ``out_dir``."""
    os.makedirs(out_dir, exist_ok=True)
    for name, traj in art.trajectories.items():
        text = trajectory_csv(traj, art.config.trajectory_rows)
        _write(os.path.join(out_dir, f"trajectory_{name}.csv"), text, art)
    plot_dir = os.path.join(out_dir, "plot")
    manifest = []
    if art.reports:
        os.makedirs(plot_dir, exist_ok=True)
    for r in art.reports:
        _write(os.path.join(out_dir, f"report_{r.name}.csv"), r.to_csv(), art)
        for side in ("lhs", "rhs"):
            fname = f"{r.name}_{side}.dat"
            vals = getattr(r, side)
            text = "".join(f"{fmt(t)} {fmt(v)}\n" for t, v in zip(r.times, vals))
            _write(os.path.join(plot_dir, fname), text, art)
            manifest.append(f"{fname} {r.name} {side}")
    if manifest:
        _write(os.path.join(plot_dir, "manifest.txt"), "\n".join(manifest) + "\n", art)
    _write(os.path.join(out_dir, "summary.csv"), art.summary_csv(), art)
    return art.files


@dataclass(frozen=True)
class SweepRow:
    value: float
    passed: bool
    min_margins: dict
    admissibility: tuple
    error: str = ""


def sweep(base: ScenarioConfig, parameter: str, values, tol: float | None = None) -> list[SweepRow]:
    """Independent runs with ``parameter`` set to each value, sorted by value.

    Configuration, kernel and solver failures are recorded in the row's
    ``error`` field and the sweep moves on.
    """
    rows = []
    for value in sorted(float(v) for v in values):
        text = repr(int(value)) if value.is_integer() else repr(value)
        try:
            cfg = base.with_value(parameter, text)
            art = run_scenario(cfg, tol=tol)
        except (ConfigError, bs.KernelDivergenceError, ValueError, ArithmeticError) as exc:
            rows.append(SweepRow(value, False, {}, (), f"{type(exc).__name__}: {exc}"))
            continue
        adm = tuple((a.name, a.value, a.threshold, a.passed) for a in art.admissibility)
        rows.append(SweepRow(value, art.passed, art.min_margins(), adm, art.message))
    return rows


def sweep_csv(parameter: str, rows: list[SweepRow]) -> str:
    names = sorted({n for r in rows for n in r.min_margins})
    adm_names = sorted({a[0] for r in rows for a in r.admissibility})
    header = ([parameter, "passed"] + [f"min_margin_{n}" for n in names]
              + [f"admissibility_{n}" for n in adm_names]
              + [f"threshold_{n}" for n in adm_names] + ["error"])
    lines = [",".join(header)]
    for r in rows:
        adm = {a[0]: a[1] for a in r.admissibility}
        thr = {a[0]: a[2] for a in r.admissibility}
        cells = [fmt(r.value), str(r.passed).lower()]
        cells += [fmt(r.min_margins[n]) if n in r.min_margins else "" for n in names]
        cells += [fmt(adm[n]) if n in adm else "" for n in adm_names]
        cells += [fmt(thr[n]) if n in thr else "" for n in adm_names]
        cells.append('"' + r.error.replace('"', "'") + '"' if r.error else "")
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"


def inequality_suite(n_seeds: int = 200, family: str = "all", n_nodes: int = 2001,
                     orders=(1, 2, 4, 8, INF)) -> list[tuple[str, int, str, float, bool]]:
    """Randomized embedding / pointwise / Poincare checks.

    ``family`` selects ``trig`` (trigonometric polynomials for the embedding
    and pointwise checks), ``sine`` (sine series for the Poincare check) or
    ``all``. Each seed draws one field and one interval ``[a, b]`` inside
    [-2, 2]. Rows are ``(check, seed, detail, margin, satisfied)``.
    """
    if family not in ("trig", "sine", "all"):
        raise ValueError(f"unknown family {family!r}")
    grid = Grid1D(n_nodes)
    rows = []
    for seed in range(n_seeds):
        rng = np.random.default_rng(seed)
        if family in ("trig", "all"):
            u = random_trig_polynomial(rng, grid)
            a = rng.uniform(-2.0, 1.0)
            b = a + rng.uniform(0.1, 1.0)
            for p in orders:
                m = check_embedding(u, grid, a, b, p)
                rows.append(("embedding", seed, f"p={p:g}", m.margin, m.satisfied))
            c = rng.uniform(a, b)
            m = check_pointwise(u, grid, a, b, c)
            rows.append(("pointwise", seed, f"c={c:.6f}", m.margin, m.satisfied))
        if family in ("sine", "all"):
            m = check_poincare_dirichlet(random_sine_series(rng, grid), grid)
            rows.append(("poincare", seed, "", m.margin, m.satisfied))
    return rows


def check_names(system: str) -> tuple[str, ...]:
    return CHECKS[system]
