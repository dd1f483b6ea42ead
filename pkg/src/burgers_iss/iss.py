"""Evaluators for the ISS / iISS estimates and De Giorgi level-set diagnostics.

Each ``evaluate_*`` function compares a simulated quantity (``lhs``) against
the closed-form bound (``rhs``) at every stored time and returns a
:class:`BoundReport`. Running maxima of the disturbances come from the
trajectory histories, which are accumulated at every time step; running
maxima of ``|d|`` use the stored samples.

Bounds checked (``maxd`` = running max of ``|d|``, ``maxf`` = running max of
``|f|``, ``F2`` = running integral of ``||f||^2``)::

    theorem1  ||u||^2 <= 2||u0||^2 e^{-mu t} + 4 maxd^2 + (128/mu^2) maxf^2
    theorem2  ||u||^2 <= 2||u0||^2 e^{-(mu-eps)t} + 2 maxd^2 + (2/eps) F2
    lemma4    max|w|  <= maxd + (4 sqrt2/mu) maxf
    lemma5    ||v||^2 <= ||u0||^2 e^{-mu t}
    lemma6    max|w|  <= maxd
    lemma7    ||v||^2 <= ||u0||^2 e^{-(mu-eps)t} + (1/eps) F2
    prop2     max|u|  <= C0 max|u0| e^{-nu t} + C1 (maxd + (4 sqrt2/mu) maxf)
    lyapunov  ||h||_{2p}^{2p} <= ||h0||_{2p}^{2p} e^{-2p(nu + 2mu(2p-1)/p^2) t}
    h_sup     max|h|  <= max|h0| e^{-nu t} (1 + 1e-2)
    g_sup     max|g|  <= maxd + (4 sqrt2/mu) maxf
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .backstepping import GainConstants, ReactionDiffusionParams
from .burgers import BurgersParams
from .inequalities import InequalityMargin
from .numerics import Grid1D
from .signals import ForcingSpec, SignalSpec
from .stepping import Trajectory

__all__ = [
    "SOLVER_TOL",
    "ALGEBRAIC_TOL",
    "LYAPUNOV_RTOL",
    "Admissibility",
    "BoundReport",
    "LevelSetProfile",
    "admissibility_theorem1",
    "admissibility_theorem2",
    "evaluate_theorem1",
    "evaluate_theorem2",
    "evaluate_lemma4",
    "evaluate_lemma5",
    "evaluate_lemma6",
    "evaluate_lemma7",
    "evaluate_prop2",
    "evaluate_g_sup",
    "lyapunov_lp_decay",
    "h_sup_decay",
    "level_set_profile",
    "lemma4_level",
    "check_chebyshev_link",
]

SOLVER_TOL = 1e-4
ALGEBRAIC_TOL = 1e-10
LYAPUNOV_RTOL = 1e-3
H_SUP_SLACK = 1e-2
GAIN = 4.0 * math.sqrt(2.0)


@dataclass(frozen=True)
class Admissibility:
    """Smallness condition ``value < threshold``.

    ``horizon`` is the time window the suprema were taken over (``inf`` for
    all of t >= 0).
    """

    name: str
    value: float
    threshold: float
    horizon: float
    sup_d: float
    sup_f: float

    @property
    def passed(self) -> bool:
        return self.value < self.threshold


def admissibility_theorem1(d: SignalSpec, f: ForcingSpec, params: BurgersParams,
                           horizon: float = math.inf) -> Admissibility:
    """``sup|d| + (4 sqrt2 / mu) sup|f|`` against ``mu / nu``."""
    sd, sf = d.sup(horizon), f.sup(horizon)
    return Admissibility("theorem1", sd + GAIN / params.mu * sf, params.mu / params.nu,
                         horizon, sd, sf)


def admissibility_theorem2(d: SignalSpec, params: BurgersParams,
                           horizon: float = math.inf) -> Admissibility:
    """``sup|d|`` against ``mu / nu``."""
    sd = d.sup(horizon)
    return Admissibility("theorem2", sd, params.mu / params.nu, horizon, sd, 0.0)


@dataclass(frozen=True)
class BoundReport:
    """Per-time comparison of one estimate.

    With ``relative`` set the margin is ``(rhs - lhs) / rhs`` (zero when both
    sides vanish); otherwise it is ``rhs - lhs``.
    """

    name: str
    times: np.ndarray
    lhs: np.ndarray
    rhs: np.ndarray
    tol: float
    admissibility: Admissibility | None = None
    relative: bool = False
    margin: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        arrays = {}
        for key in ("times", "lhs", "rhs"):
            arr = np.array(getattr(self, key), dtype=float)
            arr.flags.writeable = False
            arrays[key] = arr
            object.__setattr__(self, key, arr)
        if not np.all(np.isfinite(arrays["rhs"])):
            raise ValueError(f"{self.name}: bound is not finite")
        lhs, rhs = arrays["lhs"], arrays["rhs"]
        if self.relative:
            with np.errstate(divide="ignore", invalid="ignore"):
                m = np.where(rhs > 0, (rhs - lhs) / np.where(rhs > 0, rhs, 1.0),
                             np.where(lhs <= 0, 0.0, -np.inf))
        else:
            m = rhs - lhs
        m.flags.writeable = False
        object.__setattr__(self, "margin", m)

    @property
    def min_margin(self) -> float:
        return float(np.min(self.margin))

    @property
    def satisfied(self) -> bool:
        return self.min_margin >= -self.tol

    def to_csv(self) -> str:
        lines = ["t,lhs,rhs,margin"]
        lines += [f"{t:.17g},{a:.17g},{b:.17g},{m:.17g}"
                  for t, a, b, m in zip(self.times, self.lhs, self.rhs, self.margin)]
        return "\n".join(lines) + "\n"

    def summary(self) -> str:
        text = (f"{self.name}: min_margin={self.min_margin:.6g} "
                f"{'satisfied' if self.satisfied else 'VIOLATED'} (tol {self.tol:g})")
        adm = self.admissibility
        if adm is not None:
            text += (f"; admissibility {adm.value:.6g} < {adm.threshold:.6g} "
                     f"{'pass' if adm.passed else 'FAIL'}")
        return text


def _l2_squared(traj: Trajectory) -> np.ndarray:
    F = traj.fields
    h = traj.grid.h
    sq = F * F
    return h * (sq.sum(axis=1) - 0.5 * (sq[:, 0] + sq[:, -1]))


def _max_d(traj: Trajectory) -> np.ndarray:
    return traj.max_boundary()


def evaluate_theorem1(traj: Trajectory, u0_l2: float, params: BurgersParams,
                      tol: float = SOLVER_TOL,
                      admissibility: Admissibility | None = None) -> BoundReport:
    t = traj.times
    rhs = (2.0 * u0_l2 ** 2 * np.exp(-params.mu * t) + 4.0 * _max_d(traj) ** 2
           + 128.0 / params.mu ** 2 * traj.forcing_sup_history ** 2)
    return BoundReport("theorem1", t, _l2_squared(traj), rhs, tol, admissibility)


def _check_eps(eps, mu) -> float:
    eps = 0.5 * mu if eps is None else float(eps)
    if not 0.0 < eps < mu:
        raise ValueError(f"eps must lie in (0, mu) = (0, {mu}), got {eps}")
    return eps


def evaluate_theorem2(traj: Trajectory, u0_l2: float, params: BurgersParams,
                      eps: float | None = None, tol: float = SOLVER_TOL,
                      admissibility: Admissibility | None = None) -> BoundReport:
    """``eps`` defaults to ``mu / 2`` and must lie strictly inside (0, mu)."""
    eps = _check_eps(eps, params.mu)
    t = traj.times
    rhs = (2.0 * u0_l2 ** 2 * np.exp(-(params.mu - eps) * t) + 2.0 * _max_d(traj) ** 2
           + 2.0 / eps * traj.forcing_l2_history)
    return BoundReport("theorem2", t, _l2_squared(traj), rhs, tol, admissibility)


def evaluate_lemma4(w_traj: Trajectory, params: BurgersParams, tol: float = SOLVER_TOL,
                    admissibility: Admissibility | None = None) -> BoundReport:
    """Running sup of ``|w|`` (every step) against ``maxd + (4 sqrt2/mu) maxf``."""
    rhs = _max_d(w_traj) + GAIN / params.mu * w_traj.forcing_sup_history
    return BoundReport("lemma4", w_traj.times, w_traj.state_sup_history, rhs, tol,
                       admissibility)


def evaluate_lemma5(v_traj: Trajectory, u0_l2: float, params: BurgersParams,
                    tol: float = SOLVER_TOL,
                    admissibility: Admissibility | None = None) -> BoundReport:
    rhs = u0_l2 ** 2 * np.exp(-params.mu * v_traj.times)
    return BoundReport("lemma5", v_traj.times, _l2_squared(v_traj), rhs, tol, admissibility)


def evaluate_lemma6(w_traj: Trajectory, params: BurgersParams, tol: float = SOLVER_TOL,
                    admissibility: Admissibility | None = None) -> BoundReport:
    """Running sup of ``|w|`` against ``maxd`` for the unforced boundary subsystem."""
    return BoundReport("lemma6", w_traj.times, w_traj.state_sup_history, _max_d(w_traj),
                       tol, admissibility)


def evaluate_lemma7(v_traj: Trajectory, u0_l2: float, params: BurgersParams,
                    eps: float | None = None, tol: float = SOLVER_TOL,
                    admissibility: Admissibility | None = None) -> BoundReport:
    eps = _check_eps(eps, params.mu)
    t = v_traj.times
    rhs = u0_l2 ** 2 * np.exp(-(params.mu - eps) * t) + v_traj.forcing_l2_history / eps
    return BoundReport("lemma7", t, _l2_squared(v_traj), rhs, tol, admissibility)


def evaluate_prop2(u_traj: Trajectory, u0_sup: float, constants: GainConstants,
                   params: ReactionDiffusionParams, tol: float = SOLVER_TOL) -> BoundReport:
    t = u_traj.times
    rhs = (constants.C0 * u0_sup * np.exp(-params.nu * t)
           + constants.C1 * (_max_d(u_traj) + GAIN / params.mu * u_traj.forcing_sup_history))
    return BoundReport("prop2", t, u_traj.sup_norms(), rhs, tol)


def evaluate_g_sup(g_traj: Trajectory, params: ReactionDiffusionParams,
                   tol: float = SOLVER_TOL) -> BoundReport:
    """Running sup of the boundary/forcing part of the target system."""
    rhs = _max_d(g_traj) + GAIN / params.mu * g_traj.forcing_sup_history
    return BoundReport("g_sup", g_traj.times, g_traj.state_sup_history, rhs, tol)


def lyapunov_lp_decay(h_traj: Trajectory, params: ReactionDiffusionParams, p: int,
                      tol: float = LYAPUNOV_RTOL) -> BoundReport:
    """``int |h|^{2p}`` against its exponential envelope; relative margins."""
    if int(p) != p or p < 1:
        raise ValueError(f"p must be an integer >= 1, got {p!r}")
    q = 2 * int(p)
    F = h_traj.fields
    scale = float(np.max(np.abs(F[0]))) or 1.0
    # rescale before the power to keep large exponents in range
    vals = (np.abs(F) / scale) ** q
    hh = h_traj.grid.h
    lhs = hh * (vals.sum(axis=1) - 0.5 * (vals[:, 0] + vals[:, -1])) * scale ** q
    rate = q * (params.nu + 2.0 * params.mu * (q - 1) / p ** 2)
    rhs = lhs[0] * np.exp(-rate * h_traj.times)
    return BoundReport(f"lyapunov_p{int(p)}", h_traj.times, lhs, rhs, tol, relative=True)


def h_sup_decay(h_traj: Trajectory, params: ReactionDiffusionParams,
                slack: float = H_SUP_SLACK, tol: float = ALGEBRAIC_TOL) -> BoundReport:
    sup = h_traj.sup_norms()
    rhs = sup[0] * np.exp(-params.nu * h_traj.times) * (1.0 + slack)
    return BoundReport("h_sup", h_traj.times, sup, rhs, tol)


@dataclass(frozen=True)
class LevelSetProfile:
    """Super-level-set measures of a trajectory.

    ``measures[j, m]`` is ``h`` times the number of interior nodes where the
    field at ``times[j]`` exceeds ``levels[m]``; ``phi`` is its max over
    time. ``energies[j, m]`` is the trapezoid integral of ``((u - k)_+)^2``.
    """

    levels: np.ndarray
    times: np.ndarray
    measures: np.ndarray
    energies: np.ndarray

    @property
    def phi(self) -> np.ndarray:
        return self.measures.max(axis=0)

    def vanishing_level(self) -> float:
        """Smallest tested level with ``phi = 0`` (``inf`` if none)."""
        zero = np.flatnonzero(self.phi == 0.0)
        return float(self.levels[zero[0]]) if zero.size else math.inf


def _level_measures(F: np.ndarray, grid: Grid1D, level: float):
    interior = F[:, 1:-1]
    meas = grid.h * np.count_nonzero(interior > level, axis=1)
    pos = np.maximum(F - level, 0.0) ** 2
    energy = grid.h * (pos.sum(axis=1) - 0.5 * (pos[:, 0] + pos[:, -1]))
    return meas, energy


def level_set_profile(traj: Trajectory, levels) -> LevelSetProfile:
    levels = np.asarray(levels, dtype=float)
    if levels.ndim != 1 or np.any(np.diff(levels) <= 0):
        raise ValueError("levels must be a strictly increasing vector")
    meas = np.empty((len(traj), levels.size))
    energy = np.empty_like(meas)
    for m, k in enumerate(levels):
        meas[:, m], energy[:, m] = _level_measures(traj.fields, traj.grid, k)
    return LevelSetProfile(levels, np.array(traj.times), meas, energy)


def lemma4_level(w_traj: Trajectory, params: BurgersParams) -> float:
    """``max{max d, 0} + (4 sqrt2 / mu) max|f|`` over the whole trajectory."""
    return (max(float(np.max(w_traj.boundary_history)), 0.0)
            + GAIN / params.mu * float(w_traj.forcing_sup_history[-1]))


def check_chebyshev_link(traj: Trajectory, k: float, h_level: float,
                         tol: float = ALGEBRAIC_TOL) -> InequalityMargin:
    """Worst time of ``(h - k)^2 |A_h(s)| <= I_k(s)``."""
    if not h_level > k:
        raise ValueError(f"need h_level > k, got k={k}, h_level={h_level}")
    meas, _ = _level_measures(traj.fields, traj.grid, h_level)
    _, energy = _level_measures(traj.fields, traj.grid, k)
    lhs = (h_level - k) ** 2 * meas
    j = int(np.argmin(energy - lhs))
    return InequalityMargin(float(lhs[j]), float(energy[j]), tol)
