"""Crank-Nicolson time marching shared by the Burgers and reaction-diffusion solvers.

Each subsystem solves

    u_t = mu u_xx - c(x) u - N(u, ...) + f(x, t),   u(0) = 0,  u(1) = b(t)

with the linear part (diffusion and reaction ``c``) advanced by Crank-Nicolson,
the nonlinear term ``N`` explicitly and the forcing by the trapezoid rule in
time. Dirichlet values are written into the boundary nodes after each solve.
Several subsystems can be marched in lockstep so that explicit coupling terms
see the other states at the old time level.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .numerics import Grid1D, SingularSystemError, TridiagonalFactor, trapezoid

__all__ = [
    "BLOWUP_GUARD",
    "DivergenceError",
    "StabilityError",
    "Trajectory",
    "CrankNicolson",
    "Subsystem",
    "march",
    "step_count",
    "check_finite",
    "check_cfl",
]

BLOWUP_GUARD = 1e8


class DivergenceError(RuntimeError):
    """The discrete solution left the finite range; ``time`` is when it was seen."""

    def __init__(self, time: float, message: str = ""):
        self.time = float(time)
        super().__init__(message or f"solution diverged at t = {self.time:.6g}")


class StabilityError(ValueError):
    """Time step above the explicit convection limit."""


@dataclass(frozen=True)
class Trajectory:
    """Stored snapshots plus running disturbance histories.

    Histories are accumulated at every time step, whatever the output stride,
    and sampled at the stored times:

    ``boundary_history[j]``
        d(times[j]).
    ``forcing_sup_history[j]``
        running max of |f| over grid nodes and steps up to ``times[j]``.
    ``forcing_l2_history[j]``
        trapezoid-in-time integral of ||f(., s)||^2 up to ``times[j]``.
    ``state_sup_history[j]``
        running max of |u| over grid nodes and steps up to ``times[j]``.
    """

    grid: Grid1D
    times: np.ndarray
    fields: np.ndarray
    boundary_history: np.ndarray
    forcing_sup_history: np.ndarray
    forcing_l2_history: np.ndarray
    state_sup_history: np.ndarray

    def __post_init__(self):
        for name in ("times", "fields", "boundary_history", "forcing_sup_history",
                     "forcing_l2_history", "state_sup_history"):
            arr = np.asarray(getattr(self, name), dtype=float)
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)
        if self.times[0] != 0.0 or np.any(np.diff(self.times) <= 0):
            raise ValueError("trajectory times must start at 0 and increase strictly")
        if self.fields.shape != (self.times.size, self.grid.n_nodes):
            raise ValueError("fields must have one row per time and one column per node")

    def __len__(self) -> int:
        return self.times.size

    @property
    def initial(self) -> np.ndarray:
        return self.fields[0]

    @property
    def final(self) -> np.ndarray:
        return self.fields[-1]

    def sup_norms(self) -> np.ndarray:
        return np.max(np.abs(self.fields), axis=1)

    def max_boundary(self) -> np.ndarray:
        """Running max of |d| over the stored samples."""
        return np.maximum.accumulate(np.abs(self.boundary_history))

    def __add__(self, other: "Trajectory") -> "Trajectory":
        # only the fields are meaningful for a sum; histories are taken from self
        if not np.array_equal(self.times, other.times):
            raise ValueError("trajectories are sampled at different times")
        return Trajectory(self.grid, self.times, self.fields + other.fields,
                          self.boundary_history, self.forcing_sup_history,
                          self.forcing_l2_history,
                          np.maximum(self.state_sup_history, other.state_sup_history))


class CrankNicolson:
    """Factored Crank-Nicolson operator for the interior nodes.

    Parameters
    ----------
    grid : Grid1D
    mu : float
        Diffusion coefficient.
    dt : float
        Time step.
    reaction : float or array_like, optional
        Coefficient ``c(x)`` of the implicit linear term ``-c u``; an array is
        sampled at all grid nodes.
    """

    def __init__(self, grid: Grid1D, mu: float, dt: float, reaction=0.0):
        self.grid = grid
        self.mu = float(mu)
        self.dt = float(dt)
        n = grid.n_nodes
        c = np.broadcast_to(np.asarray(reaction, dtype=float), (n,))[1:-1].copy()
        self.c = c
        self.r = self.mu * self.dt / grid.h ** 2
        m = n - 2
        off = np.full(m, -0.5 * self.r)
        self._factor = TridiagonalFactor(off, 1.0 + self.r + 0.5 * self.dt * c, off)
        self._unit_response = None

    def apply_explicit(self, u: np.ndarray) -> np.ndarray:
        """(I + dt/2 L) u on interior nodes, boundary values taken from ``u``."""
        r = self.r
        ui = u[1:-1]
        return ui + 0.5 * r * (u[:-2] - 2.0 * ui + u[2:]) - 0.5 * self.dt * self.c * ui

    def advance(self, u, extra, right_next: float, left_next: float = 0.0) -> np.ndarray:
        """One step; ``extra`` is everything explicit on the interior nodes."""
        rhs = self.apply_explicit(u) + extra
        rhs[0] += 0.5 * self.r * left_next
        rhs[-1] += 0.5 * self.r * right_next
        new = np.empty_like(u)
        new[1:-1] = self._factor.solve(rhs)
        new[0] = left_next
        new[-1] = right_next
        return new

    def advance_feedback(self, u, extra, offset: float, weights) -> np.ndarray:
        """One step whose right boundary value depends on the new state.

        The new boundary value is ``offset + weights @ u_new``; the rank-one
        coupling with the interior solve is eliminated exactly.
        """
        base = self._factor.solve(self.apply_explicit(u) + extra)
        if self._unit_response is None:
            unit = np.zeros(base.size)
            unit[-1] = 0.5 * self.r
            self._unit_response = self._factor.solve(unit)
        resp = self._unit_response
        wi = weights[1:-1]
        denom = 1.0 - weights[-1] - wi @ resp
        if denom == 0.0:
            raise SingularSystemError("feedback boundary condition is singular")
        b = (offset + wi @ base) / denom
        new = np.empty_like(u)
        new[1:-1] = base + b * resp
        new[0] = 0.0
        new[-1] = b
        return new


@dataclass
class Subsystem:
    """One equation marched by :func:`march`.

    ``explicit(states)`` returns the explicit right-hand side on interior nodes
    (already multiplied by ``dt``) given the list of all old states, or
    ``None`` for a purely linear system. ``boundary(t, states)`` gives the
    Dirichlet value at x = 1 for the new time; it defaults to
    ``disturbance(t)``. ``disturbance`` and ``forcing`` feed the recorded
    histories; ``forcing(t)`` returns nodal samples or ``None`` for zero.
    ``speed(states, b_next)`` bounds the convective velocity for the CFL check.
    With ``feedback`` set, the boundary value becomes
    ``b_next + feedback @ u_new`` and is solved for together with the interior.
    """

    stepper: CrankNicolson
    initial: np.ndarray
    disturbance: Callable[[float], float]
    forcing: Optional[Callable[[float], np.ndarray]] = None
    explicit: Optional[Callable[[Sequence[np.ndarray]], np.ndarray]] = None
    boundary: Optional[Callable[[float, Sequence[np.ndarray]], float]] = None
    speed: Optional[Callable[[Sequence[np.ndarray], float], float]] = None
    feedback: Optional[np.ndarray] = None


def step_count(t_end: float, dt: float) -> int:
    if not (t_end > 0 and dt > 0):
        raise ValueError(f"need t_end > 0 and dt > 0, got t_end={t_end}, dt={dt}")
    n = int(round(t_end / dt))
    if n < 1 or abs(n * dt - t_end) > 1e-9 * max(1.0, t_end):
        raise ValueError(f"t_end={t_end} is not a whole number of steps dt={dt}")
    return n


class _Recorder:
    def __init__(self, grid, n_steps, stride, dt, initial, d0, f0):
        self.grid = grid
        self.stride = stride
        self.dt = dt
        n_out = n_steps // stride + 1 + (n_steps % stride != 0)
        self.times = np.empty(n_out)
        self.fields = np.empty((n_out, grid.n_nodes))
        self.d = np.empty(n_out)
        self.fsup = np.empty(n_out)
        self.fl2 = np.empty(n_out)
        self.usup = np.empty(n_out)
        self.j = 0
        self.run_fsup = 0.0
        self.run_fl2 = 0.0
        self.run_usup = 0.0
        self.prev_f2 = 0.0
        self._update(0, 0.0, initial, d0, f0, first=True)

    def _update(self, n, t, u, d, f, first=False, last=False):
        f2 = 0.0
        if f is not None:
            self.run_fsup = max(self.run_fsup, float(np.max(np.abs(f))))
            f2 = trapezoid(f * f, self.grid)
        if not first:
            self.run_fl2 += 0.5 * self.dt * (self.prev_f2 + f2)
        self.prev_f2 = f2
        self.run_usup = max(self.run_usup, float(np.max(np.abs(u))))
        if n % self.stride == 0 or last:
            j = self.j
            self.times[j] = t
            self.fields[j] = u
            self.d[j] = d
            self.fsup[j] = self.run_fsup
            self.fl2[j] = self.run_fl2
            self.usup[j] = self.run_usup
            self.j += 1

    def trajectory(self) -> Trajectory:
        j = self.j
        return Trajectory(self.grid, self.times[:j], self.fields[:j], self.d[:j],
                          self.fsup[:j], self.fl2[:j], self.usup[:j])


def check_finite(u, t: float) -> None:
    """Raise :class:`DivergenceError` if ``u`` is non-finite or above the guard."""
    top = np.max(np.abs(u))
    if not (np.isfinite(top) and top <= BLOWUP_GUARD):
        raise DivergenceError(t)


def check_cfl(dt: float, h: float, speed: float, t: float) -> None:
    """Enforce ``dt <= 0.5 h / (speed + 1)``; ``speed`` includes the boundary value."""
    limit = 0.5 * h / (speed + 1.0)
    if dt > limit:
        raise StabilityError(f"dt={dt:.3g} exceeds the convective limit {limit:.3g} "
                             f"at t={t:.6g}")


def march(systems: Sequence[Subsystem], grid: Grid1D, dt: float, t_end: float,
          stride: int = 1) -> list[Trajectory]:
    """March coupled subsystems in lockstep and return one trajectory each."""
    if int(stride) != stride or stride < 1:
        raise ValueError(f"output stride must be a positive integer, got {stride!r}")
    n_steps = step_count(t_end, dt)
    h = grid.h
    states = [np.array(s.initial, dtype=float) for s in systems]
    for u in states:
        grid.check(u)
        check_finite(u, 0.0)
    forcings = [s.forcing(0.0) if s.forcing else None for s in systems]
    recorders = [_Recorder(grid, n_steps, stride, dt, u, s.disturbance(0.0), f)
                 for s, u, f in zip(systems, states, forcings)]

    for n in range(n_steps):
        t_next = (n + 1) * dt
        new_states, new_forcings, disturbances = [], [], []
        for s, u, f_now in zip(systems, states, forcings):
            d_next = s.disturbance(t_next)
            b_next = s.boundary(t_next, states) if s.boundary else d_next
            if s.speed is not None:
                check_cfl(dt, h, s.speed(states, b_next), n * dt)
            f_next = s.forcing(t_next) if s.forcing else None
            extra = s.explicit(states) if s.explicit else np.zeros(grid.n_nodes - 2)
            if f_now is not None or f_next is not None:
                fa = f_now if f_now is not None else 0.0
                fb = f_next if f_next is not None else 0.0
                extra = extra + 0.5 * dt * (fa + fb)[1:-1]
            if s.feedback is None:
                new = s.stepper.advance(u, extra, b_next)
            else:
                new = s.stepper.advance_feedback(u, extra, b_next, s.feedback)
            check_finite(new, t_next)
            new_states.append(new)
            new_forcings.append(f_next)
            disturbances.append(d_next)
        states, forcings = new_states, new_forcings
        last = n + 1 == n_steps
        for rec, u, d, f in zip(recorders, states, disturbances, forcings):
            rec._update(n + 1, t_next, u, d, f, last=last)

    return [rec.trajectory() for rec in recorders]
