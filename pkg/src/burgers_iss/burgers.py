"""Finite-difference solver for the disturbed viscous Burgers equation.

    u_t - mu u_xx + nu u u_x = f(x, t)   on (0, 1)
    u(0, t) = 0,  u(1, t) = d(t),  u(x, 0) = u0(x)

Diffusion is advanced by Crank-Nicolson, the convective flux ``nu (u^2/2)_x``
explicitly with central differences. The two splittings u = w + v used in the
ISS argument are available as :func:`simulate_splitting_A` (forcing in the
boundary-driven part ``w``) and :func:`simulate_splitting_B` (forcing in the
initial-data part ``v``). In both, ``v`` carries the coupling ``nu (w v)_x``,
which is discretized in product form ``nu (w v_x + v w_x)`` so that ``w + v``
is a genuinely different discretization of the same PDE as ``u``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .numerics import Grid1D
from .signals import ForcingSpec, InitialConditionSpec, SignalSpec
from .stepping import CrankNicolson, Subsystem, Trajectory, check_cfl, check_finite, march

__all__ = [
    "BurgersParams",
    "CompatibilityCondition",
    "check_compatibility",
    "step",
    "simulate",
    "simulate_splitting_A",
    "simulate_splitting_B",
    "DEFAULT_N_NODES",
    "DEFAULT_DT",
    "DEFAULT_T_END",
]

DEFAULT_N_NODES = 401
DEFAULT_DT = 2.5e-5
DEFAULT_T_END = 2.0
COMPATIBILITY_TOL = 1e-12


@dataclass(frozen=True)
class BurgersParams:
    mu: float
    nu: float

    def __post_init__(self):
        if not (self.mu > 0 and self.nu > 0):
            raise ValueError(f"need mu > 0 and nu > 0, got mu={self.mu}, nu={self.nu}")


@dataclass(frozen=True)
class CompatibilityCondition:
    name: str
    residual: float
    passed: bool


def check_compatibility(u0: InitialConditionSpec, d: SignalSpec, f: ForcingSpec,
                        tol: float = COMPATIBILITY_TOL) -> list[CompatibilityCondition]:
    """Evaluate the eight corner conditions analytically.

    u0(0), u0''(0), u0(1), u0''(1), d(0), d'(0), f(0, 0) and f(1, 0) must all
    vanish; each is reported with its residual.
    """
    f00, f10 = f(np.array([0.0, 1.0]), 0.0)
    values = [
        ("u0(0)", u0.derivative(0.0, 0)),
        ("u0''(0)", u0.derivative(0.0, 2)),
        ("u0(1)", u0.derivative(1.0, 0)),
        ("u0''(1)", u0.derivative(1.0, 2)),
        ("d(0)", d(0.0)),
        ("d'(0)", d.derivative(0.0)),
        ("f(0,0)", f00),
        ("f(1,0)", f10),
    ]
    return [CompatibilityCondition(name, abs(float(r)), abs(float(r)) <= tol)
            for name, r in values]


def _initial(u0, grid: Grid1D) -> np.ndarray:
    if isinstance(u0, InitialConditionSpec):
        return u0.sample(grid)
    return grid.check(u0).copy()


def _flux_difference(u: np.ndarray, h: float) -> np.ndarray:
    """Central difference of u^2/2 on interior nodes."""
    q = 0.5 * u * u
    return (q[2:] - q[:-2]) / (2.0 * h)


def _product_difference(w: np.ndarray, v: np.ndarray, h: float) -> np.ndarray:
    """(w v)_x on interior nodes as w v_x + v w_x with central differences."""
    return (w[1:-1] * (v[2:] - v[:-2]) + v[1:-1] * (w[2:] - w[:-2])) / (2.0 * h)


def _forcing(f: ForcingSpec, grid: Grid1D):
    if f.is_zero:
        return None
    x = grid.x
    return lambda t: f(x, t)


def _sup(u: np.ndarray) -> float:
    return float(np.max(np.abs(u)))


def step(state, params: BurgersParams, f_now, f_next, d_next: float, dt: float,
         grid: Grid1D, convection: bool = True, t_next: float | None = None) -> np.ndarray:
    """Advance one Burgers step of size ``dt``.

    ``f_now`` and ``f_next`` are forcing samples at the old and new times and
    ``t_next`` (default ``dt``) only labels a divergence error.
    ``convection=False`` drops the nonlinear term (heat-equation test hook).
    :func:`simulate` reuses one factored implicit matrix for all its steps.
    """
    u = grid.check(state)
    f_now, f_next = grid.check(f_now), grid.check(f_next)
    t_next = dt if t_next is None else t_next
    extra = 0.5 * dt * (f_now + f_next)[1:-1]
    if convection:
        check_cfl(dt, grid.h, params.nu * _sup(u) + params.nu * abs(d_next), t_next - dt)
        extra -= dt * params.nu * _flux_difference(u, grid.h)
    new = CrankNicolson(grid, params.mu, dt).advance(u, extra, d_next)
    check_finite(new, t_next)
    return new


def _burgers_system(params, grid, dt, initial, disturbance, forcing, convection=True):
    h, nu = grid.h, params.nu
    if not convection:
        return Subsystem(CrankNicolson(grid, params.mu, dt), initial, disturbance, forcing)
    return Subsystem(CrankNicolson(grid, params.mu, dt), initial, disturbance, forcing,
                     explicit=lambda s: -dt * nu * _flux_difference(s[0], h),
                     speed=lambda s, b: nu * (_sup(s[0]) + abs(b)))


def simulate(params: BurgersParams, u0, d: SignalSpec, f: ForcingSpec, t_end: float,
             dt: float, grid: Grid1D, stride: int = 1,
             convection: bool = True) -> Trajectory:
    """Solve the full disturbed Burgers problem from ``u0`` up to ``t_end``.

    ``u0`` is an :class:`InitialConditionSpec` or an array of nodal values.
    Raises :class:`~burgers_iss.stepping.DivergenceError` on blow-up and
    :class:`~burgers_iss.stepping.StabilityError` if ``dt`` breaks the
    convective limit ``0.5 h / (nu (max|u| + |d| + 1))``.
    """
    sys_u = _burgers_system(params, grid, dt, _initial(u0, grid), d,
                            _forcing(f, grid), convection)
    return march([sys_u], grid, dt, t_end, stride)[0]


def _split(params, u0, d, f_w, f_v, t_end, dt, grid, stride):
    h, nu = grid.h, params.nu
    zero = np.zeros(grid.n_nodes)

    def explicit_w(states):
        return -dt * nu * _flux_difference(states[0], h)

    def explicit_v(states):
        w, v = states
        return -dt * nu * (_flux_difference(v, h) + _product_difference(w, v, h))

    sys_w = Subsystem(CrankNicolson(grid, params.mu, dt), zero, d, _forcing(f_w, grid),
                      explicit_w, speed=lambda s, b: nu * (_sup(s[0]) + abs(b)))
    sys_v = Subsystem(CrankNicolson(grid, params.mu, dt), _initial(u0, grid),
                      lambda t: 0.0, _forcing(f_v, grid), explicit_v,
                      speed=lambda s, b: nu * (_sup(s[1]) + _sup(s[0]) + abs(b)))
    w, v = march([sys_w, sys_v], grid, dt, t_end, stride)
    return w, v


def simulate_splitting_A(params: BurgersParams, u0, d: SignalSpec, f: ForcingSpec,
                         t_end: float, dt: float, grid: Grid1D,
                         stride: int = 1) -> tuple[Trajectory, Trajectory]:
    """Split with the forcing in the boundary-driven part.

    ``w`` solves the forced Burgers problem with boundary ``d`` from zero;
    ``v`` solves ``v_t - mu v_xx + nu v v_x + nu (w v)_x = 0`` with zero
    boundary values from ``u0``.
    """
    return _split(params, u0, d, f, ForcingSpec(), t_end, dt, grid, stride)


def simulate_splitting_B(params: BurgersParams, u0, d: SignalSpec, f: ForcingSpec,
                         t_end: float, dt: float, grid: Grid1D,
                         stride: int = 1) -> tuple[Trajectory, Trajectory]:
    """Split with the forcing in the initial-data part.

    ``w`` solves the unforced Burgers problem with boundary ``d`` from zero;
    ``v`` carries ``f`` together with the coupling term and ``u0``.
    """
    return _split(params, u0, d, ForcingSpec(), f, t_end, dt, grid, stride)
