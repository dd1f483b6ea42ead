"""Numerical checks of the functional inequalities used in the ISS proofs.

* :func:`degiorgi_l0` - jump size of the De Giorgi iteration lemma: if a
  nonnegative nonincreasing ``phi`` obeys
  ``phi(h) <= (M / (h - k))**alpha * phi(k)**beta`` for all ``h > k >= k0``,
  then ``phi(k0 + l0) = 0``.
* :func:`check_embedding` - the L^p bound
  ``||u||_{L^p(a,b)} <= (b-a)^{1/p} (2/(b-a) ||u||^2 + (b-a) ||u_x||^2)^{1/2}``.
* :func:`check_pointwise` - ``u(c)^2 <= 2/(b-a) ||u||^2 + (b-a) ||u_x||^2``.
* :func:`check_poincare_dirichlet` - ``||v||^2 <= ||v_x||^2 / 2`` when
  ``v(0) = v(1) = 0``.

A field on ``[a, b]`` is given by its samples on the unit grid through the
affine map ``x = a + (b - a) s``; norms on ``[a, b]`` are obtained from the
unit-interval norms by the change of variables.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .numerics import INF, Grid1D, derivative, l2_norm, lp_norm

__all__ = [
    "DEFAULT_TOL",
    "HypothesisError",
    "IntervalError",
    "PointError",
    "BoundaryError",
    "DeGiorgiHypothesis",
    "InequalityMargin",
    "degiorgi_l0",
    "check_embedding",
    "check_pointwise",
    "check_poincare_dirichlet",
    "random_trig_polynomial",
    "random_sine_series",
]

DEFAULT_TOL = 1e-6
BOUNDARY_ZERO_TOL = 1e-12


class HypothesisError(ValueError):
    """De Giorgi lemma constants violate M > 0, alpha > 0, beta > 1."""


class IntervalError(ValueError):
    """Interval with b <= a."""


class PointError(ValueError):
    """Evaluation point outside [a, b]."""


class BoundaryError(ValueError):
    """Field does not vanish at both ends."""


@dataclass(frozen=True)
class DeGiorgiHypothesis:
    M: float
    alpha: float
    beta: float
    k0: float
    phi_k0: float

    def __post_init__(self):
        if not (self.M > 0 and self.alpha > 0 and self.beta > 1):
            raise HypothesisError(
                f"need M > 0, alpha > 0, beta > 1; got M={self.M}, "
                f"alpha={self.alpha}, beta={self.beta}"
            )
        if not self.phi_k0 >= 0:
            raise HypothesisError(f"phi(k0) must be nonnegative, got {self.phi_k0}")


@dataclass(frozen=True)
class InequalityMargin:
    lhs: float
    rhs: float
    tol: float = DEFAULT_TOL

    @property
    def margin(self) -> float:
        return self.rhs - self.lhs

    @property
    def satisfied(self) -> bool:
        return self.margin >= -self.tol


def degiorgi_l0(hyp: DeGiorgiHypothesis) -> float:
    """``l0 = 2**(beta/(beta-1)) * M * phi(k0)**((beta-1)/alpha)``.

    Returns ``inf`` when the value exceeds the float range.
    """
    b = hyp.beta
    try:
        return 2.0 ** (b / (b - 1.0)) * hyp.M * hyp.phi_k0 ** ((b - 1.0) / hyp.alpha)
    except OverflowError:
        return math.inf


def _check_interval(a: float, b: float) -> float:
    if not b > a:
        raise IntervalError(f"need b > a, got a={a}, b={b}")
    return b - a


def _energy(u: np.ndarray, grid: Grid1D, length: float) -> float:
    # 2/(b-a) ||u||^2_{L2(a,b)} + (b-a) ||u_x||^2_{L2(a,b)} after the affine map
    l2 = l2_norm(u, grid) ** 2
    dl2 = l2_norm(derivative(u, grid), grid) ** 2
    return 2.0 / length * (length * l2) + length * (dl2 / length)


def check_embedding(field, grid: Grid1D, a: float, b: float, p: float,
                    tol: float = DEFAULT_TOL) -> InequalityMargin:
    """L^p norm on ``[a, b]`` against the H^1-type bound."""
    length = _check_interval(a, b)
    u = grid.check(field)
    scale = 1.0 if p == INF else length ** (1.0 / p)
    lhs = scale * lp_norm(u, grid, p)
    rhs = scale * math.sqrt(_energy(u, grid, length))
    return InequalityMargin(lhs, rhs, tol)


def check_pointwise(field, grid: Grid1D, a: float, b: float, c: float,
                    tol: float = DEFAULT_TOL) -> InequalityMargin:
    """``u(c)^2`` (linear interpolation) against ``2/(b-a)||u||^2 + (b-a)||u_x||^2``."""
    length = _check_interval(a, b)
    if not a <= c <= b:
        raise PointError(f"c={c} lies outside [{a}, {b}]")
    u = grid.check(field)
    uc = float(np.interp((c - a) / length, grid.x, u))
    return InequalityMargin(uc * uc, _energy(u, grid, length), tol)


def check_poincare_dirichlet(field, grid: Grid1D,
                             tol: float = DEFAULT_TOL) -> InequalityMargin:
    """``||v||^2 <= ||v_x||^2 / 2`` for ``v`` vanishing at 0 and 1."""
    v = grid.check(field)
    if abs(v[0]) > BOUNDARY_ZERO_TOL or abs(v[-1]) > BOUNDARY_ZERO_TOL:
        raise BoundaryError(
            f"field must vanish at both ends, got v(0)={v[0]:.3e}, v(1)={v[-1]:.3e}"
        )
    lhs = l2_norm(v, grid) ** 2
    rhs = 0.5 * l2_norm(derivative(v, grid), grid) ** 2
    return InequalityMargin(lhs, rhs, tol)


def random_trig_polynomial(rng: np.random.Generator, grid: Grid1D,
                           degree: int = 8) -> np.ndarray:
    """``c0 + sum_k (a_k cos(k pi x) + b_k sin(k pi x))`` with coefficients in [-1, 1]."""
    x = grid.x
    u = np.full_like(x, rng.uniform(-1, 1))
    for k in range(1, degree + 1):
        a, b = rng.uniform(-1, 1, size=2)
        u += a * np.cos(k * math.pi * x) + b * np.sin(k * math.pi * x)
    return u


def random_sine_series(rng: np.random.Generator, grid: Grid1D,
                       degree: int = 8) -> np.ndarray:
    """Sine series with coefficients in [-1, 1]; exactly zero at both ends."""
    x = grid.x
    u = np.zeros_like(x)
    for k in range(1, degree + 1):
        u += rng.uniform(-1, 1) * np.sin(k * math.pi * x)
    u[0] = u[-1] = 0.0
    return u
