"""Uniform grids on [0, 1], discrete norms, derivatives and tridiagonal solves.

Fields are plain 1-D ``numpy`` arrays holding nodal samples; a :class:`Grid1D`
describes where the samples live. All quadrature is composite trapezoid.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.linalg import lapack

__all__ = [
    "INF",
    "GridError",
    "OrderError",
    "SingularSystemError",
    "Grid1D",
    "make_grid",
    "trapezoid",
    "l2_norm",
    "lp_norm",
    "derivative",
    "solve_tridiagonal",
    "TridiagonalFactor",
]

#: Distinguished order for the sup-norm, ``lp_norm(u, grid, INF)``.
INF = math.inf


class GridError(ValueError):
    """Invalid grid or field/grid shape mismatch."""


class OrderError(ValueError):
    """Norm order outside [1, inf]."""


class SingularSystemError(ArithmeticError):
    """Zero pivot met while eliminating a tridiagonal system."""


@dataclass(frozen=True)
class Grid1D:
    """Uniform grid x_i = i*h on [0, 1] with ``n_nodes`` nodes."""

    n_nodes: int

    def __post_init__(self):
        if int(self.n_nodes) != self.n_nodes or self.n_nodes < 3:
            raise GridError(f"need an integer n_nodes >= 3, got {self.n_nodes!r}")

    @property
    def h(self) -> float:
        return 1.0 / (self.n_nodes - 1)

    @cached_property
    def x(self) -> np.ndarray:
        x = np.arange(self.n_nodes) * self.h
        x[-1] = 1.0
        x.flags.writeable = False
        return x

    def check(self, field) -> np.ndarray:
        """Return ``field`` as a float array, raising if its length is wrong."""
        values = np.asarray(field, dtype=float)
        if values.shape != (self.n_nodes,):
            raise GridError(
                f"field of shape {values.shape} does not live on a grid of "
                f"{self.n_nodes} nodes"
            )
        return values


def make_grid(n_nodes: int) -> Grid1D:
    """Evenly spaced grid on [0, 1]; ``make_grid(101).h == 0.01``."""
    return Grid1D(n_nodes)


def trapezoid(values, grid: Grid1D) -> float:
    """Composite trapezoid rule for nodal samples on ``grid``."""
    v = grid.check(values)
    return grid.h * (v.sum() - 0.5 * (v[0] + v[-1]))


def l2_norm(field, grid: Grid1D) -> float:
    """Trapezoid approximation of (int_0^1 field^2 dx)^(1/2).

    Scaled by the sup before squaring, so tiny or huge fields neither
    underflow nor overflow.
    """
    return lp_norm(field, grid, 2)


def lp_norm(field, grid: Grid1D, p: float) -> float:
    """L^p norm on [0, 1]; ``p = INF`` gives the max of ``|field|``.

    The integrand is rescaled by the sup before raising to ``p`` so large
    orders do not overflow.
    """
    if not p >= 1:
        raise OrderError(f"norm order must satisfy p >= 1, got {p!r}")
    a = np.abs(grid.check(field))
    top = a.max()
    if p == INF or top == 0.0:
        return float(top)
    return float(top * trapezoid((a / top) ** p, grid) ** (1.0 / p))


def derivative(field, grid: Grid1D) -> np.ndarray:
    """First derivative, second order everywhere.

    Central differences inside, three-point one-sided stencils at x = 0 and
    x = 1, so quadratics are differentiated exactly.
    """
    u = grid.check(field)
    h = grid.h
    du = np.empty_like(u)
    du[1:-1] = (u[2:] - u[:-2]) / (2.0 * h)
    du[0] = (-3.0 * u[0] + 4.0 * u[1] - u[2]) / (2.0 * h)
    du[-1] = (3.0 * u[-1] - 4.0 * u[-2] + u[-3]) / (2.0 * h)
    return du


def solve_tridiagonal(lower, diag, upper, rhs) -> np.ndarray:
    """Thomas algorithm for a tridiagonal system.

    Parameters
    ----------
    lower : array_like, shape (n,)
        Sub-diagonal; ``lower[i]`` multiplies ``x[i-1]`` (``lower[0]`` unused).
    diag : array_like, shape (n,)
        Main diagonal.
    upper : array_like, shape (n,)
        Super-diagonal; ``upper[i]`` multiplies ``x[i+1]`` (``upper[-1]`` unused).
    rhs : array_like, shape (n,)

    Returns
    -------
    ndarray
        Solution ``x``.

    Raises
    ------
    SingularSystemError
        If a pivot vanishes. No pivoting is done, which is safe for the
        diagonally dominant systems produced by the implicit diffusion step.
    """
    a = np.asarray(lower, dtype=float)
    b = np.asarray(diag, dtype=float)
    c = np.asarray(upper, dtype=float)
    d = np.asarray(rhs, dtype=float)
    n = b.shape[0]
    if not (a.shape == c.shape == d.shape == (n,)):
        raise GridError("tridiagonal bands and right-hand side must share one length")

    cp = np.empty(n)
    dp = np.empty(n)
    pivot = b[0]
    if pivot == 0.0:
        raise SingularSystemError("zero pivot in row 0")
    cp[0] = c[0] / pivot
    dp[0] = d[0] / pivot
    for i in range(1, n):
        pivot = b[i] - a[i] * cp[i - 1]
        if pivot == 0.0:
            raise SingularSystemError(f"zero pivot in row {i}")
        cp[i] = c[i] / pivot
        dp[i] = (d[i] - a[i] * dp[i - 1]) / pivot

    x = np.empty(n)
    x[-1] = dp[-1]
    for i in range(n - 2, -1, -1):
        x[i] = dp[i] - cp[i] * x[i + 1]
    return x


class TridiagonalFactor:
    """LU factorization of a fixed tridiagonal matrix for repeated solves.

    Time stepping solves the same implicit system tens of thousands of times,
    so the matrix is factored once with LAPACK ``?gttrf`` and each solve is a
    single ``?gttrs`` call. Band conventions follow :func:`solve_tridiagonal`.
    """

    def __init__(self, lower, diag, upper):
        dl = np.array(lower[1:], dtype=float)
        d = np.array(diag, dtype=float)
        du = np.array(upper[:-1], dtype=float)
        self._lu = lapack.dgttrf(dl, d, du)
        info = self._lu[-1]
        if info != 0:
            raise SingularSystemError(f"tridiagonal factorization failed (info={info})")

    def solve(self, rhs) -> np.ndarray:
        dl, d, du, du2, ipiv, _ = self._lu
        x, info = lapack.dgttrs(dl, d, du, du2, ipiv, rhs)
        if info != 0:
            raise SingularSystemError(f"tridiagonal solve failed (info={info})")
        return x
