"""Backstepping boundary stabilization of an unstable reaction-diffusion equation.

Plant::

    u_t - mu u_xx + a(x) u = f(x, t),   u(0, t) = 0,   u(1, t) = U(t)

with the feedback ``U(t) = d(t) + int_0^1 k(1, y) u(y, t) dy`` where ``d`` is an
actuation error. The Volterra map ``w = u - int_0^x k(x, y) u(y) dy`` turns the
plant into the target ``w_t - mu w_xx + nu w = f~`` with ``w(1, t) = d(t)``,
and ``u = w + int_0^x l(x, y) w(y) dy`` inverts it.

Kernel equations (``lam = nu - a``)::

    mu (k_xx - k_yy) =  lam(y) k,   k(x, 0) = 0,   k(x, x) = -(1/(2 mu)) int_0^x lam
    mu (l_xx - l_yy) = -lam(x) l,   l(x, 0) = 0,   l(x, x) = -(1/(2 mu)) int_0^x lam

In the characteristic variables ``xi = x + y``, ``eta = x - y`` both become
the fixed-point problem

    G(xi, eta) = -(1/(2 mu)) int_{eta/2}^{xi/2} lam
                 + (1/(4 mu)) int_eta^xi int_0^eta R(tau, s) G(tau, s) ds dtau

with ``R = lam((tau - s)/2)`` for ``k`` and ``R = -lam((tau + s)/2)`` for ``l``.
For polynomial ``a`` every iterate is a bivariate polynomial, so the
successive approximation is carried out exactly on coefficient arrays and the
result is sampled on the grid only once.

Volterra integrals ``int_0^{x_i} k(x_i, y) u(y) dy`` use a sixth-order
composite rule (local six-node Lagrange interpolation per cell); the
trapezoid rule would cap the transform round trip near 1e-5.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .burgers import CompatibilityCondition
from .numerics import Grid1D, solve_tridiagonal
from .signals import ForcingSpec, SignalSpec
from .stepping import CrankNicolson, Subsystem, Trajectory, march

__all__ = [
    "KernelDivergenceError",
    "ReactionDiffusionParams",
    "Kernel",
    "GainConstants",
    "CompatibleProfile",
    "solve_kernel",
    "solve_inverse_kernel",
    "kernel_closed_form_constant",
    "forward_transform",
    "inverse_transform",
    "control_input",
    "transformed_forcing",
    "compatible_initial_condition",
    "check_closed_loop_compatibility",
    "simulate_closed_loop",
    "simulate_open_loop",
    "simulate_target_split",
    "gain_constants",
    "open_loop_operator",
    "target_operator",
    "largest_eigenvalue",
    "target_residual",
]

KERNEL_TOL = 1e-12
KERNEL_MAX_ITER = 200
SERIES_RTOL = 1e-16
INTEGRAL_COMPAT_TOL = 1e-8
DERIVATIVE_COMPAT_TOL = 1e-6


class KernelDivergenceError(RuntimeError):
    """Successive approximation did not settle within the iteration budget."""


@dataclass(frozen=True)
class ReactionDiffusionParams:
    """``mu``, target decay ``nu`` and the affine reaction ``a(x) = a0 + a1 x``."""

    mu: float
    nu: float
    a0: float
    a1: float = 0.0

    def __post_init__(self):
        if not (self.mu > 0 and self.nu > 0):
            raise ValueError(f"need mu > 0 and nu > 0, got mu={self.mu}, nu={self.nu}")
        if not (math.isfinite(self.a0) and math.isfinite(self.a1)):
            raise ValueError("reaction coefficients must be finite")

    def a(self, x):
        return self.a0 + self.a1 * np.asarray(x, dtype=float)

    @property
    def lam(self) -> np.polynomial.Polynomial:
        """``nu - a`` as a polynomial in x."""
        return np.polynomial.Polynomial([self.nu - self.a0, -self.a1])

    @property
    def diagonal_slope_at_one(self) -> float:
        """d/dx of k(x, x) at x = 1, i.e. ``-(nu - a(1)) / (2 mu)``."""
        return -float(self.lam(1.0)) / (2.0 * self.mu)


# ---------------------------------------------------------------------------
# high-order Volterra quadrature

def _lagrange_cell_weights() -> np.ndarray:
    # CELL[p, j] = int_p^{p+1} L_j(s) ds for the Lagrange basis on nodes 0..5
    nodes = np.arange(6.0)
    table = np.empty((5, 6))
    for j in range(6):
        others = np.delete(nodes, j)
        basis = np.polynomial.Polynomial.fromroots(others) / np.prod(nodes[j] - others)
        prim = basis.integ()
        table[:, j] = prim(nodes[1:]) - prim(nodes[:-1])
    return table


_CELL = _lagrange_cell_weights()
_HEAD = np.cumsum(_CELL, axis=0)      # _HEAD[i-1, j] = int_0^i L_j


def _lagrange_at(nodes: np.ndarray, values: np.ndarray, points: np.ndarray) -> np.ndarray:
    out = np.zeros_like(points, dtype=float)
    for j, xj in enumerate(nodes):
        others = np.delete(nodes, j)
        out += values[j] * np.prod((points[:, None] - others) / (xj - others), axis=1)
    return out


def _volterra_matrix(values: np.ndarray, h: float) -> np.ndarray:
    """Matrix M with (M u)_i approximating int_0^{x_i} K(x_i, y) u(y) dy."""
    n = values.shape[0]
    M = np.zeros((n, n))
    if n < 7:
        for i in range(1, n):
            w = np.full(i + 1, h)
            w[0] = w[-1] = 0.5 * h
            M[i, :i + 1] = w * values[i, :i + 1]
        return M
    for i in range(1, 5):
        # too few nodes for the six-point stencil: continue the kernel row past
        # y = x_i by polynomial extrapolation and integrate over [0, x_i]
        row = np.empty(6)
        row[:i + 1] = values[i, :i + 1]
        known = np.arange(i + 1.0)
        row[i + 1:] = _lagrange_at(known, values[i, :i + 1], np.arange(i + 1.0, 6.0))
        M[i, :6] = h * _HEAD[i - 1] * row
    for i in range(5, n):
        w = np.zeros(i + 1)
        for c in range(i):
            s = min(max(c - 2, 0), i - 5)
            w[s:s + 6] += _CELL[c - s]
        M[i, :i + 1] = h * w * values[i, :i + 1]
    return M


@dataclass(frozen=True)
class Kernel:
    """Samples ``values[i, j] = k(x_i, y_j)`` for ``j <= i``; zero above the diagonal."""

    grid: Grid1D
    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        n = self.grid.n_nodes
        if v.shape != (n, n):
            raise ValueError(f"kernel samples must be {n} x {n}, got {v.shape}")
        v = np.tril(v)
        v.flags.writeable = False
        object.__setattr__(self, "values", v)

    @property
    def diagonal(self) -> np.ndarray:
        return np.diag(self.values)

    @property
    def max_abs(self) -> float:
        return float(np.max(np.abs(self.values)))

    @cached_property
    def matrix(self) -> np.ndarray:
        """Quadrature matrix of the Volterra operator ``u -> int_0^x k(x, y) u(y) dy``."""
        m = _volterra_matrix(self.values, self.grid.h)
        m.flags.writeable = False
        return m

    def integrate(self, field) -> np.ndarray:
        return self.matrix @ self.grid.check(field)


# ---------------------------------------------------------------------------
# kernel synthesis

def _poly2_mul(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    out = np.zeros((A.shape[0] + B.shape[0] - 1, A.shape[1] + B.shape[1] - 1))
    for (i, j), b in np.ndenumerate(B):
        if b != 0.0:
            out[i:i + A.shape[0], j:j + A.shape[1]] += b * A
    return out


def _compose_shift(lam: np.polynomial.Polynomial, sign: float) -> np.ndarray:
    """Coefficients of lam((tau + sign*s)/2) as a [tau-power, s-power] array."""
    c = lam.coef
    deg = c.size - 1
    out = np.zeros((deg + 1, deg + 1))
    for m, cm in enumerate(c):
        for r in range(m + 1):
            out[m - r, r] += cm * math.comb(m, r) * sign ** r / 2.0 ** m
    return out


def _integral_operator(P: np.ndarray, mu: float) -> np.ndarray:
    """(1/(4 mu)) int_eta^xi int_0^eta P(tau, s) ds dtau as a [xi, eta] array."""
    A, B = P.shape
    a = np.arange(A)[:, None] + 1.0
    b = np.arange(B)[None, :] + 1.0
    Q = P / (a * b) / (4.0 * mu)
    out = np.zeros((A + 1, A + B + 1))
    out[1:, 1:B + 1] += Q
    # minus eta^(a+b+2) terms from the lower limit of the tau integral
    idx = (np.arange(A)[:, None] + np.arange(B)[None, :] + 2).ravel()
    np.add.at(out[0], idx, -Q.ravel())
    return out


def _pad_add(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    out = np.zeros((max(A.shape[0], B.shape[0]), max(A.shape[1], B.shape[1])))
    out[:A.shape[0], :A.shape[1]] += A
    out[:B.shape[0], :B.shape[1]] += B
    return out


def _successive_approximation(params: ReactionDiffusionParams, inverse: bool,
                              tol: float, max_iter: int) -> np.ndarray:
    lam = params.lam
    mu = params.mu
    F = lam.integ()
    # G0 = -(1/(2 mu)) (F(xi/2) - F(eta/2))
    deg = F.coef.size
    G0 = np.zeros((deg, deg))
    for m, cm in enumerate(F.coef):
        G0[m, 0] -= cm / 2.0 ** m / (2.0 * mu)
        G0[0, m] += cm / 2.0 ** m / (2.0 * mu)
    R = -_compose_shift(lam, +1.0) if inverse else _compose_shift(lam, -1.0)

    G = G0
    delta = G0
    for _ in range(max_iter):
        delta = _integral_operator(_poly2_mul(delta, R), mu)
        # |delta| on the triangle (xi <= 2, eta <= 1) is below this bound
        bound = float(np.sum(np.abs(delta) * 2.0 ** np.arange(delta.shape[0])[:, None]))
        if not math.isfinite(bound):
            break
        G = _pad_add(G, delta)
        if bound < tol:
            return G
    raise KernelDivergenceError(
        f"kernel iteration did not reach {tol:g} within {max_iter} iterations")


def _sample_characteristic(G: np.ndarray, grid: Grid1D) -> np.ndarray:
    n = grid.n_nodes
    h = grid.h
    xi = np.arange(2 * n - 1) * h
    eta = np.arange(n) * h
    E = np.polynomial.polynomial.polyvander(xi, G.shape[0] - 1) @ G \
        @ np.polynomial.polynomial.polyvander(eta, G.shape[1] - 1).T
    i, j = np.tril_indices(n)
    K = np.zeros((n, n))
    K[i, j] = E[i + j, i - j]
    K[:, 0] = 0.0
    return K


def solve_kernel(params: ReactionDiffusionParams, grid: Grid1D,
                 tol: float = KERNEL_TOL, max_iter: int = KERNEL_MAX_ITER) -> Kernel:
    """Forward backstepping kernel k by successive approximation.

    Raises
    ------
    KernelDivergenceError
        If the increments are not below ``tol`` after ``max_iter`` sweeps.
    """
    G = _successive_approximation(params, False, tol, max_iter)
    return Kernel(grid, _sample_characteristic(G, grid))


def solve_inverse_kernel(params: ReactionDiffusionParams, grid: Grid1D,
                         tol: float = KERNEL_TOL, max_iter: int = KERNEL_MAX_ITER) -> Kernel:
    """Inverse kernel l; same diagonal as k, reaction term of opposite sign in x."""
    G = _successive_approximation(params, True, tol, max_iter)
    return Kernel(grid, _sample_characteristic(G, grid))


def _bessel_ratio_series(q: np.ndarray) -> np.ndarray:
    """sum_m q^m / (m! (m+1)!) / 2, i.e. I1(z)/z for q = z^2/4 (J1(z)/z for q = -z^2/4)."""
    term = np.full_like(q, 0.5)
    total = term.copy()
    m = 0
    while True:
        m += 1
        term = term * q / (m * (m + 1))
        total += term
        if np.all(np.abs(term) <= SERIES_RTOL * np.abs(total)):
            return total


def kernel_closed_form_constant(a0: float, nu: float, mu: float, grid: Grid1D,
                                inverse: bool = False) -> Kernel:
    """Closed-form kernel for constant reaction ``a0``.

    ``k(x, y) = -c y I1(z)/z`` with ``c = (nu - a0)/mu`` and
    ``z = sqrt(c (x^2 - y^2))``; ``inverse=True`` gives
    ``l(x, y) = -c y J1(z)/z``. Both are summed from the power series; for
    ``c < 0`` the roles of I1 and J1 swap through the sign of the argument.
    """
    c = (nu - a0) / mu
    x = grid.x
    X, Y = np.meshgrid(x, x, indexing="ij")
    q = (-c if inverse else c) * (X * X - Y * Y) / 4.0
    K = -c * Y * _bessel_ratio_series(np.where(Y <= X, q, 0.0))
    K[:, 0] = 0.0
    return Kernel(grid, np.tril(K))


# ---------------------------------------------------------------------------
# transforms and feedback

def forward_transform(field, k: Kernel, grid: Grid1D) -> np.ndarray:
    """``w = u - int_0^x k(x, y) u(y) dy``."""
    u = grid.check(field)
    return u - k.matrix @ u


def inverse_transform(field, l: Kernel, grid: Grid1D) -> np.ndarray:
    """``u = w + int_0^x l(x, y) w(y) dy``."""
    w = grid.check(field)
    return w + l.matrix @ w


def control_input(u_field, k: Kernel, d_value: float, grid: Grid1D) -> float:
    """Boundary actuation ``d + int_0^1 k(1, y) u(y) dy``."""
    u = grid.check(u_field)
    return float(d_value + k.matrix[-1] @ u)


def transformed_forcing(f: ForcingSpec, k: Kernel, grid: Grid1D):
    """``t -> f - int_0^x k f`` sampled on the grid, or ``None`` for zero forcing."""
    if f.is_zero:
        return None
    x = grid.x
    M = k.matrix
    return lambda t: (lambda v: v - M @ v)(f(x, t))


_BUMP = np.polynomial.Polynomial([0, 0, 0, 1, -3, 3, -1])     # x^3 (1-x)^3
_CORRECTION_POWERS = (1, 3, 5)


@dataclass(frozen=True)
class CompatibleProfile:
    """``u0(x) = A x^3 (1-x)^3 + c1 x + c3 x^3 + c5 x^5``.

    Built by :func:`compatible_initial_condition`. The odd correction keeps
    ``u0(0) = u0''(0) = 0``.
    """

    amplitude: float
    coefficients: tuple[float, float, float]

    @property
    def polynomial(self) -> np.polynomial.Polynomial:
        coef = np.zeros(6)
        for m, c in zip(_CORRECTION_POWERS, self.coefficients):
            coef[m] = c
        return self.amplitude * _BUMP + np.polynomial.Polynomial(coef)

    def derivative(self, x, order: int = 0):
        p = self.polynomial.deriv(order) if order else self.polynomial
        out = p(np.asarray(x, dtype=float))
        return out if np.ndim(out) else float(out)

    def __call__(self, x):
        return self.derivative(x, 0)

    def sample(self, grid: Grid1D) -> np.ndarray:
        return np.asarray(self.polynomial(grid.x), dtype=float)


def _transformed_curvature_at_one(k: Kernel) -> np.ndarray:
    """Row vector giving the one-sided second difference at x = 1 of ``u - int k u``."""
    n = k.grid.n_nodes
    stencil = np.zeros(n)
    stencil[-4:] = np.array([-1.0, 4.0, -5.0, 2.0]) / k.grid.h ** 2
    return stencil - stencil @ k.matrix


def compatible_initial_condition(k: Kernel, params: ReactionDiffusionParams,
                                 amplitude: float = 1.0) -> CompatibleProfile:
    """Bump plus an odd quintic correction that is compatible with the feedback.

    The three correction coefficients solve

    * ``u0(1) = int_0^1 k(1, y) u0(y) dy`` (same quadrature as
      :func:`control_input`, so the discrete identity holds to roundoff);
    * ``u0(1) k_diag'(1) + u0'(1) k(1, 1) = 0`` with ``k_diag(x) = k(x, x)``;
    * the transformed profile ``w0 = u0 - int k u0`` has ``w0''(1) = 0``
      (one-sided difference), so the target problem is compatible to second
      order and starts without a boundary layer at x = 1.

    A least-squares solve covers the degenerate ``k = 0`` case, where the
    slope condition is void.
    """
    grid = k.grid
    x = grid.x
    row = k.matrix[-1]
    curv = _transformed_curvature_at_one(k)
    slope_d = params.diagonal_slope_at_one
    k11 = k.values[-1, -1]
    bump = _BUMP(x)
    A = np.empty((3, 3))
    for col, m in enumerate(_CORRECTION_POWERS):
        q = x ** m
        A[:, col] = [1.0 - row @ q, slope_d + k11 * m, curv @ q]
    rhs = amplitude * np.array([row @ bump, 0.0, -(curv @ bump)])
    coef, *_ = np.linalg.lstsq(A, rhs, rcond=None)
    if np.linalg.norm(A @ coef - rhs) > 1e-9 * max(1.0, np.linalg.norm(rhs)):
        raise ValueError("no compatible correction of this form exists for the kernel")
    return CompatibleProfile(float(amplitude), tuple(float(c) for c in coef))


def _profile_samples(u0, grid: Grid1D) -> np.ndarray:
    if hasattr(u0, "sample"):
        return u0.sample(grid)
    return grid.check(u0).copy()


# fifth-order one-sided first derivative at x = 1, nodes x_n, x_{n-1}, ..., x_{n-5}
_ONE_SIDED_D1 = np.array([137.0 / 60.0, -5.0, 5.0, -10.0 / 3.0, 5.0 / 4.0, -1.0 / 5.0])


def check_closed_loop_compatibility(u0, k: Kernel, params: ReactionDiffusionParams,
                                    d: SignalSpec, f: ForcingSpec) -> list[CompatibilityCondition]:
    """Corner conditions for the feedback system, each with its residual.

    The derivative condition uses analytic ``u0'(1)`` when ``u0`` provides a
    ``derivative`` method and a fifth-order one-sided difference otherwise.
    """
    grid = k.grid
    u = _profile_samples(u0, grid)
    f00, f10 = f(np.array([0.0, 1.0]), 0.0)
    if hasattr(u0, "derivative"):
        du1 = float(u0.derivative(1.0, 1))
    else:
        du1 = float(_ONE_SIDED_D1 @ u[:-7:-1]) / grid.h
    integral = u[-1] - k.matrix[-1] @ u
    slope = u[-1] * params.diagonal_slope_at_one + du1 * k.values[-1, -1]
    rows = [
        ("u0(0)", u[0], 1e-12),
        ("d(0)", d(0.0), 1e-12),
        ("d'(0)", d.derivative(0.0), 1e-12),
        ("f(0,0)", f00, 1e-12),
        ("f(1,0)", f10, 1e-12),
        ("u0(1)=int k(1,y)u0", integral, INTEGRAL_COMPAT_TOL),
        ("kernel slope", slope, DERIVATIVE_COMPAT_TOL),
    ]
    return [CompatibilityCondition(name, abs(float(r)), abs(float(r)) <= tol)
            for name, r, tol in rows]


# ---------------------------------------------------------------------------
# simulation

def _forcing_samples(f: ForcingSpec, grid: Grid1D):
    if f.is_zero:
        return None
    x = grid.x
    return lambda t: f(x, t)


def simulate_closed_loop(params: ReactionDiffusionParams, u0, d: SignalSpec, f: ForcingSpec,
                         t_end: float, dt: float, grid: Grid1D, stride: int = 1,
                         kernel: Kernel | None = None) -> Trajectory:
    """Plant under the backstepping feedback.

    The reaction term is implicit, and so is the feedback: the boundary value
    ``d(t_new) + int k(1, y) u_new(y) dy`` is solved for together with the
    interior of each step.
    """
    k = solve_kernel(params, grid) if kernel is None else kernel
    plant = Subsystem(CrankNicolson(grid, params.mu, dt, params.a(grid.x)),
                      _profile_samples(u0, grid), d, _forcing_samples(f, grid),
                      feedback=np.array(k.matrix[-1]))
    return march([plant], grid, dt, t_end, stride)[0]


def simulate_open_loop(params: ReactionDiffusionParams, u0, d: SignalSpec, f: ForcingSpec,
                       t_end: float, dt: float, grid: Grid1D, stride: int = 1) -> Trajectory:
    """Plant with the feedback switched off: ``u(1, t) = d(t)``."""
    plant = Subsystem(CrankNicolson(grid, params.mu, dt, params.a(grid.x)),
                      _profile_samples(u0, grid), d, _forcing_samples(f, grid))
    return march([plant], grid, dt, t_end, stride)[0]


def simulate_target_split(params: ReactionDiffusionParams, w0, d: SignalSpec, f: ForcingSpec,
                          t_end: float, dt: float, grid: Grid1D, stride: int = 1,
                          kernel: Kernel | None = None) -> tuple[Trajectory, Trajectory]:
    """Target system split into ``g`` (boundary and forcing, zero start) and ``h``.

    ``h`` starts from ``w0`` with homogeneous boundary values. With ``kernel``
    given, ``g`` is driven by the transformed forcing ``f - int k f`` so that
    ``g + h`` tracks the transformed closed-loop state exactly; without it the
    raw ``f`` is used.
    """
    forcing = (transformed_forcing(f, kernel, grid) if kernel is not None
               else _forcing_samples(f, grid))
    zero = np.zeros(grid.n_nodes)
    sys_g = Subsystem(CrankNicolson(grid, params.mu, dt, params.nu), zero, d, forcing)
    sys_h = Subsystem(CrankNicolson(grid, params.mu, dt, params.nu),
                      grid.check(w0).copy(), lambda t: 0.0)
    g, h = march([sys_g, sys_h], grid, dt, t_end, stride)
    return g, h


@dataclass(frozen=True)
class GainConstants:
    C0: float
    C1: float
    max_k: float
    max_l: float


def gain_constants(k: Kernel, l: Kernel) -> GainConstants:
    """``C1 = 1 + max|l|`` and ``C0 = C1 (1 + max|k|)`` over the stored samples."""
    if k.grid != l.grid:
        raise ValueError("kernels live on different grids")
    mk, ml = k.max_abs, l.max_abs
    c1 = 1.0 + ml
    return GainConstants(C0=c1 * (1.0 + mk), C1=c1, max_k=mk, max_l=ml)


# ---------------------------------------------------------------------------
# spectral certificate and residual

def _diffusion_bands(mu: float, grid: Grid1D, reaction) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    m = grid.n_nodes - 2
    r = mu / grid.h ** 2
    c = np.broadcast_to(np.asarray(reaction, dtype=float), (grid.n_nodes,))[1:-1]
    off = np.full(m, r)
    return off, -2.0 * r - c, off.copy()


def open_loop_operator(params: ReactionDiffusionParams, grid: Grid1D):
    """Bands of ``mu D2 - a`` on interior nodes with homogeneous Dirichlet ends."""
    return _diffusion_bands(params.mu, grid, params.a(grid.x))


def target_operator(params: ReactionDiffusionParams, grid: Grid1D):
    """Bands of ``mu D2 - nu`` on interior nodes."""
    return _diffusion_bands(params.mu, grid, params.nu)


def largest_eigenvalue(lower, diag, upper, tol: float = 1e-13,
                       max_iter: int = 1000) -> float:
    """Top eigenvalue of a symmetric tridiagonal matrix by shifted inverse iteration.

    The shift sits one unit above the Gershgorin upper bound so the iteration
    converges to the rightmost eigenvalue.
    """
    lower, diag, upper = (np.asarray(v, dtype=float) for v in (lower, diag, upper))
    n = diag.size
    radius = np.abs(np.r_[0.0, lower[1:]]) + np.abs(np.r_[upper[:-1], 0.0])
    sigma = float(np.max(diag + radius)) + 1.0
    x = np.sin(np.pi * np.arange(1, n + 1) / (n + 1))
    x /= np.linalg.norm(x)

    def apply(v):
        out = diag * v
        out[1:] += lower[1:] * v[:-1]
        out[:-1] += upper[:-1] * v[1:]
        return out

    estimate = float(x @ apply(x))
    for _ in range(max_iter):
        y = solve_tridiagonal(-lower, sigma - diag, -upper, x)
        x = y / np.linalg.norm(y)
        new = float(x @ apply(x))
        if abs(new - estimate) <= tol * max(1.0, abs(new)):
            return new
        estimate = new
    return estimate


def target_residual(u_traj: Trajectory, k: Kernel, params: ReactionDiffusionParams,
                    f: ForcingSpec) -> np.ndarray:
    """Sup-norm of ``w_t - mu w_xx + nu w - f~`` between consecutive snapshots.

    ``w`` is the forward transform of each stored state and ``f~`` the
    transformed forcing. Time derivative and spatial terms are taken at the
    later snapshot, so the residual is first order in the snapshot spacing.
    """
    grid = u_traj.grid
    W = u_traj.fields - u_traj.fields @ k.matrix.T
    h2 = grid.h ** 2
    x = grid.x
    out = np.empty(len(u_traj) - 1)
    M = k.matrix
    for j in range(len(u_traj) - 1):
        dt = u_traj.times[j + 1] - u_traj.times[j]
        w0, w1 = W[j], W[j + 1]
        lap = (w1[:-2] - 2.0 * w1[1:-1] + w1[2:]) / h2
        fv = f(x, u_traj.times[j + 1])
        ft = fv - M @ fv
        r = (w1[1:-1] - w0[1:-1]) / dt - params.mu * lap + params.nu * w1[1:-1] - ft[1:-1]
        out[j] = float(np.max(np.abs(r)))
    return out
