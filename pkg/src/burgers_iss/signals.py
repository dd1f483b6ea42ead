"""Analytic disturbance, forcing and initial-data families.

Every family is built so that the corner compatibility conditions hold
exactly: boundary signals satisfy ``d(0) = d'(0) = 0``, forcings satisfy
``f(0, 0) = f(1, 0) = 0`` and initial profiles vanish together with their
second derivative at both ends (the ``sine`` and ``quartic_bump`` profiles are
kept for exercising the compatibility report; the latter deliberately fails
it).

Random families draw their coefficients from :class:`LCG64`, a 64-bit linear
congruential generator with Knuth's MMIX constants::

    state <- (6364136223846793005 * state + 1442695040888963407) mod 2**64
    uniform = (state >> 11) * 2**-53

seeded with ``state = seed mod 2**64``. The recurrence is fixed so the signals
can be reproduced bit for bit outside Python.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.optimize import minimize, minimize_scalar

__all__ = [
    "LCG64",
    "SignalSpec",
    "ForcingSpec",
    "InitialConditionSpec",
    "SIGNAL_FAMILIES",
    "FORCING_FAMILIES",
    "INITIAL_FAMILIES",
    "SUP_SAMPLES",
]

SIGNAL_FAMILIES = ("zero", "ramped_cosine", "smooth_step", "fourier_random")
FORCING_FAMILIES = ("zero", "separable", "fourier_random")
INITIAL_FAMILIES = ("zero", "bump", "sine_cubed", "sine", "quartic_bump")

#: Number of sample points used when a supremum has no closed form.
SUP_SAMPLES = 10_000


class LCG64:
    """Deterministic 64-bit LCG; see the module docstring for the recurrence."""

    A = 6364136223846793005
    C = 1442695040888963407
    MASK = (1 << 64) - 1

    def __init__(self, seed: int):
        self.state = int(seed) & self.MASK

    def next_u64(self) -> int:
        self.state = (self.A * self.state + self.C) & self.MASK
        return self.state

    def uniform(self) -> float:
        """Float in [0, 1) built from the top 53 bits."""
        return (self.next_u64() >> 11) * 2.0 ** -53


_POLISH_CANDIDATES = 5


def _polished_max_1d(fun, t: np.ndarray) -> float:
    """max of ``|fun|`` over ``[t[0], t[-1]]``: dense samples, then local refinement.

    The best sampled points are refined by a bounded scalar search over their
    neighbouring sample cells, so the result does not undershoot by the
    sampling error.
    """
    vals = np.abs(fun(t))
    best = float(np.max(vals))
    for i in np.argsort(vals)[-_POLISH_CANDIDATES:]:
        lo, hi = t[max(i - 1, 0)], t[min(i + 1, t.size - 1)]
        res = minimize_scalar(lambda s: -abs(float(fun(s))), bounds=(lo, hi),
                              method="bounded", options={"xatol": 1e-12})
        best = max(best, -float(res.fun))
    return best


def _polished_max_2d(fun, t: np.ndarray, x: np.ndarray, vals: np.ndarray) -> float:
    """2-D analogue of :func:`_polished_max_1d` for ``vals = |fun(t, x)|`` on a grid."""
    best = float(np.max(vals))
    flat = np.argsort(vals, axis=None)[-_POLISH_CANDIDATES:]
    for i, j in zip(*np.unravel_index(flat, vals.shape)):
        bounds = [(t[max(i - 1, 0)], t[min(i + 1, t.size - 1)]),
                  (x[max(j - 1, 0)], x[min(j + 1, x.size - 1)])]
        res = minimize(lambda z: -abs(fun(z[0], z[1])), np.array([t[i], x[j]]),
                       method="L-BFGS-B", bounds=bounds,
                       options={"ftol": 1e-15, "gtol": 1e-12})
        best = max(best, -float(res.fun))
    return best


def _check_family(family, allowed, what):
    if family not in allowed:
        raise ValueError(f"unknown {what} family {family!r}; expected one of {allowed}")


@dataclass(frozen=True)
class SignalSpec:
    """Boundary disturbance d(t).

    Families
    --------
    zero
        d = 0.
    ramped_cosine
        d = A (1 - cos(omega t)).
    smooth_step
        d = A t^3 / (1 + t^3).
    fourier_random
        d = sum_j c_j (1 - cos(j omega t)), j = 1..n_terms, with
        c_j = A (2 U_j - 1) / n_terms drawn from ``LCG64(seed)``.
    """

    family: str = "zero"
    amplitude: float = 0.0
    omega: float = 1.0
    n_terms: int = 4
    seed: int = 0

    def __post_init__(self):
        _check_family(self.family, SIGNAL_FAMILIES, "signal")

    @cached_property
    def coefficients(self) -> np.ndarray:
        if self.family != "fourier_random":
            return np.zeros(0)
        rng = LCG64(self.seed)
        return np.array([self.amplitude * (2.0 * rng.uniform() - 1.0) / self.n_terms
                         for _ in range(self.n_terms)])

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        A, w = self.amplitude, self.omega
        if self.family == "zero":
            out = np.zeros_like(t)
        elif self.family == "ramped_cosine":
            out = A * (1.0 - np.cos(w * t))
        elif self.family == "smooth_step":
            t3 = t ** 3
            out = A * t3 / (1.0 + t3)
        else:
            j = np.arange(1, self.n_terms + 1)
            out = np.sum(self.coefficients * (1.0 - np.cos(np.multiply.outer(t, j) * w)),
                         axis=-1)
        return out if out.ndim else float(out)

    def derivative(self, t):
        t = np.asarray(t, dtype=float)
        A, w = self.amplitude, self.omega
        if self.family == "zero":
            out = np.zeros_like(t)
        elif self.family == "ramped_cosine":
            out = A * w * np.sin(w * t)
        elif self.family == "smooth_step":
            out = A * 3.0 * t ** 2 / (1.0 + t ** 3) ** 2
        else:
            j = np.arange(1, self.n_terms + 1)
            out = np.sum(self.coefficients * j * w * np.sin(np.multiply.outer(t, j) * w),
                         axis=-1)
        return out if out.ndim else float(out)

    def sup(self, horizon: float = math.inf) -> float:
        """sup of |d| over [0, horizon]; closed form except for ``fourier_random``.

        The random family is periodic, so an infinite horizon reduces to one
        period, sampled at :data:`SUP_SAMPLES` points; the largest samples are
        then refined by a local bounded search.
        """
        A, w = abs(self.amplitude), abs(self.omega)
        if self.family == "zero" or A == 0.0:
            return 0.0
        if self.family == "ramped_cosine":
            if w == 0.0:
                return 0.0
            theta = w * horizon
            return 2.0 * A if theta >= math.pi else A * (1.0 - math.cos(theta))
        if self.family == "smooth_step":
            if math.isinf(horizon):
                return A
            return A * horizon ** 3 / (1.0 + horizon ** 3)
        if w == 0.0:
            return 0.0
        span = min(horizon, 2.0 * math.pi / w)
        return _polished_max_1d(self, np.linspace(0.0, span, SUP_SAMPLES))


@dataclass(frozen=True)
class ForcingSpec:
    """In-domain disturbance f(x, t).

    Families
    --------
    zero
        f = 0.
    separable
        f = A g(x) q(t) with ``space`` g in {``sine``: sin(k pi x),
        ``bump``: x^3 (1-x)^3} and ``time`` q in {``sin2``: sin^2(omega t),
        ``relax``: 1 - exp(-t)}.
    fourier_random
        f = sum_j c_j sin(k_j pi x) sin^2(j omega t), j = 1..n_terms, with
        c_j = A (2U - 1) / n_terms and k_j = 1 + floor(4U) drawn in that order
        from ``LCG64(seed)``.
    """

    family: str = "zero"
    amplitude: float = 0.0
    space: str = "sine"
    wavenumber: int = 1
    time: str = "sin2"
    omega: float = 1.0
    n_terms: int = 4
    seed: int = 0

    def __post_init__(self):
        _check_family(self.family, FORCING_FAMILIES, "forcing")
        if self.space not in ("sine", "bump"):
            raise ValueError(f"unknown forcing space profile {self.space!r}")
        if self.time not in ("sin2", "relax"):
            raise ValueError(f"unknown forcing time profile {self.time!r}")
        if self.space == "sine" and (int(self.wavenumber) != self.wavenumber
                                     or self.wavenumber < 1):
            raise ValueError("forcing wavenumber must be a positive integer")

    @cached_property
    def atoms(self) -> tuple[np.ndarray, np.ndarray]:
        if self.family != "fourier_random":
            return np.zeros(0), np.zeros(0, dtype=int)
        rng = LCG64(self.seed)
        coef, k = [], []
        for _ in range(self.n_terms):
            coef.append(self.amplitude * (2.0 * rng.uniform() - 1.0) / self.n_terms)
            k.append(1 + int(4.0 * rng.uniform()))
        return np.array(coef), np.array(k)

    @property
    def is_zero(self) -> bool:
        return self.family == "zero" or self.amplitude == 0.0

    def _space(self, x):
        if self.space == "sine":
            return np.sin(self.wavenumber * math.pi * x)
        return x ** 3 * (1.0 - x) ** 3

    def _time(self, t):
        if self.time == "sin2":
            return math.sin(self.omega * t) ** 2
        return -math.expm1(-t)

    def __call__(self, x, t: float) -> np.ndarray:
        """Samples of f(., t) at the points ``x``."""
        x = np.asarray(x, dtype=float)
        if self.family == "zero":
            return np.zeros_like(x)
        if self.family == "separable":
            return self.amplitude * self._time(t) * self._space(x)
        coef, k = self.atoms
        out = np.zeros_like(x)
        for j, (c, kj) in enumerate(zip(coef, k), start=1):
            out += c * math.sin(j * self.omega * t) ** 2 * np.sin(kj * math.pi * x)
        return out

    def sup_bound(self) -> float:
        """Declared bound on sup |f| over [0, 1] x [0, inf)."""
        if self.family == "zero":
            return 0.0
        if self.family == "separable":
            return self.sup()
        return float(np.sum(np.abs(self.atoms[0])))

    def sup(self, horizon: float = math.inf, n_x: int = 201) -> float:
        """sup of |f| over [0, 1] x [0, horizon].

        Separable forcings factor into closed-form sups; the random family is
        sampled on :data:`SUP_SAMPLES` times (one period when the horizon is
        unbounded) times ``n_x`` points in space, and the largest samples are
        refined by a local bounded search.
        """
        A = abs(self.amplitude)
        if self.family == "zero" or A == 0.0:
            return 0.0
        if self.family == "separable":
            gs = 1.0 if self.space == "sine" else 1.0 / 64.0
            if self.time == "sin2":
                theta = abs(self.omega) * horizon
                qs = 1.0 if theta >= math.pi / 2 else math.sin(theta) ** 2
            else:
                qs = 1.0 if math.isinf(horizon) else -math.expm1(-horizon)
            return A * gs * qs
        if self.omega == 0.0:
            return 0.0
        span = min(horizon, math.pi / abs(self.omega))
        t = np.linspace(0.0, span, SUP_SAMPLES)
        x = np.linspace(0.0, 1.0, n_x)
        coef, k = self.atoms
        j = np.arange(1, self.n_terms + 1)
        q = np.sin(np.multiply.outer(t, j) * self.omega) ** 2          # (nt, J)
        g = np.sin(np.multiply.outer(k, x) * math.pi) * coef[:, None]  # (J, nx)
        return _polished_max_2d(lambda s, y: float(self(np.array([y]), s)[0]), t, x,
                                np.abs(q @ g))


_BUMP = np.polynomial.Polynomial([0, 0, 0, 1, -3, 3, -1])    # x^3 (1-x)^3
_QUARTIC = np.polynomial.Polynomial([0, 0, 1, -2, 1])         # x^2 (1-x)^2


@dataclass(frozen=True)
class InitialConditionSpec:
    """Initial profile u0(x).

    Families: ``zero``; ``bump`` A x^3 (1-x)^3; ``sine_cubed`` A sin^3(pi x);
    ``sine`` A sin(pi x); ``quartic_bump`` A x^2 (1-x)^2 (fails u0''(0) = 0).
    """

    family: str = "zero"
    amplitude: float = 0.0

    def __post_init__(self):
        _check_family(self.family, INITIAL_FAMILIES, "initial condition")

    def derivative(self, x, order: int = 0):
        """Exact ``order``-th derivative at ``x``."""
        x = np.asarray(x, dtype=float)
        A = self.amplitude
        if self.family == "zero":
            out = np.zeros_like(x)
        elif self.family in ("bump", "quartic_bump"):
            poly = _BUMP if self.family == "bump" else _QUARTIC
            out = A * poly.deriv(order)(x) if order else A * poly(x)
        else:
            shift = order * math.pi / 2
            if self.family == "sine":
                out = A * math.pi ** order * np.sin(math.pi * x + shift)
            else:
                # sin^3 y = (3 sin y - sin 3y) / 4
                out = 0.25 * A * (3.0 * math.pi ** order * np.sin(math.pi * x + shift)
                                  - (3.0 * math.pi) ** order * np.sin(3.0 * math.pi * x + shift))
        if self.family in ("sine", "sine_cubed"):
            # sin(k pi) is not exactly zero in floating point
            out = np.where(np.isin(x, (0.0, 1.0)) & (order % 2 == 0), 0.0, out)
        return out if out.ndim else float(out)

    def __call__(self, x):
        return self.derivative(x, 0)

    def sample(self, grid) -> np.ndarray:
        return np.asarray(self.derivative(grid.x, 0), dtype=float)
