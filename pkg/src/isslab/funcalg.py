"""Comparison functions (class K, K-infinity, KL) and their algebra.

Class membership is only ever checked on finite grids. A passing check
means "no counterexample among the samples", nothing more.
"""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass, replace
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import DomainEdge, EmptyGrid, NoBracket, NonMonotone
from .report import VerificationReport, Violation

BRACKET_CAP = 2.0**60
ZERO_TOL = 1e-12


class Kind(str, enum.Enum):
    K = "K"
    KINF = "Kinf"
    KL_SLICE = "KL-slice"
    POSITIVE_DEFINITE = "positive-definite"
    GENERAL = "general"


_INCREASING = (Kind.K, Kind.KINF)


@dataclass(frozen=True)
class ComparisonFunction:
    """A scalar map tagged with its comparison class.

    ``fn`` should accept floats and, ideally, numpy arrays. ``domain`` is the
    right end of the interval ``[0, domain]`` the function is meant for.
    """

    fn: Callable
    kind: Kind = Kind.K
    inverse: Optional[Callable] = None
    derivative: Optional[Callable] = None
    domain: float = math.inf
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "kind", Kind(self.kind))

    def __call__(self, s):
        return self.fn(s)

    def __repr__(self):
        label = self.name or getattr(self.fn, "__name__", "f")
        return f"ComparisonFunction({label}, kind={self.kind.value})"


@dataclass(frozen=True)
class ClassKLFunction:
    """beta(s, t): class K in s for each t, decaying to zero in t."""

    fn: Callable
    name: str = ""

    def __call__(self, s, t):
        return self.fn(s, t)


# -- constructors ---------------------------------------------------------

def identity() -> ComparisonFunction:
    return ComparisonFunction(lambda s: s, Kind.KINF, inverse=lambda y: y,
                              derivative=lambda s: 0.0 * np.asarray(s, dtype=float) + 1.0, name="s")


def linear(c: float) -> ComparisonFunction:
    if c <= 0:
        raise ValueError("linear gain needs a positive slope")
    return ComparisonFunction(lambda s: c * s, Kind.KINF, inverse=lambda y: y / c,
                              derivative=lambda s: 0.0 * np.asarray(s, dtype=float) + c, name=f"{c!r}*s")


def power(p: float, c: float = 1.0) -> ComparisonFunction:
    """``c * s**p`` for ``s >= 0``; odd extension below zero."""
    if p <= 0 or c <= 0:
        raise ValueError("power gain needs positive exponent and coefficient")

    def fn(s):
        s = np.asarray(s, dtype=float)
        out = c * np.sign(s) * np.abs(s) ** p
        return out if out.ndim else float(out)

    def inv(y):
        y = np.asarray(y, dtype=float)
        out = np.sign(y) * (np.abs(y) / c) ** (1.0 / p)
        return out if out.ndim else float(out)

    def der(s):
        s = np.asarray(s, dtype=float)
        out = c * p * np.abs(s) ** (p - 1.0)
        return out if out.ndim else float(out)

    label = f"s^{p!r}" if c == 1.0 else f"{c!r}*s^{p!r}"
    return ComparisonFunction(fn, Kind.KINF, inverse=inv, derivative=der, name=label)


def cube_root() -> ComparisonFunction:
    """Real signed cube root, the equilibrium map of ``x' = -x^3 + u``."""
    def der(s):
        s = np.asarray(s, dtype=float)
        with np.errstate(divide="ignore"):
            out = (1.0 / 3.0) * np.abs(s) ** (-2.0 / 3.0)
        return out if out.ndim else float(out)

    return ComparisonFunction(np.cbrt, Kind.KINF, inverse=lambda y: np.asarray(y, dtype=float) ** 3,
                              derivative=der, name="cbrt")


def kl_exponential(scale: float = 1.0, rate: float = 1.0) -> ClassKLFunction:
    """``scale * s * exp(-rate * t)``."""
    return ClassKLFunction(lambda s, t: scale * s * np.exp(-rate * np.asarray(t, dtype=float)),
                           name=f"{scale!r}*s*exp(-{rate!r}t)")


# -- algebra --------------------------------------------------------------

def compose(outer: ComparisonFunction, inner: ComparisonFunction) -> ComparisonFunction:
    """``outer o inner``. Inverse and derivative carry over when both sides have them."""
    if outer.kind in _INCREASING and inner.kind in _INCREASING:
        kind = Kind.KINF if outer.kind is Kind.KINF and inner.kind is Kind.KINF else Kind.K
    else:
        kind = Kind.GENERAL

    inverse = None
    if outer.inverse is not None and inner.inverse is not None:
        inverse = lambda y: inner.inverse(outer.inverse(y))  # noqa: E731
    deriv = None
    if outer.derivative is not None and inner.derivative is not None:
        deriv = lambda s: outer.derivative(inner.fn(s)) * inner.derivative(s)  # noqa: E731

    return ComparisonFunction(
        lambda s: outer.fn(inner.fn(s)),
        kind,
        inverse=inverse,
        derivative=deriv,
        domain=inner.domain,
        name=f"({outer.name or 'f'})o({inner.name or 'g'})",
    )


def invert(f: ComparisonFunction, y: float, tol: float = 1e-12) -> float:
    """Solve ``f(s) = y`` for ``s >= 0``.

    Uses the analytic inverse when there is one. Otherwise the bracket
    ``[0, 1]`` is doubled until ``f(hi) >= y`` (giving up past 2**60 or the
    function's domain) and the root is bisected to ``|f(s) - y| <= tol`` or
    until the bracket cannot shrink any further in double precision.
    """
    if f.kind not in _INCREASING:
        raise ValueError(f"invert needs a class K function, got kind {f.kind.value}")
    if y < 0:
        raise ValueError("invert is defined for y >= 0")
    if f.inverse is not None:
        return float(f.inverse(y))

    lo, flo = 0.0, float(f.fn(0.0))
    if abs(flo - y) <= tol:
        return 0.0
    hi = 1.0
    cap = min(BRACKET_CAP, f.domain)
    while True:
        hi = min(hi, cap)
        fhi = float(f.fn(hi))
        if fhi < flo:
            raise NonMonotone(f"f({hi!r}) = {fhi!r} < f({lo!r}) = {flo!r}")
        if fhi >= y:
            break
        if hi >= cap:
            raise NoBracket(f"f stays below {y!r} on [0, {cap!r}]; not K-infinity up to this value")
        lo, flo = hi, fhi
        hi *= 2.0
    if abs(fhi - y) <= tol:
        return hi

    while True:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            return lo if abs(flo - y) <= abs(fhi - y) else hi
        fmid = float(f.fn(mid))
        if fmid < flo or fmid > fhi:
            raise NonMonotone(f"f({mid!r}) = {fmid!r} outside [{flo!r}, {fhi!r}]")
        if abs(fmid - y) <= tol:
            return mid
        if fmid < y:
            lo, flo = mid, fmid
        else:
            hi, fhi = mid, fmid


def inverse_function(f: ComparisonFunction, tol: float = 1e-12) -> ComparisonFunction:
    """``f``'s inverse as a comparison function (numeric when no analytic one)."""
    if f.inverse is not None:
        inv = f.inverse
    else:
        def inv(y):
            arr = np.asarray(y, dtype=float)
            if arr.ndim == 0:
                return invert(f, float(arr), tol)
            return np.array([invert(f, float(v), tol) for v in arr.ravel()]).reshape(arr.shape)

    deriv = None
    if f.derivative is not None:
        deriv = lambda y: 1.0 / f.derivative(inv(y))  # noqa: E731
    return ComparisonFunction(inv, f.kind, inverse=f.fn, derivative=deriv,
                              name=f"inv({f.name or 'f'})")


def default_step(s: float) -> float:
    return max(1e-6, 1e-8 * abs(s))


def derivative(f: ComparisonFunction, s: float, h: Optional[float] = None) -> float:
    """f'(s): analytic when available, else a central difference.

    Near the left end of the domain (``s - h < 0``) a forward difference is
    used instead and a :class:`DomainEdge` warning is emitted.
    """
    if f.derivative is not None:
        return float(f.derivative(s))
    if h is None:
        h = default_step(s)
    if h <= 0:
        raise ValueError("step must be positive")
    if s - h < 0:
        warnings.warn(f"one-sided difference at s={s!r} (first order)", DomainEdge, stacklevel=2)
        return float((f.fn(s + h) - f.fn(s)) / h)
    return float((f.fn(s + h) - f.fn(s - h)) / (2.0 * h))


# -- sampled class checks -------------------------------------------------

def default_grid(f: ComparisonFunction, n: int = 512) -> np.ndarray:
    """Zero plus ``n - 1`` log-spaced points up to the domain (1e4 if unbounded)."""
    top = f.domain if math.isfinite(f.domain) else 1e4
    return np.concatenate(([0.0], np.logspace(-6, math.log10(top), n - 1)))


def verify_class_k(f: ComparisonFunction, grid: Sequence[float] | None = None,
                   exceed: float | None = None) -> VerificationReport:
    """Check ``f(0) = 0`` and strict increase on ``grid``.

    With ``exceed`` given, additionally require ``f(max(grid)) > exceed``
    (a sampled stand-in for unboundedness).
    """
    grid = default_grid(f) if grid is None else np.asarray(grid, dtype=float)
    if grid.size == 0:
        raise EmptyGrid("verify_class_k needs at least one grid point")
    if np.any(np.diff(grid) < 0) or grid[0] < 0:
        raise ValueError("grid must be sorted and nonnegative")

    values = np.array([float(f.fn(s)) for s in grid])
    found = []
    if grid[0] == 0.0 and abs(values[0]) > ZERO_TOL:
        found.append(Violation(0.0, "f(0) != 0", values[0]))
    drops = np.flatnonzero(np.diff(values) <= 0)
    for i in drops:
        found.append(Violation(float(grid[i + 1]), "not strictly increasing",
                               float(values[i + 1] - values[i])))
    if exceed is not None and values[-1] <= exceed:
        found.append(Violation(float(grid[-1]), f"f stays below {exceed!r}", float(values[-1])))
    return VerificationReport("class_k", tuple(found),
                              {"points": int(grid.size), "f_max": float(values[-1])})


def verify_class_kl(b: ClassKLFunction, s_grid, t_grid, decay_tol: float = 1e-3) -> VerificationReport:
    """Check K-in-s for every sampled t, nonincreasing-in-t for every s, and
    ``b(s, t_max) <= decay_tol * b(s, 0)`` for every ``s > 0``.

    Algebraic decay needs a long horizon: ``s / sqrt(1 + 4 s^2 t)`` reaches the
    ratio ``decay_tol`` only once ``t >= (1/decay_tol**2 - 1) / (4 s**2)``.
    """
    s_grid = np.asarray(s_grid, dtype=float)
    t_grid = np.asarray(t_grid, dtype=float)
    if s_grid.size == 0 or t_grid.size == 0:
        raise EmptyGrid("verify_class_kl needs nonempty grids")
    S, T = np.meshgrid(s_grid, t_grid, indexing="ij")
    vals = np.asarray(b.fn(S, T), dtype=float)

    found = []
    for j, t in enumerate(t_grid):
        col = vals[:, j]
        if s_grid[0] == 0.0 and abs(col[0]) > ZERO_TOL:
            found.append(Violation((0.0, float(t)), "b(0, t) != 0", float(col[0])))
        for i in np.flatnonzero(np.diff(col) <= 0):
            found.append(Violation((float(s_grid[i + 1]), float(t)), "not increasing in s",
                                   float(col[i + 1] - col[i])))
    for i, s in enumerate(s_grid):
        row = vals[i]
        for j in np.flatnonzero(np.diff(row) > 0):
            found.append(Violation((float(s), float(t_grid[j + 1])), "increasing in t",
                                   float(row[j + 1] - row[j])))
        if s > 0 and row[-1] > decay_tol * row[0]:
            found.append(Violation((float(s), float(t_grid[-1])), "insufficient decay",
                                   float(row[-1] / row[0]) if row[0] else math.inf))
    return VerificationReport("class_kl", tuple(found),
                              {"s_points": int(s_grid.size), "t_points": int(t_grid.size),
                               "decay_tol": float(decay_tol)})


def with_name(f: ComparisonFunction, name: str) -> ComparisonFunction:
    return replace(f, name=name)
