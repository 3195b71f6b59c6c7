"""Tracking-error envelopes for ISS systems and trajectory containment.

The bounds here replace the classical ``gamma(sup |u|)`` term with the
current input value plus a correction driven by how fast the input moves:

    delta(t) = -int_0^t exp(-int_s^t k) * alpha4(u(s)) * u'(s) ds

All integrals are trapezoid rules on the (uniform) envelope grid.
"""

from __future__ import annotations

import enum
import io
from dataclasses import dataclass, field, replace
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.integrate import cumulative_trapezoid

from .dynamics import InputSignal, ISSCertificate, SystemModel, Trajectory, _write
from .errors import GridMismatch, MissingEquilibriumMap, NonPositiveRate, NotScalar
from .funcalg import ClassKLFunction, derivative, inverse_function, invert


class XiPolicy(str, enum.Enum):
    # xi = 0 maximises 1 - exp(-int_xi^t k), so the bound holds for every xi.
    CONSERVATIVE_ZERO = "conservative_zero"


@dataclass(frozen=True)
class EnvelopeParams:
    """Rates and constants feeding the envelope formulas.

    ``lambda1 <= lambda2`` are decay rates (positive). ``alpha4`` maps an
    input vector to the gradient of ``alpha2(rho(|u|))`` (a scalar for
    scalar inputs).
    """

    k: Callable = lambda t: 1.0
    L: float = 1.0
    alpha4: Callable = lambda u: 1.0
    beta: ClassKLFunction = field(default_factory=lambda: ClassKLFunction(lambda s, t: s * np.exp(-t)))
    lambda1: Callable = lambda t: 1.0
    lambda2: Callable = lambda t: 1.0
    xi_policy: XiPolicy = XiPolicy.CONSERVATIVE_ZERO

    def __post_init__(self):
        if not self.L > 0:
            raise ValueError("L must be positive")

    def check(self, grid) -> None:
        l1 = _sample(self.lambda1, grid)
        l2 = _sample(self.lambda2, grid)
        if np.any(l1 <= 0) or np.any(l1 > l2):
            raise NonPositiveRate("need 0 < lambda1(t) <= lambda2(t) on the grid")
        _positive_rate(self.k, grid)


@dataclass(frozen=True)
class EnvelopeReport:
    """Upper (and optionally lower) bound samples plus a containment verdict.

    For per-component reports ``upper``/``lower`` have shape ``(n, dim)``.
    ``contained`` is None until :func:`check_containment` fills it in.
    """

    grid: np.ndarray
    upper: np.ndarray
    lower: Optional[np.ndarray] = None
    mode: str = "norm"
    contained: Optional[bool] = None
    max_violation: float = 0.0
    violation_times: tuple = ()
    x: Optional[np.ndarray] = None
    notes: tuple = ()

    def to_csv(self, target=None) -> str:
        """``t,upper,lower,x`` rows and a ``# contained=... max_violation=...`` footer."""
        up = _as_columns(self.upper)
        lo = _as_columns(self.lower) if self.lower is not None else None
        xs = _as_columns(self.x) if self.x is not None else None
        dim = up.shape[1]
        sfx = [""] if dim == 1 else [str(i + 1) for i in range(dim)]
        header = ["t"]
        for s in sfx:
            header += [f"upper{s}", f"lower{s}", f"x{s}"]
        buf = io.StringIO()
        buf.write(",".join(header) + "\n")
        for n, t in enumerate(self.grid):
            row = [_fmt(t)]
            for i in range(dim):
                row.append(_fmt(up[n, i]))
                row.append(_fmt(lo[n, i]) if lo is not None else "")
                row.append(_fmt(xs[n, i]) if xs is not None else "")
            buf.write(",".join(row) + "\n")
        verdict = "unchecked" if self.contained is None else str(self.contained).lower()
        buf.write(f"# contained={verdict} max_violation={_fmt(self.max_violation)}\n")
        text = buf.getvalue()
        _write(target, text)
        return text


def _fmt(v) -> str:
    return format(float(v), ".17g")


def _as_columns(a) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    return a[:, None] if a.ndim == 1 else a


def _sample(fn: Callable, grid) -> np.ndarray:
    return np.array([float(fn(t)) for t in grid])


def _positive_rate(fn: Callable, grid) -> np.ndarray:
    vals = _sample(fn, grid)
    bad = np.flatnonzero(vals <= 0)
    if bad.size:
        raise NonPositiveRate(f"rate is {vals[bad[0]]!r} at t={grid[bad[0]]!r}; must be positive")
    return vals


def _uniform(grid) -> tuple[np.ndarray, float]:
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or grid.size < 2:
        raise GridMismatch("envelope grid needs at least two points")
    steps = np.diff(grid)
    h = float(steps.mean())
    if h <= 0 or np.max(np.abs(steps - h)) > 1e-9 * max(1.0, abs(grid[-1])):
        raise GridMismatch("envelope grid must be uniform and increasing")
    return grid, h


def cumulative_rate(rate: Callable, grid) -> np.ndarray:
    """``int_{t0}^{t} rate`` at every grid point (trapezoid)."""
    grid, _ = _uniform(grid)
    return cumulative_trapezoid(_positive_rate(rate, grid), grid, initial=0.0)


def forced_response(rate_integral: np.ndarray, forcing: np.ndarray, h: float) -> np.ndarray:
    """Trapezoid value of ``int_0^t exp(-(R(t) - R(s))) g(s) ds`` on every grid point.

    Uses the product recurrence ``S_i = exp(-(R_i - R_{i-1})) S_{i-1} + g_i``,
    which gives the full trapezoid sum in O(n).
    """
    g = np.asarray(forcing, dtype=float)
    n = g.shape[0]
    decay = np.exp(-np.diff(rate_integral))
    acc = np.empty_like(g)
    acc[0] = 0.5 * g[0]
    for i in range(1, n):
        acc[i] = decay[i - 1] * acc[i - 1] + g[i]
    out = h * (acc - 0.5 * g)
    out[0] = 0.0
    return out


def forced_response_direct(rate_integral, forcing, h) -> np.ndarray:
    """O(n^2) reference for :func:`forced_response` (same trapezoid rule)."""
    R = np.asarray(rate_integral, dtype=float)
    g = np.asarray(forcing, dtype=float)
    out = np.zeros_like(g)
    for i in range(1, g.shape[0]):
        w = np.exp(-(R[i] - R[: i + 1]))
        vals = w * g[: i + 1]
        out[i] = h * (vals.sum() - 0.5 * (vals[0] + vals[-1]))
    return out


def rate_forcing(alpha4: Callable, input: InputSignal, grid, h: float = 1e-5) -> np.ndarray:
    """``alpha4(u(t)) . u'(t)`` on the grid."""
    u = input.sample(grid)
    du = input.sample_derivative(grid, h)
    # alpha4 may be singular where u' vanishes (e.g. d cbrt at 0); the product is 0 there.
    return np.array([float(np.sum(np.asarray(alpha4(ui), dtype=float) * dui)) if np.any(dui) else 0.0
                     for ui, dui in zip(u, du)])


def delta_term(k: Callable, alpha4: Callable, input: InputSignal, grid) -> np.ndarray:
    """``-int_0^t exp(-int_s^t k) alpha4(u) u' ds`` per grid point (multiply by L yourself).

    Exactly zero for inputs whose derivative is identically zero.
    """
    grid, h = _uniform(grid)
    R = cumulative_rate(k, grid)
    return -forced_response(R, rate_forcing(alpha4, input, grid), h)


def default_lagrange_constant(cert: ISSCertificate, input: InputSignal, grid) -> float:
    """max of d(alpha1^-1)/dy over the sampled range of ``alpha2(rho(|u|))``."""
    inv = inverse_function(cert.alpha1)
    u = input.sample(grid)
    ys = [float(cert.alpha2(cert.rho(np.linalg.norm(ui)))) for ui in u]
    lo, hi = min(ys), max(ys)
    pts = np.linspace(lo, hi, 64) if hi > lo else np.array([lo])
    pts = pts[pts > 0] if np.any(pts > 0) else np.array([1e-6])
    return float(max(derivative(inv, float(y)) for y in pts))


def envelope_theorem1(cert: ISSCertificate, params: EnvelopeParams, input: InputSignal,
                      grid, s0: float) -> EnvelopeReport:
    """Norm bound ``beta(s0, t) + gain(|u(t)|) + L * delta(t)``."""
    grid, _ = _uniform(grid)
    gain = cert.gain
    u = input.sample(grid)
    beta = np.asarray(params.beta(s0, grid), dtype=float) * np.ones_like(grid)
    g = np.array([float(gain(np.linalg.norm(ui))) for ui in u])
    upper = beta + g + params.L * delta_term(params.k, params.alpha4, input, grid)
    return EnvelopeReport(grid, upper, mode="norm")


def envelope_corollary1(cert: ISSCertificate, k: Callable, beta: ClassKLFunction,
                        input: InputSignal, grid, s0: float,
                        xi_policy: XiPolicy = XiPolicy.CONSERVATIVE_ZERO) -> EnvelopeReport:
    """Norm bound ``beta(s0, t) + alpha1^-1((1 - exp(-int_0^t k)) alpha2(rho(|u|)))``."""
    XiPolicy(xi_policy)
    grid, _ = _uniform(grid)
    factor = 1.0 - np.exp(-cumulative_rate(k, grid))
    u = input.sample(grid)
    inner = np.array([float(cert.alpha2(cert.rho(np.linalg.norm(ui)))) for ui in u])
    tail = np.array([invert(cert.alpha1, float(f * y)) for f, y in zip(factor, inner)])
    upper = np.asarray(beta(s0, grid), dtype=float) * np.ones_like(grid) + tail
    return EnvelopeReport(grid, upper, mode="norm", notes=("xi=0",))


def _gamma_parts(sys: SystemModel, input: InputSignal, grid, h: float = 1e-5):
    """gamma(u(t)) and gamma_i'(u(t)) u'(t) per component, shapes ``(n, dim)``."""
    if sys.equilibrium_map is None:
        raise MissingEquilibriumMap(f"{sys.name or 'system'} has no equilibrium map")
    if input.dim != 1:
        raise NotScalar("equilibrium-map envelopes take a scalar input")
    u = input.sample(grid)[:, 0]
    du = input.sample_derivative(grid)[:, 0]
    gam = np.array([[float(g(ui)) for g in sys.equilibrium_map] for ui in u])
    # u' = 0 makes the product exactly zero even where gamma' is singular (cbrt at 0).
    slope = np.array([[derivative(g, float(ui), h) * dui if dui != 0.0 else 0.0
                       for g in sys.equilibrium_map] for ui, dui in zip(u, du)])
    return gam, slope


def envelope_theorem2(sys: SystemModel, params: EnvelopeParams, input: InputSignal,
                      grid, x0) -> EnvelopeReport:
    """Two-sided per-component envelope around ``gamma(u(t))``.

    The error ``e = x - gamma(u)`` obeys ``e' = -a(t) e - gamma'(u) u'`` with
    the rate ``a`` somewhere in ``[lambda1, lambda2]``. The kernel
    ``exp(-int_s^t a)`` then lies between the ``lambda2`` and ``lambda1``
    kernels, so each piece is bounded using the kernel that is worst for its
    sign. When ``e0 <= 0`` and ``gamma' u' >= 0`` this is the textbook pairing
    (upper: ``lambda2`` with min, lower: ``lambda1`` with max); for a single
    rate it is exact.

    The min/max of ``gamma_i' u'`` is taken across components at each time.
    """
    grid, h = _uniform(grid)
    params.check(grid)
    gam, slope = _gamma_parts(sys, input, grid)
    x0 = np.atleast_1d(np.asarray(x0, dtype=float))
    e0 = x0 - gam[0]
    R_slow = cumulative_trapezoid(_sample(params.lambda1, grid), grid, initial=0.0)
    R_fast = cumulative_trapezoid(_sample(params.lambda2, grid), grid, initial=0.0)
    b_min = slope.min(axis=1)
    b_max = slope.max(axis=1)

    def split(b, R_pos, R_neg):
        return (forced_response(R_pos, np.maximum(b, 0.0), h)
                - forced_response(R_neg, np.maximum(-b, 0.0), h))

    # -int K b <= -(int K_fast b+ - int K_slow b-) for every admissible kernel K.
    up_forced = -split(b_min, R_fast, R_slow)
    lo_forced = -split(b_max, R_slow, R_fast)

    free_slow = np.exp(-R_slow)[:, None] * e0[None, :]
    free_fast = np.exp(-R_fast)[:, None] * e0[None, :]
    upper = np.maximum(free_slow, free_fast) + gam + up_forced[:, None]
    lower = np.minimum(free_slow, free_fast) + gam + lo_forced[:, None]
    notes = ("min/max of gamma_i' u' taken across components",)
    if sys.dim_x == 1:
        upper, lower = upper[:, 0], lower[:, 0]
    return EnvelopeReport(grid, upper, lower, mode="component", notes=notes)


def envelope_corollary2(sys: SystemModel, a: Callable, beta: ClassKLFunction,
                        input: InputSignal, grid, s0: float) -> EnvelopeReport:
    """Band ``[-beta + min(0, gamma(u)), beta + max(0, gamma(u))]`` for scalar systems.

    The exact solution is ``beta-term + c(t) gamma(u(t))`` with an unknown
    factor ``c(t) = 1 - exp(-int_xi^t a)`` in ``(0, 1)``; the band covers the
    whole factor range.
    """
    if sys.dim_x != 1:
        raise NotScalar("the equilibrium band is defined for scalar systems")
    grid, _ = _uniform(grid)
    _positive_rate(a, grid)
    gam, _ = _gamma_parts(sys, input, grid)
    gam = gam[:, 0]
    b = np.asarray(beta(s0, grid), dtype=float) * np.ones_like(grid)
    upper = b + np.maximum(gam, 0.0)
    lower = -b + np.minimum(gam, 0.0)
    return EnvelopeReport(grid, upper, lower, mode="component", notes=("factor range (0,1]",))


def check_containment(traj: Trajectory, report: EnvelopeReport, tol: float = 0.0) -> EnvelopeReport:
    """Fill in the verdict: ``lower - tol <= x <= upper + tol`` at every grid point.

    Norm mode compares ``|x(t)|``; component mode compares each state entry.
    ``max_violation`` is the largest excursion beyond the bound among points
    that exceed ``tol``.
    """
    grid = np.asarray(report.grid, dtype=float)
    if traj.n != grid.size or grid.size == 0 or not np.allclose(traj.times, grid, rtol=0, atol=1e-9):
        raise GridMismatch("trajectory and envelope are not on the same grid")
    if report.mode == "norm":
        x = traj.norms()
    else:
        x = traj.samples[:, 0] if np.ndim(report.upper) == 1 else traj.samples
    up = np.asarray(report.upper, dtype=float)
    excess = x - up
    if report.lower is not None:
        excess = np.maximum(excess, np.asarray(report.lower, dtype=float) - x)
    excess = np.maximum(excess, 0.0)
    flagged = excess > tol
    per_time = np.any(flagged, axis=1) if flagged.ndim == 2 else flagged
    worst = float(np.max(np.where(flagged, excess, 0.0))) if np.any(flagged) else 0.0
    return replace(report, contained=not bool(np.any(per_time)), max_violation=worst,
                   violation_times=tuple(float(t) for t in grid[per_time]), x=x)


def steady_tracking_error(report: EnvelopeReport, target: Sequence[float], after: float) -> float:
    """sup over ``t >= after`` of the envelope's distance from ``target``."""
    grid = np.asarray(report.grid)
    mask = grid >= after
    tgt = np.asarray(target, dtype=float)[mask]
    up = np.asarray(report.upper)[mask]
    gaps = np.abs(up - tgt)
    if report.lower is not None:
        gaps = np.maximum(gaps, np.abs(np.asarray(report.lower)[mask] - tgt))
    return float(np.max(gaps))
