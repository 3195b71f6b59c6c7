"""Scalar bounds for state-dependent matrices by eigenvalue sampling.

A matrix function ``A(x)`` on the ball ``|x| <= r`` is sandwiched between
two scalar functions of the radius, both taken over the annulus outside s:

    lambda1(s) = inf  { Re eig A(x) : s <= |x| <= r }
    lambda2(s) = sup  { Re eig A(x) : s <= |x| <= r }

The inner-ball supremum ``sup { Re eig A(x) : |x| <= s }`` is kept as
``lambda2_ball``.

Everything is sampled, so the bounds (and any definiteness verdict) only
describe the points that were actually visited.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.stats import qmc

from .dynamics import SystemModel
from .errors import DefinitenessViolated, NoConvergence, NonFinite
from .report import VerificationReport, Violation

DEFAULT_SEED = 0
ZERO_MARGIN = 1e-12


def sampling_seed(seed: int | None = None) -> int:
    """Explicit seed, else ``ISSLAB_SEED`` from the environment, else 0."""
    if seed is not None:
        return int(seed)
    env = os.environ.get("ISSLAB_SEED")
    return int(env) if env not in (None, "") else DEFAULT_SEED


@dataclass(frozen=True)
class FunctionMatrix:
    fn: Callable
    dim: int
    radius: float

    def __post_init__(self):
        if not self.radius > 0:
            raise ValueError("domain radius must be positive")

    def __call__(self, x) -> np.ndarray:
        A = np.asarray(self.fn(np.asarray(x, dtype=float)), dtype=float).reshape(self.dim, self.dim)
        if not np.all(np.isfinite(A)):
            raise NonFinite(f"matrix has non-finite entries at x={np.asarray(x).tolist()}")
        return A


@dataclass(frozen=True)
class ScalarBoundPair:
    """Piecewise-constant radius bounds; see the module docstring.

    Between shell radii the value is taken from the neighbouring shell that
    keeps the bound valid: the shell below for the annulus bounds, the shell
    above for the inner-ball bound.
    """

    shells: np.ndarray
    lower_values: np.ndarray
    upper_values: np.ndarray
    ball_upper_values: np.ndarray
    sample_count: int
    radius: float

    def _index(self, s: float, side: str) -> int:
        s = min(max(float(s), 0.0), self.radius)
        i = int(np.searchsorted(self.shells, s, side=side))
        return i

    def lambda1(self, s: float) -> float:
        i = self._index(s, "right") - 1
        return float(self.lower_values[max(i, 0)])

    def lambda2(self, s: float) -> float:
        i = self._index(s, "right") - 1
        return float(self.upper_values[max(i, 0)])

    def lambda2_ball(self, s: float) -> float:
        i = self._index(s, "left")
        return float(self.ball_upper_values[min(i, len(self.shells) - 1)])

    def rates(self) -> tuple[float, float]:
        """Decay rates ``(slow, fast) = (-sup Re eig, -inf Re eig)`` over the whole ball."""
        return -float(self.upper_values[0]), -float(self.lower_values[0])


def jacobian(sys: SystemModel, x, u=None, h: float = 1e-6, t: float = 0.0) -> np.ndarray:
    """d rhs / dx at ``(x, u)``: analytic if the model has one, else central differences."""
    x = np.asarray(x, dtype=float).reshape(-1)
    u = np.zeros(sys.dim_u) if u is None else np.atleast_1d(np.asarray(u, dtype=float))
    if sys.jacobian is not None:
        J = np.asarray(sys.jacobian(x, u, t), dtype=float).reshape(sys.dim_x, sys.dim_x)
    else:
        J = np.empty((sys.dim_x, sys.dim_x))
        for j in range(sys.dim_x):
            dx = np.zeros_like(x)
            dx[j] = h
            J[:, j] = (sys(x + dx, u, t) - sys(x - dx, u, t)) / (2.0 * h)
    if not np.all(np.isfinite(J)):
        raise NonFinite(f"Jacobian is not finite at x={x.tolist()}")
    return J


def eigen_real_parts(A) -> np.ndarray:
    """Real parts of the eigenvalues, ascending (LAPACK ``geev``)."""
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError("eigen_real_parts needs a square matrix")
    if not np.all(np.isfinite(A)):
        raise NonFinite("matrix has non-finite entries")
    try:
        ev = np.linalg.eigvals(A)
    except np.linalg.LinAlgError as exc:
        raise NoConvergence(str(exc)) from exc
    return np.sort(ev.real)


def error_matrix(sys: SystemModel, u, radius: float, nodes: int = 8) -> FunctionMatrix:
    """Averaged Jacobian of the error system around the equilibrium for input ``u``.

    With ``e = x - gamma(u)``, ``f(gamma + e, u) = M(e) e`` exactly, where
    ``M(e) = int_0^1 J(gamma + theta e, u) d theta`` (Gauss-Legendre in theta).
    """
    center = sys.equilibrium(u)
    uu = np.atleast_1d(np.asarray(u, dtype=float))
    theta, w = np.polynomial.legendre.leggauss(nodes)
    theta = 0.5 * (theta + 1.0)
    w = 0.5 * w

    def fn(e):
        return sum(wi * jacobian(sys, center + ti * e, uu) for ti, wi in zip(theta, w))

    return FunctionMatrix(fn, sys.dim_x, radius)


def _directions(dim: int, count: int, seed: int) -> np.ndarray:
    """Deterministic, roughly uniform unit vectors (scrambled Sobol mapped through the normal CDF)."""
    if dim == 1:
        return np.array([[1.0], [-1.0]])
    m = max(1, int(np.ceil(np.log2(max(count, 2)))))
    pts = qmc.Sobol(d=dim, scramble=True, seed=seed).random_base2(m)[:count]
    from scipy.stats import norm

    g = norm.ppf(np.clip(pts, 1e-12, 1 - 1e-12))
    dirs = g / np.linalg.norm(g, axis=1, keepdims=True)
    axes = np.vstack([np.eye(dim), -np.eye(dim)])
    return np.vstack([axes, dirs])


def scalar_bounds(A: FunctionMatrix, shells: int = 32, samples_per_shell: int = 64,
                  definite: str | None = None, seed: int | None = None) -> ScalarBoundPair:
    """Build :class:`ScalarBoundPair` from eigenvalues sampled on ``shells + 1`` spheres.

    ``definite='negative'`` (or ``'positive'``) raises DefinitenessViolated
    as soon as a sampled eigen-real-part reaches zero (within 1e-12).
    """
    if shells < 1 or samples_per_shell < 1:
        raise ValueError("need at least one shell and one sample per shell")
    radii = A.radius * np.arange(shells + 1) / shells
    dirs = _directions(A.dim, samples_per_shell, sampling_seed(seed))
    mins = np.empty(shells + 1)
    maxs = np.empty(shells + 1)
    count = 0
    for k, s in enumerate(radii):
        pts = dirs[:1] * 0.0 if s == 0 else s * dirs
        lo, hi = np.inf, -np.inf
        for x in pts:
            re = eigen_real_parts(A(x))
            count += 1
            if definite == "negative" and re[-1] > -ZERO_MARGIN:
                raise DefinitenessViolated(f"eigenvalue real part {float(re[-1])!r} >= 0 at x={x.tolist()}",
                                           witness=x, value=float(re[-1]))
            if definite == "positive" and re[0] < ZERO_MARGIN:
                raise DefinitenessViolated(f"eigenvalue real part {float(re[0])!r} <= 0 at x={x.tolist()}",
                                           witness=x, value=float(re[0]))
            lo, hi = min(lo, re[0]), max(hi, re[-1])
        mins[k], maxs[k] = lo, hi
    lower = np.minimum.accumulate(mins[::-1])[::-1]
    upper = np.maximum.accumulate(maxs[::-1])[::-1]
    ball = np.maximum.accumulate(maxs)
    return ScalarBoundPair(radii, lower, upper, ball, count, float(A.radius))


def check_definiteness(A: FunctionMatrix, samples: int = 256, sign: str = "negative",
                       seed: int | None = None) -> VerificationReport:
    """Quadratic-form test ``e^T A(x) e < 0`` (or ``> 0``) on sampled ``x``.

    For each sampled ``x`` the worst unit ``e`` is the extreme eigenvector of
    the symmetric part, so the worst quadratic-form value is exact per ``x``.
    The eigenvalue-sign verdict is reported alongside, since the two
    criteria disagree for non-symmetric matrices.
    """
    if sign not in ("negative", "positive"):
        raise ValueError("sign must be 'negative' or 'positive'")
    rng_seed = sampling_seed(seed)
    flip = 1.0 if sign == "negative" else -1.0
    if A.dim == 1:
        xs = A.radius * np.linspace(-1.0, 1.0, max(samples, 2))[:, None]
    else:
        m = max(1, int(np.ceil(np.log2(max(samples, 2)))))
        cube = qmc.Sobol(d=A.dim, scramble=True, seed=rng_seed).random_base2(m)[:samples]
        xs = A.radius * (2.0 * cube - 1.0)
        norms = np.linalg.norm(xs, axis=1)
        xs = np.where(norms[:, None] > A.radius, xs * (A.radius / norms)[:, None], xs)
        xs = np.vstack([np.zeros(A.dim), xs])

    worst, worst_x, worst_e = -np.inf, None, None
    worst_eig = -np.inf
    found = []
    for x in xs:
        M = flip * A(x)
        sym = 0.5 * (M + M.T)
        vals, vecs = np.linalg.eigh(sym)
        q = float(vals[-1])
        if q > worst:
            worst, worst_x, worst_e = q, x.copy(), vecs[:, -1].copy()
        worst_eig = max(worst_eig, float(eigen_real_parts(M)[-1]))
    if worst >= 0:
        found.append(Violation(tuple(worst_x.tolist()),
                               f"quadratic form not strictly {sign}", flip * worst))
    metrics = {
        "worst_quadratic_form": flip * worst,
        "witness_x": tuple(worst_x.tolist()),
        "witness_e": tuple(np.round(worst_e, 15).tolist()),
        "worst_eigen_real_part": flip * worst_eig,
        "eigen_verdict": bool(worst_eig < -ZERO_MARGIN),
        "samples": int(len(xs)),
    }
    return VerificationReport(f"{sign}_definite", tuple(found), metrics)
