"""System models, input signals and fixed-step RK4 integration.

Everything here runs on a uniform time grid so that trajectories, envelopes
and golden CSV files can be compared sample by sample.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import DimMismatch, GridMismatch, NonFinite
from .funcalg import ComparisonFunction, compose, inverse_function

DEFAULT_STEP = 1e-3


@dataclass(frozen=True)
class ISSCertificate:
    """Lyapunov sandwich data ``alpha1(|x|) <= V <= alpha2(|x|)`` with the
    decrease condition active outside ``|x| >= rho(|u|)``.
    """

    alpha1: ComparisonFunction
    alpha2: ComparisonFunction
    rho: ComparisonFunction
    lyapunov: Optional[Callable] = None

    @property
    def gain(self) -> ComparisonFunction:
        """alpha1^-1 o alpha2 o rho."""
        return compose(inverse_function(self.alpha1), compose(self.alpha2, self.rho))

    def check(self, grid: Sequence[float] | None = None):
        """Sampled consistency: alpha1 <= alpha2 and a class K gain."""
        from .funcalg import verify_class_k
        from .report import VerificationReport, Violation

        grid = np.linspace(0.0, 10.0, 201) if grid is None else np.asarray(grid, dtype=float)
        found = []
        for s in grid:
            a1, a2 = float(self.alpha1(s)), float(self.alpha2(s))
            if a1 > a2 + 1e-12:
                found.append(Violation(float(s), "alpha1 > alpha2", a1 - a2))
        gain_report = verify_class_k(self.gain, grid)
        found.extend(gain_report.violations)
        return VerificationReport("iss_certificate", tuple(found), {"points": int(len(grid))})


@dataclass(frozen=True)
class SystemModel:
    """``x' = rhs(x, u, t)`` with fixed state and input dimensions.

    ``equilibrium_map`` holds one comparison function per state component,
    each mapping a (scalar) constant input to that component of the
    equilibrium. ``jacobian``, when given, returns d rhs / dx.
    """

    rhs: Callable
    dim_x: int
    dim_u: int = 0
    equilibrium_map: Optional[tuple] = None
    certificate: Optional[ISSCertificate] = None
    jacobian: Optional[Callable] = None
    name: str = ""

    def __post_init__(self):
        if self.dim_x <= 0 or self.dim_u < 0:
            raise ValueError("dim_x must be positive and dim_u nonnegative")
        if self.equilibrium_map is not None:
            eq = tuple(self.equilibrium_map)
            if len(eq) != self.dim_x:
                raise DimMismatch(f"equilibrium map has {len(eq)} components, state has {self.dim_x}")
            object.__setattr__(self, "equilibrium_map", eq)

    def __call__(self, x, u=None, t=0.0):
        x = np.asarray(x, dtype=float).reshape(-1)
        if x.size != self.dim_x:
            raise DimMismatch(f"{self.name or 'system'}: state has {x.size} entries, expected {self.dim_x}")
        u = np.zeros(0) if u is None else np.asarray(u, dtype=float).reshape(-1)
        if u.size != self.dim_u:
            raise DimMismatch(f"{self.name or 'system'}: input has {u.size} entries, expected {self.dim_u}")
        out = np.asarray(self.rhs(x, u, t), dtype=float).reshape(-1)
        if out.size != self.dim_x:
            raise DimMismatch(f"{self.name or 'system'}: rhs returned {out.size} entries, expected {self.dim_x}")
        return out

    def equilibrium(self, u) -> np.ndarray:
        """gamma(u) for a constant input."""
        from .errors import MissingEquilibriumMap

        if self.equilibrium_map is None:
            raise MissingEquilibriumMap(f"{self.name or 'system'} has no equilibrium map")
        u = float(np.asarray(u, dtype=float).reshape(-1)[0])
        return np.array([float(g(u)) for g in self.equilibrium_map])


def equilibrium_residual(sys: SystemModel, u_grid: Sequence[float], t: float = 0.0) -> float:
    """max over the grid of ``|rhs(gamma(u), u)|``."""
    worst = 0.0
    for u in u_grid:
        r = sys(sys.equilibrium(u), np.full(sys.dim_u, float(u)), t)
        worst = max(worst, float(np.max(np.abs(r))))
    return worst


@dataclass(frozen=True)
class InputSignal:
    """Time-indexed input ``u(t)`` with an optional analytic derivative."""

    value: Callable
    derivative: Optional[Callable] = None
    dim: int = 1
    description: str = ""

    def __call__(self, t) -> np.ndarray:
        return np.asarray(self.value(t), dtype=float).reshape(-1)

    def sample(self, grid) -> np.ndarray:
        """Values on a grid, shape ``(len(grid), dim)``."""
        return np.array([self(t) for t in grid]).reshape(len(grid), self.dim)

    def sample_derivative(self, grid, h: float = 1e-5) -> np.ndarray:
        return np.array([signal_derivative(self, t, h) for t in grid]).reshape(len(grid), self.dim)

    @classmethod
    def constant(cls, c) -> "InputSignal":
        c = np.atleast_1d(np.asarray(c, dtype=float))
        zero = np.zeros_like(c)
        return cls(lambda t: c, lambda t: zero, dim=c.size, description=f"constant {c.tolist()}")

    @classmethod
    def sinusoid(cls, amplitude=1.0, frequency=1.0, phase=0.0, offset=0.0) -> "InputSignal":
        """``offset + amplitude * sin(frequency * t + phase)``; frequency in rad/s."""
        return cls(
            lambda t: offset + amplitude * math.sin(frequency * t + phase),
            lambda t: amplitude * frequency * math.cos(frequency * t + phase),
            description=f"sinusoid a={amplitude} w={frequency} phi={phase} c={offset}",
        )

    @classmethod
    def polynomial(cls, coefficients: Sequence[float]) -> "InputSignal":
        """``sum(c[i] * t**i)``."""
        poly = np.polynomial.Polynomial(coefficients)
        dpoly = poly.deriv()
        return cls(lambda t: poly(t), lambda t: dpoly(t),
                   description=f"polynomial {list(coefficients)}")

    @classmethod
    def from_trajectory(cls, traj: "Trajectory") -> "InputSignal":
        """Piecewise-linear interpolation of recorded samples."""
        return cls(traj.at, None, dim=traj.dim, description="recorded trajectory")


def signal_derivative(signal: InputSignal, t: float, h: float = 1e-5) -> np.ndarray:
    if signal.derivative is not None:
        return np.asarray(signal.derivative(t), dtype=float).reshape(-1)
    return (signal(t + h) - signal(t - h)) / (2.0 * h)


def check_signal_derivative(signal: InputSignal, ts, tol: float = 1e-4, h: float = 1e-5) -> float:
    """Largest gap between the declared derivative and a central difference."""
    if signal.derivative is None:
        return 0.0
    worst = 0.0
    for t in ts:
        fd = (signal(t + h) - signal(t - h)) / (2.0 * h)
        worst = max(worst, float(np.max(np.abs(fd - signal_derivative(signal, t)))))
    if worst > tol:
        raise ValueError(f"declared derivative disagrees with finite difference by {worst:.3g}")
    return worst


def n_steps(t0: float, t_end: float, h: float) -> int:
    if h <= 0:
        raise ValueError("step must be positive")
    if t_end <= t0:
        raise ValueError("t_end must exceed t0")
    return int(round((t_end - t0) / h))


@dataclass(frozen=True)
class Trajectory:
    """Samples on ``t0 + i*h`` for ``i = 0..n``; read-only."""

    t0: float
    h: float
    samples: np.ndarray = field(repr=False)

    def __post_init__(self):
        arr = np.array(self.samples, dtype=float)
        if arr.ndim == 1:
            arr = arr[:, None]
        if not np.all(np.isfinite(arr)):
            raise NonFinite("trajectory contains non-finite samples")
        arr.setflags(write=False)
        object.__setattr__(self, "samples", arr)

    @property
    def n(self) -> int:
        return self.samples.shape[0]

    @property
    def dim(self) -> int:
        return self.samples.shape[1]

    @property
    def t_end(self) -> float:
        return self.t0 + (self.n - 1) * self.h

    @property
    def times(self) -> np.ndarray:
        return self.t0 + self.h * np.arange(self.n)

    @property
    def final(self) -> np.ndarray:
        return self.samples[-1]

    def component(self, i: int) -> np.ndarray:
        return self.samples[:, i]

    def norms(self) -> np.ndarray:
        return np.linalg.norm(self.samples, axis=1)

    def at(self, t: float) -> np.ndarray:
        """Linear interpolation; exact at grid points."""
        pos = (t - self.t0) / self.h
        if pos < -1e-9 or pos > self.n - 1 + 1e-9:
            raise GridMismatch(f"t={t!r} outside [{self.t0!r}, {self.t_end!r}]")
        i = min(max(int(math.floor(pos + 1e-9)), 0), self.n - 1)
        frac = pos - i
        if i == self.n - 1 or abs(frac) < 1e-9:
            return self.samples[i].copy()
        return (1.0 - frac) * self.samples[i] + frac * self.samples[i + 1]

    def to_csv(self, target=None, labels: Sequence[str] | None = None) -> str:
        """``t,x1,...,xn`` with 17 significant digits and LF line endings."""
        labels = labels or [f"x{i + 1}" for i in range(self.dim)]
        buf = io.StringIO()
        buf.write(",".join(["t", *labels]) + "\n")
        for t, row in zip(self.times, self.samples):
            buf.write(",".join(format(float(v), ".17g") for v in (t, *row)) + "\n")
        text = buf.getvalue()
        _write(target, text)
        return text


def _write(target, text: str) -> None:
    if target is None:
        return
    if hasattr(target, "write"):
        target.write(text)
    else:
        with open(target, "w", newline="\n") as fh:
            fh.write(text)


def _rk4(f: Callable, y0: np.ndarray, t0: float, h: float, steps: int) -> np.ndarray:
    out = np.empty((steps + 1, y0.size))
    out[0] = y = y0
    half = 0.5 * h
    with np.errstate(over="ignore", invalid="ignore"):
        for i in range(steps):
            t = t0 + i * h
            k1 = f(y, t)
            k2 = f(y + half * k1, t + half)
            k3 = f(y + half * k2, t + half)
            k4 = f(y + h * k3, t + h)
            y = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            if not np.all(np.isfinite(y)):
                raise NonFinite(f"non-finite state at t={t + h!r}", t=t + h, state=y)
            out[i + 1] = y
    return out


def _state(x0, dim: int, label: str) -> np.ndarray:
    x0 = np.atleast_1d(np.asarray(x0, dtype=float)).reshape(-1)
    if x0.size != dim:
        raise DimMismatch(f"{label} has {x0.size} entries, expected {dim}")
    return x0


def integrate(sys: SystemModel, x0, input: InputSignal | None = None,
              t0: float = 0.0, t_end: float = 1.0, h: float = DEFAULT_STEP) -> Trajectory:
    """Classical RK4 with fixed step ``h``; raises NonFinite on blow-up."""
    steps = n_steps(t0, t_end, h)
    y0 = _state(x0, sys.dim_x, "x0")
    if sys.dim_u and input is None:
        raise DimMismatch(f"{sys.name or 'system'} needs an input of dimension {sys.dim_u}")
    if input is not None and input.dim != sys.dim_u:
        raise DimMismatch(f"input has dimension {input.dim}, system expects {sys.dim_u}")
    empty = np.zeros(0)
    rhs = sys.rhs
    if input is None:
        f = lambda y, t: np.asarray(rhs(y, empty, t), dtype=float)  # noqa: E731
    else:
        f = lambda y, t: np.asarray(rhs(y, input(t), t), dtype=float)  # noqa: E731
    sys(y0, input(t0) if input is not None else None, t0)  # dimension check once
    return Trajectory(t0, h, _rk4(f, y0, t0, h, steps))


def integrate_coupled(sysx: SystemModel, sysz: SystemModel, x0, z0,
                      t0: float = 0.0, t_end: float = 1.0, h: float = DEFAULT_STEP):
    """Joint RK4 of ``x' = fx(x, z, t)``, ``z' = fz(z, x, t)``; returns ``(x_traj, z_traj)``."""
    if sysx.dim_u != sysz.dim_x or sysz.dim_u != sysx.dim_x:
        raise DimMismatch("coupled subsystems must take each other's state as input")
    steps = n_steps(t0, t_end, h)
    x0 = _state(x0, sysx.dim_x, "x0")
    z0 = _state(z0, sysz.dim_x, "z0")
    nx = sysx.dim_x
    sysx(x0, z0, t0)
    sysz(z0, x0, t0)
    fx, fz = sysx.rhs, sysz.rhs

    def f(y, t):
        x, z = y[:nx], y[nx:]
        return np.concatenate((np.asarray(fx(x, z, t), dtype=float).reshape(-1),
                               np.asarray(fz(z, x, t), dtype=float).reshape(-1)))

    out = _rk4(f, np.concatenate((x0, z0)), t0, h, steps)
    return Trajectory(t0, h, out[:, :nx]), Trajectory(t0, h, out[:, nx:])


def replay_subsystem(sysz: SystemModel, z0, x_traj: Trajectory, h: float | None = None) -> Trajectory:
    """Integrate ``z' = fz(z, x(t), t)`` with ``x`` read off a recorded trajectory.

    This is the cascade form of a two-block loop: the partner block is
    replaced by its solution, interpolated linearly between samples.
    """
    h = x_traj.h if h is None else h
    ratio = x_traj.h / h
    if h <= 0 or abs(ratio - round(ratio)) > 1e-9 or round(ratio) < 1:
        raise GridMismatch(f"replay step {h!r} must divide the recorded step {x_traj.h!r}")
    if sysz.dim_u != x_traj.dim:
        raise DimMismatch(f"recorded trajectory has dimension {x_traj.dim}, subsystem expects {sysz.dim_u}")
    return integrate(sysz, z0, InputSignal.from_trajectory(x_traj), x_traj.t0, x_traj.t_end, h)
