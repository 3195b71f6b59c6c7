"""Named example systems with machine-checkable facts.

Coupled entries are ``(sysx, sysz)`` pairs where each block takes the
other's state as its input. ``example4a``/``example4b`` are stored in the
"special interconnection" coordinates ``x' = f1(x, -z)``, ``z' = f2(t, x)``
used by :func:`isslab.analyzers.analyze_special_interconnection`; their
``extras`` carry the coordinate maps back to the original ``(x1, x2)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from . import funcalg as fa
from .dynamics import ISSCertificate, SystemModel, equilibrium_residual
from .errors import DomainError, UnknownExample
from .funcalg import ComparisonFunction, Kind
from .matrix_bounds import eigen_real_parts, jacobian

TAN_LIMIT = math.pi / 2 - 0.1


@dataclass(frozen=True)
class KnownFact:
    name: str
    check: Callable[[], bool]


@dataclass(frozen=True)
class ExampleEntry:
    name: str
    description: str
    model: Optional[SystemModel] = None
    pair: Optional[tuple] = None
    facts: tuple = ()
    extras: dict = field(default_factory=dict)

    def verify(self) -> dict:
        """Run every known fact; returns ``{fact name: bool}``."""
        return {f.name: bool(f.check()) for f in self.facts}


def _dims_ok(*systems) -> Callable[[], bool]:
    def check():
        for s in systems:
            x = np.linspace(0.1, 0.2, s.dim_x)
            u = np.full(s.dim_u, 0.1)
            if s(x, u, 0.0).shape != (s.dim_x,):
                return False
        return True
    return check


def _residual_fact(sys: SystemModel, grid, tol: float) -> KnownFact:
    return KnownFact(f"equilibrium residual <= {tol:g}",
                     lambda: equilibrium_residual(sys, grid) <= tol)


def _v_decreasing(rhs_pair, grad_v, lo=-1.0, hi=1.0, n=21) -> Callable[[], bool]:
    """grad V . f <= 0 on a square grid of (x, z)."""
    def check():
        pts = np.linspace(lo, hi, n)
        for x in pts:
            for z in pts:
                if float(np.dot(grad_v(x, z), rhs_pair(x, z))) > 1e-12:
                    return False
        return True
    return check


# -- builders -------------------------------------------------------------

def _example1() -> ExampleEntry:
    sysx = SystemModel(lambda x, z, t: z, 1, 1, name="example1.x")
    sysz = SystemModel(lambda z, x, t: -z - x, 1, 1, name="example1.z")
    joint = np.array([[0.0, 1.0], [-1.0, -1.0]])
    # Recast with the ISS block first: x <- z_orig (x' = -x - z), z <- x_orig (z' = x).
    sx = SystemModel(lambda x, z, t: -x - z, 1, 1, name="example1.special.x")
    sz = SystemModel(lambda z, x, t: x, 1, 1, name="example1.special.z")
    facts = (
        KnownFact("dimensions", _dims_ok(sysx, sysz)),
        KnownFact("eigen real parts == [-0.5, -0.5]",
                  lambda: np.allclose(eigen_real_parts(joint), [-0.5, -0.5], atol=1e-12)),
    )
    return ExampleEntry(
        "example1", "integrator x' = z driven by the ISS block z' = -z - x",
        pair=(sysx, sysz), facts=facts,
        extras={"joint_matrix": joint, "x0": 1.0, "z0": 1.0,
                "special": {"pair": (sx, sz), "gamma": fa.identity(),
                            "from_original": lambda x, z: (z, x)}},
    )


def _cubic_scalar() -> ExampleEntry:
    sys = SystemModel(lambda x, u, t: -x**3 + u, 1, 1, equilibrium_map=(fa.cube_root(),),
                      certificate=ISSCertificate(fa.power(2.0, 0.5), fa.power(2.0, 0.5),
                                                 fa.power(1.0 / 3.0, 2.0 ** (1.0 / 3.0)),
                                                 lyapunov=lambda x: 0.5 * float(np.dot(x, x))),
                      jacobian=lambda x, u, t: np.array([[-3.0 * x[0] ** 2]]), name="cubic_scalar")
    facts = (
        KnownFact("dimensions", _dims_ok(sys)),
        _residual_fact(sys, [1.0, 8.0, 27.0], 1e-12),
        _residual_fact(sys, np.linspace(-27.0, 27.0, 109), 1e-9),
    )
    return ExampleEntry("cubic_scalar", "x' = -x^3 + u, equilibrium cbrt(u)", model=sys, facts=facts)


def _tan_rhs(x, u, t):
    if np.any(np.abs(x) >= TAN_LIMIT) or np.any(np.abs(u) >= TAN_LIMIT):
        raise DomainError(f"tan_scalar needs |x|, |u| < {TAN_LIMIT!r}")
    return -np.tan(x) + np.tan(u)


def _tan_scalar() -> ExampleEntry:
    gamma = ComparisonFunction(lambda s: s, Kind.K, inverse=lambda y: y,
                               derivative=lambda s: 0.0 * np.asarray(s, dtype=float) + 1.0,
                               domain=TAN_LIMIT, name="s")
    sys = SystemModel(_tan_rhs, 1, 1, equilibrium_map=(gamma,),
                      jacobian=lambda x, u, t: np.array([[-1.0 / math.cos(x[0]) ** 2]]), name="tan_scalar")
    facts = (
        KnownFact("dimensions", _dims_ok(sys)),
        _residual_fact(sys, np.linspace(-1.4, 1.4, 57), 1e-9),
    )
    return ExampleEntry("tan_scalar", "x' = -tan x + tan u on |x|, |u| < pi/2 - 0.1",
                        model=sys, facts=facts, extras={"limit": TAN_LIMIT})


def _linear_scalar() -> ExampleEntry:
    half_square = fa.power(2.0, 0.5)
    sys = SystemModel(lambda x, u, t: -x + u, 1, 1, equilibrium_map=(fa.identity(),),
                      certificate=ISSCertificate(half_square, half_square, fa.linear(2.0),
                                                 lyapunov=lambda x: 0.5 * float(np.dot(x, x))),
                      jacobian=lambda x, u, t: np.array([[-1.0]]), name="linear_scalar")
    facts = (
        KnownFact("dimensions", _dims_ok(sys)),
        _residual_fact(sys, np.linspace(-5.0, 5.0, 41), 1e-12),
    )
    return ExampleEntry("linear_scalar", "x' = -x + u", model=sys, facts=facts)


def _example3_jacobian(x, u, t):
    return np.array([[-9.0 * x[0] ** 2, 9.0 * x[1] ** 2], [6.0 * x[0] ** 2, -6.0 * x[1] ** 2]])


def _example3() -> ExampleEntry:
    def rhs(x, u, t):
        x1, x2 = x
        return np.array([-3.0 * x1**3 + 3.0 * x2**3 + u[0], -2.0 * x2**3 + 2.0 * x1**3])

    sys = SystemModel(rhs, 2, 1, jacobian=_example3_jacobian, name="example3_coupled")
    fd = SystemModel(rhs, 2, 1, name="example3_coupled.fd")

    def det_zero():
        pts = np.linspace(-1.0, 1.0, 9)
        return all(abs(np.linalg.det(_example3_jacobian((a, b), None, 0.0))) <= 1e-9
                   for a in pts for b in pts)

    facts = (
        KnownFact("dimensions", _dims_ok(sys)),
        KnownFact("jacobian determinant identically zero", det_zero),
        KnownFact("finite-difference jacobian at (1,1) == [[-9,9],[6,-6]]",
                  lambda: np.allclose(jacobian(fd, [1.0, 1.0], [0.0]), [[-9, 9], [6, -6]], atol=1e-5)),
    )
    return ExampleEntry("example3_coupled", "x1' = -3x1^3 + 3x2^3 + u, x2' = -2x2^3 + 2x1^3",
                        model=sys, facts=facts, extras={"jacobian": _example3_jacobian})


def _example4a() -> ExampleEntry:
    # original: x1' = x2^3, x2' = -(1 + x1^2) x1 - x2; here x = x2, z = x1
    sysx = SystemModel(lambda x, z, t: -x - (1.0 + z**2) * z, 1, 1, name="example4a.x")
    sysz = SystemModel(lambda z, x, t: x**3, 1, 1, name="example4a.z")
    gamma = ComparisonFunction(lambda v: v + v**3, Kind.KINF, derivative=lambda v: 1.0 + 3.0 * v**2,
                               name="v+v^3")

    def lyapunov(x, z):
        return 0.5 * z**2 + 0.25 * z**4 + 0.25 * x**4

    facts = (
        KnownFact("dimensions", _dims_ok(sysx, sysz)),
        KnownFact("dV/dt = -x2^4 <= 0 on grid", _v_decreasing(
            lambda x, z: (-x - (1 + z**2) * z, x**3),
            lambda x, z: (x**3, z + z**3))),
    )
    return ExampleEntry(
        "example4a", "x1' = x2^3, x2' = -(1 + x1^2) x1 - x2", pair=(sysx, sysz), facts=facts,
        extras={"gamma": gamma, "lyapunov": lyapunov,
                "from_original": lambda x1, x2: (x2, x1), "to_original": lambda x, z: (z, x)},
    )


def _example4b() -> ExampleEntry:
    # original: x1' = -x1 + x2^3, x2' = -x1; here x = x1, z = -x2
    sysx = SystemModel(lambda x, z, t: -x - z**3, 1, 1, name="example4b.x")
    sysz = SystemModel(lambda z, x, t: x, 1, 1, name="example4b.z")
    gamma = fa.power(3.0)

    def lyapunov(x, z):
        return 0.5 * x**2 + 0.25 * z**4

    facts = (
        KnownFact("dimensions", _dims_ok(sysx, sysz)),
        KnownFact("dV/dt = -x1^2 <= 0 on grid", _v_decreasing(
            lambda x, z: (-x - z**3, x),
            lambda x, z: (x, z**3))),
    )
    return ExampleEntry(
        "example4b", "x1' = -x1 + x2^3, x2' = -x1", pair=(sysx, sysz), facts=facts,
        extras={"gamma": gamma, "lyapunov": lyapunov,
                "from_original": lambda x1, x2: (x1, -x2), "to_original": lambda x, z: (x, -z)},
    )


def _mas_cubic() -> ExampleEntry:
    sysx = SystemModel(lambda x, z, t: (z - x) ** 3, 1, 1, name="mas_cubic.x")
    sysz = SystemModel(lambda z, x, t: (x - z) ** 3, 1, 1, name="mas_cubic.z")

    def sum_conserved():
        pts = np.linspace(-2.0, 2.0, 17)
        return all(abs(float(sysx([a], [b])[0] + sysz([b], [a])[0])) == 0.0 for a in pts for b in pts)

    facts = (
        KnownFact("dimensions", _dims_ok(sysx, sysz)),
        KnownFact("x' + z' == 0", sum_conserved),
        KnownFact("gain loop composes to identity",
                  lambda: all(fa.compose(fa.identity(), fa.identity())(s) == s for s in (0.5, 1.0, 2.0))),
    )
    return ExampleEntry("mas_cubic", "two agents x' = (z - x)^3, z' = (x - z)^3", pair=(sysx, sysz),
                        facts=facts, extras={"gains": (fa.identity(), fa.identity())})


_BUILDERS = {
    "example1": _example1,
    "cubic_scalar": _cubic_scalar,
    "tan_scalar": _tan_scalar,
    "linear_scalar": _linear_scalar,
    "example3_coupled": _example3,
    "example4a": _example4a,
    "example4b": _example4b,
    "mas_cubic": _mas_cubic,
}
_REGISTRY = {name: build() for name, build in _BUILDERS.items()}


def get_example(name: str) -> ExampleEntry:
    try:
        return _REGISTRY[name]
    except KeyError:
        raise UnknownExample(name, sorted(_REGISTRY)) from None


def list_examples() -> list[tuple[str, str]]:
    return [(name, _REGISTRY[name].description) for name in sorted(_REGISTRY)]
