"""Stability analyses of two-block interconnections.

Each analysis simulates the loop, replays every block against the recorded
trajectory of its partner (the cascade form), and collects named checks into
a report. Verdicts are evidence from finite horizons and sampled
parameters. ``stable-on-evidence`` means no check found a counterexample; it
is not a proof of asymptotic stability.
"""

from __future__ import annotations

import enum
import io
import math
from dataclasses import dataclass, field
from typing import Any, Callable, Optional, Sequence

import numpy as np

from .dynamics import (DEFAULT_STEP, InputSignal, SystemModel, Trajectory, _write, integrate,
                       integrate_coupled, replay_subsystem)
from .envelope import check_containment, envelope_corollary1
from .errors import EmptyGrid, NonFinite
from .funcalg import ComparisonFunction
from .report import VerificationReport, Violation, format_value

DEFAULT_K_VALUES = (0.1, 0.5, 0.9)


class Verdict(str, enum.Enum):
    STABLE = "stable-on-evidence"
    VIOLATED = "violated"
    INCONCLUSIVE = "inconclusive"


@dataclass(frozen=True)
class Check:
    """One named sub-result.

    ``status`` is ``pass``, ``fail`` or ``inconclusive``. Checks with
    ``required=False`` encode sufficient conditions only: their failure is
    recorded as ``inconclusive`` and never turns the verdict into ``violated``.
    """

    name: str
    status: str
    metrics: dict = field(default_factory=dict)
    witness: Any = None
    required: bool = True


@dataclass(frozen=True)
class StabilityReport:
    verdict: Verdict
    checks: tuple
    horizon: float
    tolerances: dict
    trajectories: tuple = field(default=(), repr=False)

    @classmethod
    def from_checks(cls, checks, horizon, tolerances, trajectories=()) -> "StabilityReport":
        checks = tuple(checks)
        if any(c.status == "fail" for c in checks):
            verdict = Verdict.VIOLATED
        elif all(c.status == "pass" for c in checks if c.required):
            verdict = Verdict.STABLE
        else:
            verdict = Verdict.INCONCLUSIVE
        return cls(verdict, checks, horizon, dict(tolerances), tuple(trajectories))

    def check(self, name: str) -> Check:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    @property
    def passed(self) -> bool:
        return self.verdict is Verdict.STABLE

    def to_text(self) -> str:
        lines = [f"verdict={self.verdict.value}", f"horizon={format_value(float(self.horizon))}",
                 "semantics=evidence from finite-horizon simulation, not a proof"]
        for key in sorted(self.tolerances):
            lines.append(f"tol.{key}={format_value(self.tolerances[key])}")
        for c in self.checks:
            lines.append(f"check.{c.name}.status={c.status}")
            for key in sorted(c.metrics):
                lines.append(f"check.{c.name}.{key}={format_value(c.metrics[key])}")
            if c.witness is not None:
                lines.append(f"check.{c.name}.witness={format_value(c.witness)}")
        return "\n".join(lines) + "\n"


# -- small gain -----------------------------------------------------------

def small_gain_check(gx: ComparisonFunction, gz: ComparisonFunction, s_grid) -> VerificationReport:
    """``gz(gx(s)) < s`` at every positive grid point; ``s = 0`` is checked as ``gz(gx(0)) = 0``.

    ``margin`` is ``min (s - gz(gx(s))) / s`` over the positive points.
    """
    s_grid = np.asarray(s_grid, dtype=float)
    pos = s_grid[s_grid > 0]
    if pos.size == 0:
        raise EmptyGrid("small-gain check needs positive grid points")
    found = []
    at_zero = float(gz(gx(0.0)))
    if abs(at_zero) > 1e-12:
        found.append(Violation(0.0, "loop gain at zero is not zero", at_zero))
    loop = np.array([float(gz(gx(float(s)))) for s in pos])
    margins = (pos - loop) / pos
    for s, c in zip(pos[loop >= pos], loop[loop >= pos]):
        found.append(Violation(float(s), "loop gain not below identity", float(c - s)))
    return VerificationReport("small_gain", tuple(found),
                              {"margin": float(margins.min()), "points": int(pos.size),
                               "loop_at_zero": at_zero})


def small_gain_table(gx, gz, s_grid) -> str:
    """CSV ``s,loop,margin`` for the sampled grid."""
    buf = io.StringIO()
    buf.write("s,loop,margin\n")
    for s in np.asarray(s_grid, dtype=float):
        c = float(gz(gx(float(s))))
        m = (s - c) / s if s > 0 else float("nan")
        buf.write(f"{format_value(float(s))},{format_value(c)},{format_value(float(m))}\n")
    return buf.getvalue()


# -- shared pieces --------------------------------------------------------

def _simulate(sysx, sysz, x0, z0, horizon, h):
    try:
        return integrate_coupled(sysx, sysz, x0, z0, 0.0, horizon, h), None
    except NonFinite as exc:
        return None, Check("simulation", "fail", {"blow_up_time": float(exc.t)}, witness=float(exc.t))


def _replay_check(name, sys, start, partner: Trajectory, recorded: Trajectory, tol) -> Check:
    try:
        replayed = replay_subsystem(sys, start, partner)
    except NonFinite as exc:
        return Check(name, "fail", {"blow_up_time": float(exc.t)}, witness=float(exc.t))
    err = np.abs(replayed.samples - recorded.samples).max(axis=1)
    # relative once the signal itself exceeds 1, so diverging loops are judged fairly
    scale = max(1.0, float(np.abs(recorded.samples).max()))
    worst = float(err.max()) / scale
    return Check(name, "pass" if worst <= tol else "fail",
                 {"max_error": float(err.max()), "scaled_error": worst},
                 witness=None if worst <= tol else float(recorded.times[int(err.argmax())]))


def _monotone_check(name, values: np.ndarray, times: np.ndarray, tol: float) -> Check:
    steps = np.diff(values)
    worst = float(steps.max()) if steps.size else 0.0
    metrics = {"max_step_increase": worst, "initial": float(values[0]), "terminal": float(values[-1])}
    if worst <= tol:
        return Check(name, "pass", metrics)
    return Check(name, "fail", metrics, witness=float(times[int(steps.argmax()) + 1]))


def _terminal_check(x_traj, z_traj, target, tol) -> Check:
    joint = np.concatenate((x_traj.final, z_traj.final))
    target = np.zeros_like(joint) if target is None else np.asarray(target, dtype=float).reshape(-1)
    dist = float(np.linalg.norm(joint - target))
    norms = np.linalg.norm(np.hstack((x_traj.samples, z_traj.samples)) - target, axis=1)
    metrics = {"terminal_distance": dist, "initial_distance": float(norms[0]),
               "distance_growing": bool(np.all(np.diff(norms[len(norms) // 2:]) > 0))}
    return Check("terminal", "pass" if dist <= tol else "fail", metrics,
                 witness=None if dist <= tol else dist)


def _joint_fn(fn, x_traj, z_traj) -> np.ndarray:
    return np.asarray(fn(x_traj.samples, z_traj.samples), dtype=float).reshape(-1)


# -- general two-block loop ----------------------------------------------

def default_replay_tol(h: float) -> float:
    """Replay tolerance matched to the step.

    The replayed block sees its partner through linear interpolation, so
    the mismatch shrinks like h^2: 1e-6 at h = 1e-3, scaled up for
    coarser steps and never tightened below 1e-6.
    """
    return 1e-6 * max(1.0, (h / 1e-3) ** 2)


def analyze_interconnection(sysx: SystemModel, sysz: SystemModel, x0, z0, horizon: float,
                            h: float = DEFAULT_STEP, *, gains=None, s_grid=None,
                            lyapunov: Callable | None = None, equilibrium=None,
                            terminal_tol: float = 1e-3, replay_tol: float | None = None,
                            lyapunov_tol: float = 1e-9, invariant: Callable | None = None,
                            invariant_tol: float = 1e-9, envelope: dict | None = None) -> StabilityReport:
    """Simulate, replay as a cascade, and gather evidence about the loop.

    ``gains=(gx, gz)`` (or certificates on both models) enables the
    small-gain check, which is advisory: failing it is inconclusive.
    ``lyapunov`` and ``invariant`` receive the sample arrays
    ``(x_samples, z_samples)`` and return one value per grid point.
    ``envelope={"k": ..., "beta": ...}`` adds a containment check of the
    x-block inside its certificate norm envelope (``envelope_corollary1``) (needs ``sysx.certificate``).
    """
    replay_tol = default_replay_tol(h) if replay_tol is None else replay_tol
    tolerances = {"terminal": terminal_tol, "replay": replay_tol, "lyapunov": lyapunov_tol}
    (trajs, failed) = _simulate(sysx, sysz, x0, z0, horizon, h)
    if failed is not None:
        return StabilityReport.from_checks([failed], horizon, tolerances)
    x_traj, z_traj = trajs
    checks = [Check("simulation", "pass", {"steps": x_traj.n - 1})]
    checks.append(_replay_check("cascade_z", sysz, z0, x_traj, z_traj, replay_tol))
    checks.append(_replay_check("cascade_x", sysx, x0, z_traj, x_traj, replay_tol))

    if gains is None and sysx.certificate is not None and sysz.certificate is not None:
        gains = (sysx.certificate.gain, sysz.certificate.gain)
    if gains is not None:
        grid = np.logspace(-3, 3, 121) if s_grid is None else s_grid
        sg = small_gain_check(gains[0], gains[1], grid)
        checks.append(Check("small_gain", "pass" if sg.passed else "inconclusive",
                            {"margin": sg.metrics["margin"], "violations": len(sg.violations)},
                            witness=None if sg.passed else sg.violations[0].where, required=False))

    if envelope is not None and sysx.certificate is not None:
        drive = InputSignal.from_trajectory(z_traj)
        rep = envelope_corollary1(sysx.certificate, envelope["k"], envelope["beta"], drive,
                                  x_traj.times, float(np.linalg.norm(x0)))
        rep = check_containment(x_traj, rep, envelope.get("tol", 1e-9))
        checks.append(Check("envelope_x", "pass" if rep.contained else "fail",
                            {"max_violation": rep.max_violation},
                            witness=rep.violation_times[0] if rep.violation_times else None))

    checks.append(_terminal_check(x_traj, z_traj, equilibrium, terminal_tol))
    if lyapunov is not None:
        checks.append(_monotone_check("lyapunov", _joint_fn(lyapunov, x_traj, z_traj),
                                      x_traj.times, lyapunov_tol))
    if invariant is not None:
        vals = _joint_fn(invariant, x_traj, z_traj)
        drift = float(np.max(np.abs(vals - vals[0])))
        checks.append(Check("invariant", "pass" if drift <= invariant_tol else "fail", {"drift": drift},
                            witness=None if drift <= invariant_tol else drift))
        tolerances["invariant"] = invariant_tol
    return StabilityReport.from_checks(checks, horizon, tolerances, (x_traj, z_traj))


# -- one block not ISS ----------------------------------------------------

def assumption4_check(sysz: SystemModel, gamma: ComparisonFunction, k_values=DEFAULT_K_VALUES,
                      z0_grid=(1.0,), horizon: float = 40.0, h: float = DEFAULT_STEP,
                      eps: float = 1e-3) -> VerificationReport:
    """Integrate ``z' = f2(t, -k gamma(z))`` for each sampled constant ``k`` in (0, 1).

    Passes iff every run ends with ``|z(horizon)| <= eps`` and none blows up.
    Runs are reported in sorted ``(k, z0)`` order.
    """
    ks = sorted(float(k) for k in k_values)
    if not ks or any(not 0.0 < k < 1.0 for k in ks):
        raise ValueError("k values must lie strictly inside (0, 1)")
    starts = sorted((np.atleast_1d(np.asarray(z, dtype=float)) for z in z0_grid), key=lambda a: tuple(a))
    if not starts:
        raise EmptyGrid("assumption4_check needs at least one initial state")
    found, runs = [], []
    for k in ks:
        closed = SystemModel(lambda z, _u, t, k=k: sysz.rhs(z, -k * gamma(z), t), sysz.dim_x,
                             name=f"{sysz.name or 'z'}|k={k}")
        for z0 in starts:
            key = (k, tuple(z0.tolist()) if z0.size > 1 else float(z0[0]))
            try:
                traj = integrate(closed, z0, None, 0.0, horizon, h)
            except NonFinite as exc:
                runs.append({"k": k, "z0": key[1], "terminal_norm": math.inf, "passed": False})
                found.append(Violation(key, f"blow-up at t={exc.t!r}", math.inf))
                continue
            final = float(np.linalg.norm(traj.final))
            ok = final <= eps
            runs.append({"k": k, "z0": key[1], "terminal_norm": final, "passed": ok})
            if not ok:
                found.append(Violation(key, f"|z(horizon)| = {final!r} > eps", final))
    return VerificationReport("assumption4", tuple(found),
                              {"runs": tuple(runs), "eps": eps, "horizon": horizon})


def runs_to_csv(report: VerificationReport, target=None) -> str:
    buf = io.StringIO()
    buf.write("k,z0,terminal_norm,passed\n")
    for r in report.metrics["runs"]:
        buf.write(f"{format_value(r['k'])},{format_value(r['z0'])},"
                  f"{format_value(r['terminal_norm'])},{format_value(r['passed'])}\n")
    text = buf.getvalue()
    _write(target, text)
    return text


def analyze_special_interconnection(sysx: SystemModel, sysz: SystemModel, gamma: ComparisonFunction,
                                    x0, z0, horizon: float, h: float = DEFAULT_STEP, *,
                                    k_values=DEFAULT_K_VALUES, lyapunov: Callable | None = None,
                                    terminal_tol: float = 0.05, lyapunov_tol: float = 1e-9,
                                    assumption_eps: float | None = None,
                                    assumption_h: float | None = None,
                                    replay_tol: float | None = None) -> StabilityReport:
    """Loop ``x' = f1(x, -z)`` (ISS, gain ``gamma``) with ``z' = f2(t, x)`` (not ISS).

    Evidence gathered: the reduced loop ``z' = f2(t, -k gamma(z))`` decays
    for sampled ``k`` (default threshold: below 99% of the starting norm at
    the horizon), the full loop settles to the origin within
    ``terminal_tol``, the cascade replays agree, and ``lyapunov`` (if given)
    never increases by more than ``lyapunov_tol`` per step.
    """
    if sysx.dim_x != 1 or sysz.dim_x != 1:
        raise ValueError("special interconnection analysis is for scalar x and z")
    z_mag = abs(float(np.asarray(z0, dtype=float).reshape(-1)[0])) or 1.0
    eps = 0.99 * z_mag if assumption_eps is None else assumption_eps
    replay_tol = default_replay_tol(h) if replay_tol is None else replay_tol
    a4 = assumption4_check(sysz, gamma, k_values, (z_mag, -z_mag), horizon,
                           assumption_h or max(h, 1e-2), eps)
    checks = [Check("assumption4", "pass" if a4.passed else "fail",
                    {"runs": len(a4.metrics["runs"]), "eps": eps},
                    witness=None if a4.passed else a4.violations[0].where)]
    tolerances = {"terminal": terminal_tol, "lyapunov": lyapunov_tol, "assumption_eps": eps,
                  "replay": replay_tol}
    trajs, failed = _simulate(sysx, sysz, x0, z0, horizon, h)
    if failed is not None:
        return StabilityReport.from_checks(checks + [failed], horizon, tolerances)
    x_traj, z_traj = trajs
    checks.append(Check("simulation", "pass", {"steps": x_traj.n - 1}))
    checks.append(_replay_check("cascade_z", sysz, z0, x_traj, z_traj, replay_tol))
    checks.append(_terminal_check(x_traj, z_traj, None, terminal_tol))
    if lyapunov is not None:
        checks.append(_monotone_check("lyapunov", _joint_fn(lyapunov, x_traj, z_traj),
                                      x_traj.times, lyapunov_tol))
    return StabilityReport.from_checks(checks, horizon, tolerances, (x_traj, z_traj))


# -- consensus ------------------------------------------------------------

def consensus_error_oracle(e0: float, t) -> np.ndarray:
    """Closed form of ``e' = -2 e^3``: ``e0 / sqrt(1 + 4 e0^2 t)``."""
    t = np.asarray(t, dtype=float)
    return e0 / np.sqrt(1.0 + 4.0 * e0 * e0 * t)


@dataclass(frozen=True)
class ConsensusReport:
    consensus_value: float
    conserved_quantity_drift: float
    error_decay_samples: np.ndarray = field(repr=False)
    oracle_max_error: float
    times: np.ndarray = field(repr=False)
    oracle: np.ndarray = field(repr=False)
    x_traj: Trajectory = field(repr=False)
    z_traj: Trajectory = field(repr=False)
    drift_tol: float = 1e-9
    oracle_tol: float = 1e-6

    @property
    def passed(self) -> bool:
        return self.conserved_quantity_drift <= self.drift_tol and self.oracle_max_error <= self.oracle_tol

    def error_at(self, t: float) -> float:
        i = int(round(t / (self.times[1] - self.times[0])))
        return float(self.error_decay_samples[i])

    def to_text(self) -> str:
        rows = {
            "verdict": "consensus-on-evidence" if self.passed else "violated",
            "consensus_value": self.consensus_value,
            "conserved_quantity_drift": self.conserved_quantity_drift,
            "oracle_max_error": self.oracle_max_error,
            "terminal_error": float(self.error_decay_samples[-1]),
            "tol.drift": self.drift_tol,
            "tol.oracle": self.oracle_tol,
        }
        return "".join(f"{k}={format_value(v)}\n" for k, v in rows.items())

    def to_csv(self, target=None) -> str:
        buf = io.StringIO()
        buf.write("t,x,z,e,e_oracle\n")
        for t, x, z, e, o in zip(self.times, self.x_traj.samples[:, 0], self.z_traj.samples[:, 0],
                                 self.error_decay_samples, self.oracle):
            buf.write(",".join(format_value(float(v)) for v in (t, x, z, e, o)) + "\n")
        text = buf.getvalue()
        _write(target, text)
        return text


def consensus_analyze(x0: float, z0: float, horizon: float, h: float = DEFAULT_STEP,
                      drift_tol: float = 1e-9, oracle_tol: float = 1e-6) -> ConsensusReport:
    """Two cubic agents ``x' = (z - x)^3``, ``z' = (x - z)^3``.

    The sum ``x + z`` is conserved, so the agreement value is ``(x0 + z0)/2``;
    the simulated disagreement ``x - z`` is compared with the closed form.
    """
    from .registry import get_example

    sysx, sysz = get_example("mas_cubic").pair
    x_traj, z_traj = integrate_coupled(sysx, sysz, [x0], [z0], 0.0, horizon, h)
    x, z = x_traj.samples[:, 0], z_traj.samples[:, 0]
    e = x - z
    oracle = consensus_error_oracle(float(x0) - float(z0), x_traj.times)
    return ConsensusReport(
        consensus_value=0.5 * float(x[-1] + z[-1]),
        conserved_quantity_drift=float(np.max(np.abs((x + z) - (float(x0) + float(z0))))),
        error_decay_samples=e,
        oracle_max_error=float(np.max(np.abs(e - oracle))),
        times=x_traj.times,
        oracle=oracle,
        x_traj=x_traj,
        z_traj=z_traj,
        drift_tol=drift_tol,
        oracle_tol=oracle_tol,
    )
