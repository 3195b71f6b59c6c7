"""Command-line driver: scenario files in, CSV files and a verdict out.

Scenario files are line-oriented ``key = value`` pairs. ``#`` starts a
comment, dotted keys group related settings::

    system = mas_cubic
    analysis = consensus
    x0 = 1
    z0 = 0
    horizon = 10
    step = 0.001
    output = out/consensus

Every key and its default is listed in ``KEYS``. Unknown or repeated keys
are errors. Exit codes: 0 all verdicts pass, 1 a verdict failed, 2 usage or
parse problem, 3 numeric failure (blow-up, bracket not found, ...).
"""

from __future__ import annotations

import argparse
import math
import re
import sys
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Callable, Optional

import numpy as np

from . import analyzers, envelope
from . import funcalg as fa
from .dynamics import InputSignal, ISSCertificate, SystemModel, Trajectory, integrate, integrate_coupled
from .errors import DomainError, IsslabError, NonPositiveRate, NumericError, ParseError, UnknownExample
from .matrix_bounds import error_matrix, scalar_bounds
from .registry import ExampleEntry, get_example, list_examples
from .report import format_value

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2, 3

ANALYSES = ("simulate", "envelope-t1", "envelope-c1", "envelope-t2", "envelope-c2",
            "smallgain", "cascade", "assumption4", "consensus")
INPUT_KINDS = ("none", "constant", "sinusoid", "polynomial")


@dataclass(frozen=True)
class Scenario:
    analysis: tuple = ()
    system: str = ""
    x0: tuple = ()
    z0: tuple = ()
    horizon: float = 10.0
    step: float = 1e-3
    input_kind: str = "none"
    input_value: float = 0.0
    input_amplitude: float = 1.0
    input_frequency: float = 1.0
    input_phase: float = 0.0
    input_offset: float = 0.0
    input_coefficients: tuple = ()
    gain_x: str = ""
    gain_z: str = ""
    sgrid_min: float = 1e-3
    sgrid_max: float = 1e3
    sgrid_count: int = 121
    k: float = 1.0
    L: float = 1.0
    beta_scale: float = 1.0
    beta_rate: float = 1.0
    lambda1: Optional[float] = None
    lambda2: Optional[float] = None
    alpha1: str = ""
    alpha2: str = ""
    rho: str = ""
    k_values: tuple = analyzers.DEFAULT_K_VALUES
    eps: float = 1e-3
    z0_grid: tuple = ()
    equilibrium: tuple = ()
    tol_terminal: float = 1e-3
    tol_replay: Optional[float] = None
    tol_lyapunov: float = 1e-9
    tol_containment: float = 1e-9
    tol_drift: float = 1e-9
    tol_oracle: float = 1e-6
    output: str = "out"
    output_every: int = 1

    def to_text(self) -> str:
        """Canonical serialization; ``parse_scenario(s.to_text()) == s``."""
        lines = []
        for key, (attr, kind) in KEYS.items():
            value = getattr(self, attr)
            if value == getattr(DEFAULTS, attr) and key not in _ALWAYS_WRITTEN:
                continue
            lines.append(f"{key} = {_format(kind, value)}")
        return "\n".join(lines) + "\n"


DEFAULTS = Scenario()

# key -> (field, value kind)
KEYS = {
    "system": ("system", "str"),
    "analysis": ("analysis", "names"),
    "x0": ("x0", "floats"),
    "z0": ("z0", "floats"),
    "horizon": ("horizon", "float"),
    "step": ("step", "float"),
    "input.kind": ("input_kind", "str"),
    "input.value": ("input_value", "float"),
    "input.amplitude": ("input_amplitude", "float"),
    "input.frequency": ("input_frequency", "float"),
    "input.phase": ("input_phase", "float"),
    "input.offset": ("input_offset", "float"),
    "input.coefficients": ("input_coefficients", "floats"),
    "gain.x": ("gain_x", "str"),
    "gain.z": ("gain_z", "str"),
    "sgrid.min": ("sgrid_min", "float"),
    "sgrid.max": ("sgrid_max", "float"),
    "sgrid.count": ("sgrid_count", "int"),
    "k": ("k", "float"),
    "L": ("L", "float"),
    "beta.scale": ("beta_scale", "float"),
    "beta.rate": ("beta_rate", "float"),
    "lambda1": ("lambda1", "auto"),
    "lambda2": ("lambda2", "auto"),
    "cert.alpha1": ("alpha1", "str"),
    "cert.alpha2": ("alpha2", "str"),
    "cert.rho": ("rho", "str"),
    "assumption.k_values": ("k_values", "floats"),
    "assumption.eps": ("eps", "float"),
    "assumption.z0_grid": ("z0_grid", "floats"),
    "equilibrium": ("equilibrium", "floats"),
    "tol.terminal": ("tol_terminal", "float"),
    "tol.replay": ("tol_replay", "auto"),
    "tol.lyapunov": ("tol_lyapunov", "float"),
    "tol.containment": ("tol_containment", "float"),
    "tol.drift": ("tol_drift", "float"),
    "tol.oracle": ("tol_oracle", "float"),
    "output": ("output", "str"),
    "output.every": ("output_every", "int"),
}
_ALWAYS_WRITTEN = ("analysis", "horizon", "step")
assert {a for a, _ in KEYS.values()} == {f.name for f in fields(Scenario)}

_NEEDS_SYSTEM = {"simulate", "envelope-t1", "envelope-c1", "envelope-t2", "envelope-c2",
                 "cascade", "assumption4"}
_NEEDS_X0 = {"simulate", "envelope-t1", "envelope-c1", "envelope-t2", "envelope-c2", "cascade",
             "consensus"}


# -- value parsing ---------------------------------------------------------

def _format(kind: str, value) -> str:
    if kind in ("float", "int"):
        return repr(value)
    if kind == "auto":
        return "auto" if value is None else repr(value)
    if kind == "floats":
        return ", ".join(repr(v) for v in value)
    if kind == "names":
        return ", ".join(value)
    return value


def _convert(kind: str, text: str):
    if kind == "str":
        return text
    if kind == "names":
        return tuple(p.strip() for p in text.split(",") if p.strip())
    if kind == "int":
        return int(text)
    if kind == "auto" and text == "auto":
        return None
    if kind in ("float", "auto"):
        v = float(text)
        if not math.isfinite(v):
            raise ValueError("value must be finite")
        return v
    vals = tuple(float(p) for p in text.split(",") if p.strip())
    if not all(math.isfinite(v) for v in vals):
        raise ValueError("values must be finite")
    return vals


_GAIN = re.compile(r"^(?:(?P<c>[0-9.eE+-]+)\s*\*\s*)?s(?:\s*\^\s*(?P<p>[0-9.eE+-]+))?$")


def parse_gain(text: str) -> fa.ComparisonFunction:
    """``identity``, ``s``, ``c*s``, ``s^p`` or ``c*s^p`` (positive c and p)."""
    text = text.strip()
    if text == "identity":
        return fa.identity()
    m = _GAIN.match(text)
    if not m:
        raise ValueError(f"cannot read gain {text!r}; use identity, c*s, s^p or c*s^p")
    c = float(m.group("c")) if m.group("c") else 1.0
    p = float(m.group("p")) if m.group("p") else 1.0
    return fa.linear(c) if p == 1.0 else fa.power(p, c)


def parse_scenario(text: str) -> Scenario:
    """Read scenario text; raises ParseError with the offending line and key."""
    values: dict = {}
    seen: dict = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ParseError("expected 'key = value'", lineno)
        key, value = (p.strip() for p in line.split("=", 1))
        if key not in KEYS:
            raise ParseError("unknown key", lineno, key)
        if key in seen:
            raise ParseError(f"duplicate key (first set on line {seen[key]})", lineno, key)
        if not value:
            raise ParseError("empty value", lineno, key)
        attr, kind = KEYS[key]
        try:
            values[attr] = _convert(kind, value)
            if kind == "str" and key.startswith(("gain.", "cert.")):
                parse_gain(value)
        except ValueError as exc:
            raise ParseError(str(exc), lineno, key) from None
        seen[key] = lineno
    scenario = Scenario(**values)
    _validate(scenario, {KEYS[k][0]: n for k, n in seen.items()})
    return scenario


def _validate(s: Scenario, lines: dict) -> None:
    def fail(attr, reason):
        key = next(k for k, (a, _) in KEYS.items() if a == attr)
        raise ParseError(reason, lines.get(attr), key)

    if not s.analysis:
        fail("analysis", "at least one analysis is required")
    for name in s.analysis:
        if name not in ANALYSES:
            fail("analysis", f"unknown analysis {name!r}; choose from {', '.join(ANALYSES)}")
    if len(set(s.analysis)) != len(s.analysis):
        fail("analysis", "analysis listed twice")
    if not s.step > 0:
        fail("step", "step must be positive")
    if not s.horizon > 0:
        fail("horizon", "horizon must be positive")
    if s.input_kind not in INPUT_KINDS:
        fail("input_kind", f"input.kind must be one of {', '.join(INPUT_KINDS)}")
    if s.input_kind == "polynomial" and not s.input_coefficients:
        fail("input_coefficients", "polynomial input needs coefficients")
    if not 0 < s.sgrid_min < s.sgrid_max:
        fail("sgrid_max", "need 0 < sgrid.min < sgrid.max")
    if s.sgrid_count < 1:
        fail("sgrid_count", "sgrid.count must be at least 1")
    for attr in ("k", "L", "beta_scale", "beta_rate", "eps"):
        if not getattr(s, attr) > 0:
            fail(attr, "must be positive")
    for attr in ("lambda1", "lambda2"):
        v = getattr(s, attr)
        if v is not None and not v > 0:
            fail(attr, "rate must be positive")
    if (s.lambda1 is None) != (s.lambda2 is None):
        fail("lambda2", "give both lambda1 and lambda2, or neither")
    if s.lambda1 is not None and s.lambda1 > s.lambda2:
        fail("lambda2", "need lambda1 <= lambda2")
    if not s.k_values or not all(0 < k < 1 for k in s.k_values):
        fail("k_values", "k values must lie in (0, 1)")
    if any((getattr(s, f.name) or 0.0) < 0 for f in fields(s) if f.name.startswith("tol_")):
        fail(next(f.name for f in fields(s) if f.name.startswith("tol_") and (getattr(s, f.name) or 0.0) < 0),
             "tolerance must be nonnegative")
    if s.output_every < 1:
        fail("output_every", "output.every must be at least 1")
    chosen = set(s.analysis)
    if chosen & _NEEDS_SYSTEM and not s.system:
        fail("system", f"required by {sorted(chosen & _NEEDS_SYSTEM)[0]}")
    if chosen & _NEEDS_X0 and not s.x0:
        fail("x0", f"required by {sorted(chosen & _NEEDS_X0)[0]}")
    if "consensus" in chosen and not s.z0:
        fail("z0", "required by consensus")
    if "smallgain" in chosen and not s.system and not (s.gain_x and s.gain_z):
        fail("gain_x", "smallgain needs gain.x and gain.z, or a system that carries gains")


# -- scenario execution ----------------------------------------------------

class ScenarioError(IsslabError, ValueError):
    """Scenario is well formed but does not fit the chosen system."""


@dataclass(frozen=True)
class Outcome:
    name: str
    passed: bool
    lines: tuple
    files: dict  # file name -> CSV text


def _input(s: Scenario) -> Optional[InputSignal]:
    if s.input_kind == "constant":
        return InputSignal.constant(s.input_value)
    if s.input_kind == "sinusoid":
        return InputSignal.sinusoid(s.input_amplitude, s.input_frequency, s.input_phase, s.input_offset)
    if s.input_kind == "polynomial":
        return InputSignal.polynomial(s.input_coefficients)
    return None


def _model(entry: ExampleEntry, analysis: str) -> SystemModel:
    if entry.model is None:
        raise ScenarioError(f"{analysis} needs a single-block system; {entry.name} is a coupled pair")
    return entry.model


def _pair(entry: ExampleEntry, analysis: str):
    if entry.pair is None:
        raise ScenarioError(f"{analysis} needs a coupled pair; {entry.name} is a single block")
    return entry.pair


def _certificate(s: Scenario, sys: SystemModel) -> ISSCertificate:
    base = sys.certificate
    parts = []
    for attr in ("alpha1", "alpha2", "rho"):
        text = getattr(s, attr)
        if text:
            parts.append(parse_gain(text))
        elif base is not None:
            parts.append(getattr(base, attr))
        else:
            raise ScenarioError(f"{sys.name} carries no certificate; set cert.alpha1, cert.alpha2, cert.rho")
    return ISSCertificate(*parts)


def _alpha4(cert: ISSCertificate) -> Callable:
    """Gradient of ``alpha2(rho(|u|))`` with respect to ``u``."""
    outer = fa.compose(cert.alpha2, cert.rho)

    def grad(u):
        u = np.atleast_1d(np.asarray(u, dtype=float))
        r = float(np.linalg.norm(u))
        if r == 0.0:
            return np.zeros_like(u)
        return fa.derivative(outer, r) * u / r

    return grad


def _beta(s: Scenario) -> fa.ClassKLFunction:
    return fa.kl_exponential(s.beta_scale, s.beta_rate)


def _rate(value: float) -> Callable:
    return lambda t: value


def _input_or_zero(s: Scenario, sys: SystemModel) -> Optional[InputSignal]:
    u = _input(s)
    if u is None and sys.dim_u:
        return InputSignal.constant(np.zeros(sys.dim_u))
    return u


def _envelope_rates(s: Scenario, sys: SystemModel, u: InputSignal, grid) -> tuple[float, float]:
    if s.lambda1 is not None:
        return s.lambda1, s.lambda2
    us = u.sample(grid)[:, 0]
    probes = np.quantile(us, [0.0, 0.25, 0.5, 0.75, 1.0])
    gam = np.array([sys.equilibrium(v) for v in probes])
    x0 = np.asarray(s.x0, dtype=float)
    radius = float(np.max(np.linalg.norm(x0 - gam, axis=1)) + np.ptp(gam, axis=0).max() + 1e-6)
    slow, fast = math.inf, 0.0
    for v in probes:
        lo, hi = scalar_bounds(error_matrix(sys, v, radius), shells=16, samples_per_shell=16).rates()
        slow, fast = min(slow, lo), max(fast, hi)
    if not slow > 0:
        raise NonPositiveRate(f"sampled error Jacobian has a nonnegative eigenvalue (rate {slow!r}); "
                              "set lambda1 and lambda2 explicitly")
    return slow, fast


def _run_simulate(s: Scenario, entry: ExampleEntry) -> Outcome:
    if entry.pair is not None:
        sysx, sysz = entry.pair
        z0 = s.z0 or (0.0,) * sysz.dim_x
        xt, zt = integrate_coupled(sysx, sysz, s.x0, z0, 0.0, s.horizon, s.step)
        traj = Trajectory(0.0, s.step, np.hstack((xt.samples, zt.samples)))
        labels = [f"x{i + 1}" for i in range(xt.dim)] + [f"z{i + 1}" for i in range(zt.dim)]
        csv = traj.to_csv(labels=labels)
    else:
        sys = entry.model
        traj = integrate(sys, s.x0, _input_or_zero(s, sys), 0.0, s.horizon, s.step)
        csv = traj.to_csv()
    lines = (f"final={format_value([float(v) for v in traj.final])}", f"samples={traj.n}")
    return Outcome("simulate", True, lines, {"simulate.csv": csv})


def _run_envelope(s: Scenario, entry: ExampleEntry, which: str) -> Outcome:
    sys = _model(entry, which)
    u = _input_or_zero(s, sys)
    traj = integrate(sys, s.x0, u, 0.0, s.horizon, s.step)
    grid = traj.times
    s0 = float(np.linalg.norm(s.x0))
    if which == "envelope-t1":
        cert = _certificate(s, sys)
        params = envelope.EnvelopeParams(k=_rate(s.k), L=s.L, alpha4=_alpha4(cert), beta=_beta(s))
        rep = envelope.envelope_theorem1(cert, params, u, grid, s0)
    elif which == "envelope-c1":
        rep = envelope.envelope_corollary1(_certificate(s, sys), _rate(s.k), _beta(s), u, grid, s0)
    elif which == "envelope-t2":
        slow, fast = _envelope_rates(s, sys, u, grid)
        params = envelope.EnvelopeParams(lambda1=_rate(slow), lambda2=_rate(fast))
        rep = envelope.envelope_theorem2(sys, params, u, grid, s.x0)
    else:
        rep = envelope.envelope_corollary2(sys, _rate(s.k), _beta(s), u, grid, s0)
    rep = envelope.check_containment(traj, rep, s.tol_containment)
    lines = (f"contained={format_value(bool(rep.contained))}",
             f"max_violation={format_value(rep.max_violation)}",
             f"violations={len(rep.violation_times)}")
    return Outcome(which, bool(rep.contained), lines, {f"{which}.csv": rep.to_csv()})


def _gains(s: Scenario, entry: Optional[ExampleEntry]):
    if s.gain_x and s.gain_z:
        return parse_gain(s.gain_x), parse_gain(s.gain_z)
    if entry is not None and "gains" in entry.extras:
        return entry.extras["gains"]
    if entry is not None and entry.pair is not None:
        sx, sz = entry.pair
        if sx.certificate is not None and sz.certificate is not None:
            return sx.certificate.gain, sz.certificate.gain
    raise ScenarioError("no gains: set gain.x and gain.z")


def _sgrid(s: Scenario) -> np.ndarray:
    if s.sgrid_count == 1:
        return np.array([s.sgrid_min])
    return np.logspace(math.log10(s.sgrid_min), math.log10(s.sgrid_max), s.sgrid_count)


def _run_smallgain(s: Scenario, entry: Optional[ExampleEntry]) -> Outcome:
    gx, gz = _gains(s, entry)
    grid = _sgrid(s)
    rep = analyzers.small_gain_check(gx, gz, grid)
    lines = tuple(rep.to_lines()) + (f"failing_points={len(rep.violations)}",)
    return Outcome("smallgain", rep.passed, lines, {"smallgain.csv": analyzers.small_gain_table(gx, gz, grid)})


def _stability_lines(rep) -> tuple:
    return tuple(rep.to_text().splitlines())


def _run_cascade(s: Scenario, entry: ExampleEntry) -> Outcome:
    sysx, sysz = _pair(entry, "cascade")
    z0 = s.z0 or (0.0,) * sysz.dim_x
    gains = None
    try:
        gains = _gains(s, entry)
    except ScenarioError:
        pass
    rep = analyzers.analyze_interconnection(
        sysx, sysz, s.x0, z0, s.horizon, s.step, gains=gains, s_grid=_sgrid(s),
        lyapunov=entry.extras.get("lyapunov"), equilibrium=s.equilibrium or None,
        terminal_tol=s.tol_terminal, replay_tol=s.tol_replay, lyapunov_tol=s.tol_lyapunov)
    files = {}
    if rep.trajectories:
        xt, zt = rep.trajectories
        joint = Trajectory(0.0, s.step, np.hstack((xt.samples, zt.samples)))
        labels = [f"x{i + 1}" for i in range(xt.dim)] + [f"z{i + 1}" for i in range(zt.dim)]
        files["cascade.csv"] = joint.to_csv(labels=labels)
    return Outcome("cascade", rep.passed, _stability_lines(rep), files)


def _run_assumption4(s: Scenario, entry: ExampleEntry) -> Outcome:
    special = entry.extras.get("special")
    if special is not None:
        (_, sysz), gamma = special["pair"], special["gamma"]
    elif "gamma" in entry.extras:
        (_, sysz), gamma = _pair(entry, "assumption4"), entry.extras["gamma"]
    else:
        raise ScenarioError(f"{entry.name} has no gain for the reduced loop")
    starts = s.z0_grid or s.z0 or (1.0,)
    rep = analyzers.assumption4_check(sysz, gamma, s.k_values, starts, s.horizon, s.step, s.eps)
    lines = (f"runs={len(rep.metrics['runs'])}",
             f"eps={format_value(s.eps)}", f"failing_runs={len(rep.violations)}")
    return Outcome("assumption4", rep.passed, lines, {"assumption4.csv": analyzers.runs_to_csv(rep)})


def _run_consensus(s: Scenario, entry: Optional[ExampleEntry]) -> Outcome:
    if entry is not None and entry.name != "mas_cubic":
        raise ScenarioError("consensus analysis is defined for mas_cubic")
    rep = analyzers.consensus_analyze(s.x0[0], s.z0[0], s.horizon, s.step, s.tol_drift, s.tol_oracle)
    return Outcome("consensus", rep.passed, tuple(rep.to_text().splitlines()),
                   {"consensus.csv": rep.to_csv()})


def execute(s: Scenario) -> list[Outcome]:
    """Run every selected analysis (in the listed order) and return the outcomes."""
    entry = get_example(s.system) if s.system else None
    out = []
    for name in s.analysis:
        if name == "simulate":
            out.append(_run_simulate(s, entry))
        elif name.startswith("envelope-"):
            out.append(_run_envelope(s, entry, name))
        elif name == "smallgain":
            out.append(_run_smallgain(s, entry))
        elif name == "cascade":
            out.append(_run_cascade(s, entry))
        elif name == "assumption4":
            out.append(_run_assumption4(s, entry))
        else:
            out.append(_run_consensus(s, entry))
    return out


def _decimate(csv: str, every: int) -> str:
    if every == 1:
        return csv
    lines = csv.splitlines()
    header = lines[0]
    data = [ln for ln in lines[1:] if not ln.startswith("#")]
    footer = [ln for ln in lines[1:] if ln.startswith("#")]
    kept = data[::every]
    if data and kept[-1] is not data[-1]:
        kept.append(data[-1])
    return "\n".join([header, *kept, *footer]) + "\n"


def verdict_text(s: Scenario, outcomes: list[Outcome]) -> str:
    lines = [f"system={s.system or '-'}", f"analysis={', '.join(s.analysis)}"]
    for o in outcomes:
        lines.append(f"{o.name}.passed={format_value(o.passed)}")
        lines.extend(f"{o.name}.{ln}" for ln in o.lines if not ln.startswith("passed="))
    lines.append(f"passed={format_value(all(o.passed for o in outcomes))}")
    return "\n".join(lines) + "\n"


def write_outputs(s: Scenario, outcomes: list[Outcome], out_dir: Path) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    for o in outcomes:
        for fname, text in o.files.items():
            with open(out_dir / fname, "w", newline="\n") as fh:
                fh.write(_decimate(text, s.output_every))
    with open(out_dir / "verdict.txt", "w", newline="\n") as fh:
        fh.write(verdict_text(s, outcomes))


def run(scenario_path, out_dir=None, stream=None) -> int:
    """Load, execute and write a scenario; returns the exit status.

    Relative ``output`` paths are resolved against the scenario file's folder.
    """
    err = stream or sys.stderr
    path = Path(scenario_path)
    try:
        text = path.read_text()
    except OSError as exc:
        print(f"error: cannot read scenario {str(path)!r}: {exc.strerror or exc}", file=err)
        return EXIT_USAGE
    try:
        scenario = parse_scenario(text)
        outcomes = execute(scenario)
    except ParseError as exc:
        print(f"error: {path.name}: {exc}", file=err)
        return EXIT_USAGE
    except (NumericError, DomainError) as exc:
        print(f"numeric error: {type(exc).__name__}: {exc}", file=err)
        return EXIT_NUMERIC
    except (UnknownExample, IsslabError) as exc:
        print(f"error: {exc}", file=err)
        return EXIT_USAGE
    target = Path(out_dir) if out_dir is not None else path.parent / scenario.output
    write_outputs(scenario, outcomes, target)
    return EXIT_OK if all(o.passed for o in outcomes) else EXIT_FAIL


# -- argparse front end ----------------------------------------------------

def _floats(text: str) -> tuple:
    try:
        return tuple(float(p) for p in text.split(",") if p.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _positive(text: str) -> float:
    v = float(text)
    if not v > 0:
        raise argparse.ArgumentTypeError("must be positive")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="isslab", description="ISS envelopes and interconnection checks.")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run a scenario file")
    r.add_argument("scenario")
    r.add_argument("--out", help="output folder (overrides the scenario's output key)")

    sub.add_parser("list-examples", help="list registered systems")

    s = sub.add_parser("simulate", help="simulate a registered system and write a CSV")
    s.add_argument("example")
    s.add_argument("--x0", type=_floats, required=True)
    s.add_argument("--z0", type=_floats, default=())
    s.add_argument("--horizon", type=_positive, required=True)
    s.add_argument("--step", type=_positive, default=1e-3)
    s.add_argument("--u", type=float, default=None, help="constant input for single-block systems")
    s.add_argument("--out", required=True, help="CSV path, or - for stdout")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "list-examples":
        for name, desc in list_examples():
            print(f"{name}\t{desc}")
        return EXIT_OK
    if args.command == "run":
        return run(args.scenario, args.out)

    kw = {"z0": args.z0} if args.z0 else {}
    if args.u is not None:
        kw.update(input_kind="constant", input_value=args.u)
    scenario = Scenario(analysis=("simulate",), system=args.example, x0=args.x0,
                        horizon=args.horizon, step=args.step, **kw)
    try:
        outcome = _run_simulate(scenario, get_example(args.example))
    except (NumericError, DomainError) as exc:
        print(f"numeric error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except IsslabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    csv = outcome.files["simulate.csv"]
    if args.out == "-":
        sys.stdout.write(csv)
    else:
        with open(args.out, "w", newline="\n") as fh:
            fh.write(csv)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
