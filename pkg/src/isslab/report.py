"""Plain result containers and their flat ``key=value`` serialization."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any


def format_value(value: Any) -> str:
    """Render a scalar for text reports; floats keep full double precision."""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        if math.isnan(value):
            return "nan"
        return format(value, ".17g")
    if isinstance(value, (list, tuple)):
        return ",".join(format_value(v) for v in value)
    return str(value)


@dataclass(frozen=True)
class Violation:
    """One falsifying sample: where it happened and by how much."""

    where: Any
    message: str
    value: float = float("nan")


@dataclass(frozen=True)
class VerificationReport:
    """Outcome of a sampled (falsification-only) check.

    ``passed`` is true iff ``violations`` is empty. A pass says nothing about
    points outside the sampled grid.
    """

    name: str
    violations: tuple[Violation, ...] = ()
    metrics: dict[str, Any] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return not self.violations

    def __bool__(self) -> bool:
        return self.passed

    def to_lines(self, prefix: str = "") -> list[str]:
        lines = [f"{prefix}name={self.name}", f"{prefix}passed={format_value(self.passed)}",
                 f"{prefix}violations={len(self.violations)}"]
        for key in sorted(self.metrics):
            lines.append(f"{prefix}{key}={format_value(self.metrics[key])}")
        if self.violations:
            first = self.violations[0]
            lines.append(f"{prefix}first_violation={first.message} at {format_value(first.where)}")
        return lines

    def to_text(self) -> str:
        return "\n".join(self.to_lines()) + "\n"
