"""Machine-checkable reports produced by every checker in the package.

A :class:`Certificate` bundles the individual :class:`Check` results that were
evaluated on finite data, the bound that was computed (always an exact
integer), an optional witness index and an overall :class:`Verdict`.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Any

# Cap on the number of violations stored per check; the first one is always kept.
MAX_VIOLATIONS = 20


class Verdict(str, Enum):
    CERTIFIED = "certified"
    FAILED = "failed"
    PREMISE_FAILED = "premise-failed"
    INCONCLUSIVE = "inconclusive"
    SOUNDNESS_ALARM = "soundness-alarm"


@dataclass
class Check:
    """Outcome of one finite check, e.g. one premise of a theorem."""

    name: str
    passed: bool = True
    checked_range: tuple[int, int] | None = None
    violations: list[Any] = field(default_factory=list)
    note: str = ""

    @property
    def first_violation(self) -> Any:
        return self.violations[0] if self.violations else None

    def fail(self, violation: Any) -> None:
        self.passed = False
        if len(self.violations) < MAX_VIOLATIONS:
            self.violations.append(violation)

    def to_dict(self) -> dict[str, Any]:
        return {
            "name": self.name,
            "passed": self.passed,
            "checked_range": list(self.checked_range) if self.checked_range else None,
            "first_violation": to_jsonable(self.first_violation),
            "violation_count_capped": len(self.violations),
            "note": self.note,
        }


@dataclass
class Certificate:
    scenario: str
    checks: list[Check] = field(default_factory=list)
    verdict: Verdict = Verdict.CERTIFIED
    bound: int | None = None
    witness: int | None = None
    notes: list[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.verdict is Verdict.CERTIFIED

    def check(self, name: str) -> Check:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    @property
    def failed_checks(self) -> list[str]:
        return [c.name for c in self.checks if not c.passed]

    def to_dict(self) -> dict[str, Any]:
        return {
            "scenario": self.scenario,
            "verdict": self.verdict.value,
            "bound": None if self.bound is None else str(self.bound),
            "witness": self.witness,
            "checks": [c.to_dict() for c in self.checks],
            "notes": list(self.notes),
        }


def from_checks(scenario: str, checks: list[Check], **kwargs: Any) -> Certificate:
    """Certificate whose verdict is CERTIFIED iff every check passed, else FAILED."""
    verdict = Verdict.CERTIFIED if all(c.passed for c in checks) else Verdict.FAILED
    return Certificate(scenario, checks, verdict, **kwargs)


def to_jsonable(value: Any) -> Any:
    """Render exact numbers as strings so that reports never lose precision."""
    if value is None or isinstance(value, (bool, str)):
        return value
    if isinstance(value, int):
        return value if abs(value) < 2**53 else str(value)
    if isinstance(value, Fraction):
        return str(value)
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, dict):
        return {str(k): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(v) for v in value]
    if hasattr(value, "tolist"):
        return to_jsonable(value.tolist())
    return str(value)
