"""Run record and experiment summary Pydantic schemas."""
from enum import Enum

from pydantic import BaseModel, Field


class RunStatus(str, Enum):
    """Run status enum."""

    RUNNING = "running"
    SUCCESS = "success"
    FAILURE = "failure"


class CheckResult(BaseModel):
    """One reproduced constant or property."""

    name: str
    value: float | None
    expected: float | None = None
    tolerance: float | None = None
    passed: bool
    note: str | None = None

    @classmethod
    def near(cls, name: str, value: float, expected: float, tolerance: float, note: str | None = None) -> "CheckResult":
        return cls(
            name=name,
            value=float(value),
            expected=float(expected),
            tolerance=float(tolerance),
            passed=bool(abs(value - expected) <= tolerance),
            note=note,
        )

    @classmethod
    def bound(cls, name: str, value: float, limit: float, above: bool = True, note: str | None = None) -> "CheckResult":
        """value >= limit (above) or value <= limit (below)."""
        ok = value >= limit if above else value <= limit
        return cls(name=name, value=float(value), expected=float(limit), passed=bool(ok), note=note)


class ExperimentSummary(BaseModel):
    """Outcome of one reproduced experiment."""

    experiment: str
    title: str
    checks: list[CheckResult] = Field(default_factory=list)
    metrics: dict[str, float] = Field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def to_text(self) -> str:
        lines = [f"{self.experiment}: {self.title}"]
        for c in self.checks:
            status = "PASS" if c.passed else "FAIL"
            expected = "" if c.expected is None else f" (expected {c.expected:.6g}"
            if c.expected is not None:
                expected += f" ± {c.tolerance:.3g})" if c.tolerance is not None else ")"
            value = "n/a" if c.value is None else f"{c.value:.6g}"
            note = f"  [{c.note}]" if c.note else ""
            lines.append(f"  {status}  {c.name} = {value}{expected}{note}")
        for key in sorted(self.metrics):
            lines.append(f"  metric {key} = {self.metrics[key]:.6g}")
        return "\n".join(lines)


class RunRecord(BaseModel):
    """Schema for a tracked run."""

    id: str
    name: str
    status: RunStatus
    started_at: str
    completed_at: str | None = None
    duration_seconds: float | None = None
    summary: str | None = None
    error_message: str | None = None
