"""Detector verdict and performance report Pydantic schemas."""
from enum import Enum

from pydantic import BaseModel, Field, model_validator


class Decision(str, Enum):
    """Detector decision enum."""

    ALARM = "alarm"
    CLEAR = "clear"


class Polarity(str, Enum):
    """Side of the threshold that raises an alarm."""

    ABOVE = "above"
    BELOW = "below"


class DetectorVerdict(BaseModel):
    """Schema for one detector evaluation."""

    detector: str
    k0: int = Field(..., ge=0, description="Window anchor step")
    statistic: float
    threshold: float
    decision: Decision
    polarity: Polarity = Polarity.ABOVE
    branch: str | None = Field(default=None, description="Branch label of piecewise statistics")

    @model_validator(mode="after")
    def check_decision(self) -> "DetectorVerdict":
        if self.polarity == Polarity.ABOVE:
            alarm = self.statistic > self.threshold
        else:
            alarm = self.statistic < self.threshold
        if alarm != (self.decision == Decision.ALARM):
            raise ValueError(
                f"decision {self.decision.value} inconsistent with statistic {self.statistic} "
                f"vs threshold {self.threshold} ({self.polarity.value})"
            )
        return self

    @classmethod
    def judge(
        cls,
        detector: str,
        k0: int,
        statistic: float,
        threshold: float,
        polarity: Polarity = Polarity.ABOVE,
        branch: str | None = None,
    ) -> "DetectorVerdict":
        """Build a verdict whose decision follows from the statistic."""
        alarm = statistic > threshold if polarity == Polarity.ABOVE else statistic < threshold
        return cls(
            detector=detector,
            k0=k0,
            statistic=float(statistic),
            threshold=float(threshold),
            decision=Decision.ALARM if alarm else Decision.CLEAR,
            polarity=polarity,
            branch=branch,
        )

    @property
    def alarm(self) -> bool:
        return self.decision == Decision.ALARM


class PerformanceReportModel(BaseModel):
    """Schema for resilient/fault-tolerant performance checks."""

    gamma_theta_a: float = Field(..., ge=0)
    gamma_ry: float = Field(..., ge=0)
    target_theta_a: float | None = None
    target_ry: float | None = None
    pass_theta_a: bool | None = None
    pass_ry: bool | None = None

    def to_text(self) -> str:
        lines = [
            f"gamma_theta_a = {self.gamma_theta_a:.10g}",
            f"gamma_ry = {self.gamma_ry:.10g}",
        ]
        if self.target_theta_a is not None:
            lines.append(f"target_theta_a = {self.target_theta_a:.10g} -> {'PASS' if self.pass_theta_a else 'FAIL'}")
        if self.target_ry is not None:
            lines.append(f"target_ry = {self.target_ry:.10g} -> {'PASS' if self.pass_ry else 'FAIL'}")
        return "\n".join(lines)
