"""Pydantic schemas module."""
from .run import CheckResult, ExperimentSummary, RunRecord, RunStatus
from .scenario import (
    AdditiveAttackConfig,
    AttackConfig,
    CovertAttackConfig,
    DetectorScheduleConfig,
    DetectorsConfig,
    FaultConfig,
    FeedbackStealthAttackConfig,
    GainsConfig,
    GlrConfig,
    ModeSetConfig,
    MultiplicativeAttackConfig,
    NoiseConfig,
    PlantConfig,
    ProfileConfig,
    ReconfigurationEvent,
    ReferenceSpec,
    ScenarioConfig,
    SwitchConfig,
    SystemSpec,
    TransferEntry,
    WindowConfig,
)
from .verdict import Decision, DetectorVerdict, PerformanceReportModel, Polarity

__all__ = [
    "RunStatus",
    "RunRecord",
    "CheckResult",
    "ExperimentSummary",
    "Decision",
    "Polarity",
    "DetectorVerdict",
    "PerformanceReportModel",
    "ScenarioConfig",
    "SystemSpec",
    "TransferEntry",
    "PlantConfig",
    "NoiseConfig",
    "ProfileConfig",
    "WindowConfig",
    "FaultConfig",
    "GainsConfig",
    "ReferenceSpec",
    "AttackConfig",
    "AdditiveAttackConfig",
    "MultiplicativeAttackConfig",
    "CovertAttackConfig",
    "FeedbackStealthAttackConfig",
    "SwitchConfig",
    "GlrConfig",
    "DetectorScheduleConfig",
    "DetectorsConfig",
    "ReconfigurationEvent",
    "ModeSetConfig",
]
