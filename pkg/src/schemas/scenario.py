"""Scenario configuration Pydantic schemas.

Times are in seconds, matrices are row-major nested lists, and dynamic
systems are given as a static gain, state-space blocks, a transfer matrix
of {numerator, denominator} entries or a diagonal of such entries.
"""
from typing import Annotated, Literal

from pydantic import BaseModel, ConfigDict, Field, model_validator

Matrix = list[list[float]]
Vector = list[float]


class TransferEntry(BaseModel):
    """SISO z-domain transfer function, coefficients in descending powers."""

    numerator: Vector = Field(..., min_length=1)
    denominator: Vector = Field(..., min_length=1)


class StateSpaceBlocks(BaseModel):
    """State-space blocks {A, B, C, D}."""

    A: Matrix = Field(default_factory=list)
    B: Matrix = Field(default_factory=list)
    C: Matrix = Field(default_factory=list)
    D: Matrix


class SystemSpec(BaseModel):
    """Exactly one of gain / state_space / transfer / diagonal, optionally scaled."""

    model_config = ConfigDict(extra="forbid")

    gain: Matrix | None = None
    state_space: StateSpaceBlocks | None = None
    transfer: list[list[TransferEntry | None]] | None = None
    diagonal: list[TransferEntry] | None = None
    scale: float | None = None

    @model_validator(mode="after")
    def check_one_form(self) -> "SystemSpec":
        given = [name for name in ("gain", "state_space", "transfer", "diagonal") if getattr(self, name) is not None]
        if len(given) != 1:
            raise ValueError(f"system needs exactly one of gain/state_space/transfer/diagonal, got {given or 'none'}")
        return self


class PlantConfig(BaseModel):
    """Nominal plant model."""

    A: Matrix
    B: Matrix
    C: Matrix
    D: Matrix | None = None
    Ts: float = Field(default=0.1, gt=0)


class NoiseConfig(BaseModel):
    """Process and measurement noise covariances (scalar means σ²·I)."""

    process: float | Matrix | None = None
    measurement: float | Matrix | None = None


class ConstantComponent(BaseModel):
    kind: Literal["constant"] = "constant"
    value: float


class SineComponent(BaseModel):
    kind: Literal["sine"] = "sine"
    amplitude: float
    omega: float = Field(..., description="Angular frequency in rad/step")
    phase: float = 0.0


class GaussianComponent(BaseModel):
    kind: Literal["gaussian"] = "gaussian"
    mean: float = 0.0
    variance: float = Field(..., ge=0)


ProfileComponent = Annotated[ConstantComponent | SineComponent | GaussianComponent, Field(discriminator="kind")]


class ProfileConfig(BaseModel):
    """Per-channel sums of profile components; unlisted channels are zero."""

    channels: dict[int, list[ProfileComponent]] = Field(default_factory=dict)


class WindowConfig(BaseModel):
    """Closed-open activation window in seconds; end=None keeps it open."""

    start: float = Field(default=0.0, ge=0)
    end: float | None = None

    @model_validator(mode="after")
    def check_order(self) -> "WindowConfig":
        if self.end is not None and self.end < self.start:
            raise ValueError(f"window end {self.end} precedes start {self.start}")
        return self


class FaultConfig(BaseModel):
    """Sensor bias on one channel, or general E_f/F_f matrices."""

    kind: Literal["sensor_bias", "general"] = "sensor_bias"
    sensor: int | None = Field(default=None, ge=0)
    E_f: Matrix | None = None
    F_f: Matrix | None = None
    profile: ProfileConfig
    window: WindowConfig = Field(default_factory=WindowConfig)

    @model_validator(mode="after")
    def check_form(self) -> "FaultConfig":
        if self.kind == "sensor_bias" and self.sensor is None:
            raise ValueError("sensor_bias fault needs a sensor index")
        if self.kind == "general" and (self.E_f is None or self.F_f is None):
            raise ValueError("general fault needs both E_f and F_f")
        return self


class GainsConfig(BaseModel):
    """Explicit F/L gains, or LQ weights and the Kalman design from the noise."""

    F: Matrix | None = None
    L: Matrix | None = None
    Qx: float | Matrix = 1.0
    Ru: float | Matrix = 1.0
    W: Matrix | None = None
    V: Matrix | None = None


class ReferencePoint(BaseModel):
    time: float = Field(..., ge=0)
    value: Vector


class ReferenceSpec(BaseModel):
    """Piecewise-constant v̄, baseline v̄₀ (default: first value) and pre-filter Q_v."""

    points: list[ReferencePoint] = Field(..., min_length=1)
    vbar0: Vector | None = None
    Q_v: SystemSpec | None = None


class AdditiveAttackConfig(BaseModel):
    kind: Literal["additive"] = "additive"
    window: WindowConfig
    a_uMC: ProfileConfig = Field(default_factory=ProfileConfig)
    a_ryu: ProfileConfig | None = None
    a_y: ProfileConfig | None = None


class MultiplicativeAttackConfig(BaseModel):
    kind: Literal["multiplicative"] = "multiplicative"
    window: WindowConfig
    Pi: SystemSpec
    eps_u: ProfileConfig = Field(default_factory=ProfileConfig)
    eps_y: ProfileConfig = Field(default_factory=ProfileConfig)


class CovertAttackConfig(BaseModel):
    kind: Literal["covert"] = "covert"
    window: WindowConfig
    a_uMC: ProfileConfig


class FeedbackStealthAttackConfig(BaseModel):
    kind: Literal["feedback_stealth"] = "feedback_stealth"
    window: WindowConfig
    unitary: Literal["identity", "negative", "random"] = "negative"
    unitary_seed: int | None = None
    zeta_hat: Vector | None = None
    Sigma_hat: Matrix | None = None
    learning: WindowConfig | None = None
    learning_time: float = Field(default=10.0, gt=0, description="Seconds observed before activation")


AttackConfig = Annotated[
    AdditiveAttackConfig | MultiplicativeAttackConfig | CovertAttackConfig | FeedbackStealthAttackConfig,
    Field(discriminator="kind"),
]


class SwitchConfig(BaseModel):
    """Switching on/off LLR detector."""

    s: int = Field(default=30, ge=0)
    gamma: int = Field(default=500, ge=0)
    L0: float = Field(default=1e-4, gt=0)
    L_l: float | None = None
    L_u: float | None = None


class GlrConfig(BaseModel):
    """GLR detector on r_PDD; threshold calibrated when not given."""

    N: int = Field(default=50, ge=2)
    far: float = Field(default=0.01, gt=0, lt=1)
    threshold: float | None = None
    calibration_time: float = Field(default=300.0, gt=0)


class DetectorScheduleConfig(BaseModel):
    """Round-robin dwell times in seconds per detector family."""

    regular: float = Field(default=15.0, ge=0)
    additive: float = Field(default=5.0, ge=0)
    multiplicative: float = Field(default=5.0, ge=0)
    start: float = Field(default=0.0, ge=0)

    @model_validator(mode="after")
    def check_cycle(self) -> "DetectorScheduleConfig":
        if self.regular + self.additive + self.multiplicative <= 0:
            raise ValueError("detector schedule needs a positive cycle length")
        return self


class DetectorsConfig(BaseModel):
    """Detector selection."""

    alpha: float = Field(default=0.01, gt=0, lt=1)
    attack_chi2: bool = True
    switch: SwitchConfig | None = None
    glr: GlrConfig | None = None
    additive: bool = False
    schedule: DetectorScheduleConfig | None = None
    Sigma_ry: Matrix | None = None


class ReconfigurationEvent(BaseModel):
    """Parameter swap applied on both sides at the same step."""

    time: float = Field(..., ge=0)
    Q_r1: SystemSpec | None = None
    Q_r2: SystemSpec | None = None
    Q_uMC: SystemSpec | None = None

    @model_validator(mode="after")
    def check_payload(self) -> "ReconfigurationEvent":
        if self.Q_r1 is None and self.Q_r2 is None and self.Q_uMC is None:
            raise ValueError("reconfiguration event changes nothing")
        return self


class ModeGains(BaseModel):
    F: Matrix
    L: Matrix


class ModeSwitch(BaseModel):
    time: float = Field(..., ge=0)
    mode: int = Field(..., ge=0)


class RandomDwell(BaseModel):
    min_dwell: float = Field(..., gt=0)
    max_dwell: float = Field(..., gt=0)
    seed: int | None = None


class ModeSetConfig(BaseModel):
    """Alternative embedded gain modes (index 0 is the base gains)."""

    modes: list[ModeGains] = Field(..., min_length=1)
    schedule: list[ModeSwitch] | None = None
    random: RandomDwell | None = None

    @model_validator(mode="after")
    def check_schedule(self) -> "ModeSetConfig":
        if (self.schedule is None) == (self.random is None):
            raise ValueError("mode set needs exactly one of schedule/random")
        if self.schedule is not None:
            bad = [s.mode for s in self.schedule if s.mode > len(self.modes)]
            if bad:
                raise ValueError(f"mode indices {bad} exceed the {len(self.modes)} configured modes")
        return self


class ScenarioConfig(BaseModel):
    """Complete scenario definition."""

    model_config = ConfigDict(extra="forbid")

    name: str = Field(default="scenario", min_length=1)
    architecture: Literal["modified", "traditional"] = "modified"
    duration: float = Field(..., ge=0, description="Run length in seconds")
    seed: int | None = None
    plant: PlantConfig
    noise: NoiseConfig = Field(default_factory=NoiseConfig)
    fault: FaultConfig | None = None
    gains: GainsConfig = Field(default_factory=GainsConfig)
    Q_r1: SystemSpec
    Q_r2: SystemSpec
    Q_uMC: SystemSpec
    Q_youla: SystemSpec | None = None
    Psi: SystemSpec | None = None
    reference: ReferenceSpec
    attacks: list[AttackConfig] = Field(default_factory=list)
    detectors: DetectorsConfig = Field(default_factory=DetectorsConfig)
    reconfigurations: list[ReconfigurationEvent] = Field(default_factory=list)
    mode_set: ModeSetConfig | None = None

    @model_validator(mode="after")
    def check_references(self) -> "ScenarioConfig":
        windows = [("fault window", self.fault.window)] if self.fault is not None else []
        windows += [(f"{a.kind} attack window", a.window) for a in self.attacks]
        for name, w in windows:
            if w.start > self.duration or (w.end is not None and w.end > self.duration):
                raise ValueError(f"{name} [{w.start}, {w.end}) s exceeds the run length of {self.duration} s")
        for event in self.reconfigurations:
            if event.time > self.duration:
                raise ValueError(f"reconfiguration at {event.time} s exceeds the run length of {self.duration} s")
        needs_pdd = self.detectors.glr is not None or self.detectors.additive
        if needs_pdd and self.Psi is None:
            raise ValueError("GLR and additive-stealth detectors need Psi")
        if needs_pdd and self.architecture == "modified" and self.detectors.schedule is None:
            raise ValueError("GLR and additive-stealth detectors need a detector schedule with PDD phases")
        if self.detectors.schedule is not None and self.Psi is None:
            raise ValueError("a detector schedule with PDD phases needs Psi")
        if self.architecture == "traditional":
            if self.mode_set is not None or self.reconfigurations:
                raise ValueError("mode sets and reconfiguration apply to the modified configuration only")
            if needs_pdd or self.detectors.switch is not None or self.detectors.schedule is not None:
                raise ValueError("the traditional configuration supports the Kalman χ² detector only")
        return self
