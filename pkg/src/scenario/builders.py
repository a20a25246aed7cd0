"""Turn a validated ScenarioConfig into the numerical objects of one run."""
import logging
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import linalg

from src.attacks.specs import (
    AdditiveAttack,
    AttackSchedule,
    AttackSpec,
    CovertAttack,
    FeedbackStealthAttack,
    MultiplicativeAttack,
    UnitaryChoice,
)
from src.config import settings
from src.errors import ConfigError, DimensionError
from src.factory.bezout import BezoutFactors, FactorGains, build_bezout_factors
from src.factory.modes import ModeSet, random_dwell_schedule
from src.factory.youla import YoulaParam
from src.mcstation.control import McConfig
from src.mcstation.detectors import SwitchDetectorConfig, build_switch_detector
from src.mcstation.performance import psi_design_margin
from src.mcstation.postfilter import attack_postfilter, design_attack_postfilter
from src.plantside.faults import FaultSpec
from src.plantside.profiles import Constant, Gaussian, Sine, VectorProfile, Window
from src.plantside.reference import PiecewiseReference, ReferenceConfig
from src.schemas.scenario import (
    AttackConfig,
    FaultConfig,
    ProfileConfig,
    ReconfigurationEvent,
    ScenarioConfig,
    SystemSpec,
    WindowConfig,
)
from src.sscore.connect import diagonal_transfer, scale, transfer_matrix
from src.sscore.riccati import kalman_gain, lq_gain
from src.sscore.statespace import NoiseSpec, StateSpaceModel, as_matrix

logger = logging.getLogger(__name__)

STEP_TOL = 1e-9
SILENT_FLOOR = 1e-30


def seconds_to_steps(seconds: float, Ts: float, name: str = "time") -> int:
    """Floor of seconds/Ts; fractional boundaries are rounded down with a warning."""
    exact = seconds / Ts
    steps = math.floor(exact + STEP_TOL)
    if abs(exact - round(exact)) > STEP_TOL:
        logger.warning(f"{name} {seconds} s is not a multiple of Ts={Ts} s; rounded down to step {steps}")
    return steps


def build_window(cfg: WindowConfig, Ts: float, name: str = "window") -> Window:
    end = None if cfg.end is None else seconds_to_steps(cfg.end, Ts, f"{name} end")
    return Window(seconds_to_steps(cfg.start, Ts, f"{name} start"), end)


def build_profile(cfg: ProfileConfig | None, dim: int) -> VectorProfile:
    if cfg is None:
        return VectorProfile.zero(dim)
    channels = {}
    for ch, parts in cfg.channels.items():
        comps = []
        for part in parts:
            if part.kind == "constant":
                comps.append(Constant(part.value))
            elif part.kind == "sine":
                comps.append(Sine(part.amplitude, part.omega, part.phase))
            else:
                comps.append(Gaussian(part.mean, part.variance))
        channels[int(ch)] = tuple(comps)
    return VectorProfile(dim, channels)


def build_system(spec: SystemSpec, Ts: float, name: str = "system") -> StateSpaceModel:
    """StateSpaceModel from one of the accepted system forms."""
    if spec.gain is not None:
        model = StateSpaceModel.static(as_matrix(spec.gain, name=name), Ts)
    elif spec.state_space is not None:
        blocks = spec.state_space
        D = as_matrix(blocks.D, name=f"{name}.D")
        n = len(blocks.A)
        A = as_matrix(blocks.A, n, n, f"{name}.A") if n else np.zeros((0, 0))
        B = as_matrix(blocks.B, n, D.shape[1], f"{name}.B") if n else np.zeros((0, D.shape[1]))
        C = as_matrix(blocks.C, D.shape[0], n, f"{name}.C") if n else np.zeros((D.shape[0], 0))
        model = StateSpaceModel(A, B, C, D, Ts)
    elif spec.transfer is not None:
        widths = {len(row) for row in spec.transfer}
        if len(widths) != 1:
            raise DimensionError(f"{name}: transfer matrix rows have different widths {sorted(widths)}")
        entries = [
            [([0.0], [1.0]) if e is None else (e.numerator, e.denominator) for e in row]
            for row in spec.transfer
        ]
        model = transfer_matrix(entries, Ts)
    else:
        model = diagonal_transfer([(e.numerator, e.denominator) for e in spec.diagonal], Ts)
    if spec.scale is not None:
        model = scale(model, spec.scale)
    return model


def build_plant(cfg: ScenarioConfig) -> StateSpaceModel:
    p = cfg.plant
    A = as_matrix(p.A, name="A")
    B = as_matrix(p.B, rows=A.shape[0], name="B")
    C = as_matrix(p.C, cols=A.shape[0], name="C")
    D = np.zeros((C.shape[0], B.shape[1])) if p.D is None else as_matrix(p.D, C.shape[0], B.shape[1], "D")
    return StateSpaceModel(A, B, C, D, p.Ts)


def _covariance(value, dim: int, name: str, floor: float) -> np.ndarray:
    if value is None:
        return settings.default_noise_variance * np.eye(dim)
    if isinstance(value, (int, float)):
        return max(float(value), floor) * np.eye(dim)
    return as_matrix(value, dim, dim, name)


def build_noise(cfg: ScenarioConfig, model: StateSpaceModel) -> NoiseSpec:
    """Scalars mean σ²·I; a zero measurement variance is lifted to a negligible floor."""
    return NoiseSpec(
        _covariance(cfg.noise.process, model.n, "Sigma_w", 0.0),
        _covariance(cfg.noise.measurement, model.outputs, "Sigma_nu", SILENT_FLOOR),
    )


def _steady_residual_cov(model: StateSpaceModel, L: np.ndarray, noise: NoiseSpec) -> np.ndarray:
    """Σ_ry = C P Cᵀ + Σ_ν with P the error covariance of the observer with gain L."""
    AL = model.A - L @ model.C
    P = linalg.solve_discrete_lyapunov(AL, noise.Sigma_w + L @ noise.Sigma_nu @ L.T)
    return model.C @ P @ model.C.T + noise.Sigma_nu


def build_gains(cfg: ScenarioConfig, model: StateSpaceModel, noise: NoiseSpec) -> tuple[FactorGains, np.ndarray]:
    """(F, L, W, V) and the steady Kalman residual covariance Σ_ry."""
    g = cfg.gains
    if g.F is not None:
        F = as_matrix(g.F, model.inputs, model.n, "F")
    else:
        F = lq_gain(model, _weight(g.Qx, model.n), _weight(g.Ru, model.inputs)).gain
    if g.L is not None:
        L = as_matrix(g.L, model.n, model.outputs, "L")
        Sigma_ry = _steady_residual_cov(model, L, noise)
    else:
        report = kalman_gain(model, noise)
        L, Sigma_ry = report.gain, report.innovation_cov
    if cfg.detectors.Sigma_ry is not None:
        Sigma_ry = as_matrix(cfg.detectors.Sigma_ry, model.outputs, model.outputs, "Sigma_ry")
    return FactorGains(F, L, g.W, g.V), Sigma_ry


def _weight(value, dim: int) -> np.ndarray:
    if isinstance(value, (int, float)):
        return float(value) * np.eye(dim)
    return as_matrix(value, dim, dim, "weight")


def build_fault(cfg: FaultConfig | None, model: StateSpaceModel) -> FaultSpec:
    if cfg is None:
        return FaultSpec.none(model)
    window = build_window(cfg.window, model.Ts, "fault window")
    if cfg.kind == "sensor_bias":
        if cfg.sensor >= model.outputs:
            raise DimensionError(f"fault sensor {cfg.sensor} outside the {model.outputs} outputs")
        return FaultSpec.sensor_bias(model, cfg.sensor, build_profile(cfg.profile, 1), window)
    E = as_matrix(cfg.E_f, rows=model.n, name="E_f")
    return FaultSpec(E, as_matrix(cfg.F_f, rows=model.outputs, name="F_f"), build_profile(cfg.profile, E.shape[1]), window)


def build_reference(cfg: ScenarioConfig, model: StateSpaceModel) -> ReferenceConfig:
    Ts = model.Ts
    points = [(seconds_to_steps(pt.time, Ts, "reference breakpoint"), pt.value) for pt in cfg.reference.points]
    vbar = PiecewiseReference(tuple(points))
    if cfg.reference.Q_v is not None:
        Q_v = build_system(cfg.reference.Q_v, Ts, "Q_v")
    else:
        if vbar.dim != model.inputs:
            raise DimensionError(f"reference has dimension {vbar.dim}; without Q_v it must match the {model.inputs} inputs")
        Q_v = StateSpaceModel.identity(model.inputs, Ts)
    if cfg.reference.vbar0 is None:
        return ReferenceConfig.with_default_baseline(vbar, Q_v)
    return ReferenceConfig(vbar, np.asarray(cfg.reference.vbar0, dtype=float), Q_v)


def build_attack(cfg: AttackConfig, model: StateSpaceModel, Q_r2: StateSpaceModel) -> AttackSpec:
    Ts = model.Ts
    m, p = model.inputs, model.outputs
    window = build_window(cfg.window, Ts, f"{cfg.kind} attack window")
    if cfg.kind == "additive":
        return AdditiveAttack(
            window=window,
            a_uMC=build_profile(cfg.a_uMC, m),
            a_ryu=None if cfg.a_ryu is None else build_profile(cfg.a_ryu, p),
            a_y=None if cfg.a_y is None else build_profile(cfg.a_y, p),
        )
    if cfg.kind == "multiplicative":
        return MultiplicativeAttack(
            window=window,
            Pi=build_system(cfg.Pi, Ts, "Pi^a"),
            eps_u=build_profile(cfg.eps_u, m),
            eps_y=build_profile(cfg.eps_y, p),
        )
    if cfg.kind == "covert":
        return CovertAttack(window=window, a_uMC=build_profile(cfg.a_uMC, m), Q_r2=Q_r2)
    learning = None if cfg.learning is None else build_window(cfg.learning, Ts, "learning window")
    return FeedbackStealthAttack(
        window=window,
        unitary=UnitaryChoice(cfg.unitary),
        zeta_hat=None if cfg.zeta_hat is None else np.asarray(cfg.zeta_hat, dtype=float),
        Sigma_hat=None if cfg.Sigma_hat is None else np.asarray(cfg.Sigma_hat, dtype=float),
        learning=learning,
        learning_frames=seconds_to_steps(cfg.learning_time, Ts, "learning time"),
        unitary_seed=cfg.unitary_seed,
    )


def build_mode_set(cfg: ScenarioConfig, factors: BezoutFactors, steps: int, seed: int) -> ModeSet | None:
    ms = cfg.mode_set
    if ms is None:
        return None
    Ts = factors.plant.Ts
    gains = [factors.gains] + [FactorGains(g.F, g.L) for g in ms.modes]
    if ms.schedule is not None:
        schedule = [(seconds_to_steps(s.time, Ts, "mode switch"), s.mode) for s in ms.schedule]
    else:
        rnd = ms.random
        rng = np.random.default_rng(seed if rnd.seed is None else rnd.seed)
        schedule = random_dwell_schedule(
            len(gains), steps,
            max(1, seconds_to_steps(rnd.min_dwell, Ts, "min dwell")),
            max(1, seconds_to_steps(rnd.max_dwell, Ts, "max dwell")),
            rng,
        )
    return ModeSet(gains, schedule)


@dataclass(frozen=True, eq=False)
class ReconfigurationPlan:
    """Parameter swap at a step, with models already built."""

    step: int
    Q_r1: StateSpaceModel | None = None
    Q_r2: StateSpaceModel | None = None
    Q_uMC: StateSpaceModel | None = None


def build_reconfiguration(event: ReconfigurationEvent, Ts: float) -> ReconfigurationPlan:
    return ReconfigurationPlan(
        step=seconds_to_steps(event.time, Ts, "reconfiguration time"),
        Q_r1=None if event.Q_r1 is None else build_system(event.Q_r1, Ts, "Q_r1"),
        Q_r2=None if event.Q_r2 is None else build_system(event.Q_r2, Ts, "Q_r2"),
        Q_uMC=None if event.Q_uMC is None else build_system(event.Q_uMC, Ts, "Q_uMC"),
    )


@dataclass(eq=False)
class ScenarioAssembly:
    """Everything a run needs, built once from the configuration."""

    config: ScenarioConfig
    seed: int
    steps: int
    model: StateSpaceModel
    noise: NoiseSpec
    fault: FaultSpec
    factors: BezoutFactors
    Sigma_ry: np.ndarray
    reference: ReferenceConfig
    Q_r1: StateSpaceModel
    Q_r2: StateSpaceModel
    Q_uMC: StateSpaceModel
    Psi: StateSpaceModel | None
    mc: McConfig | None
    youla: YoulaParam | None
    attacks: list[AttackSpec] = field(default_factory=list)
    reconfigurations: list[ReconfigurationPlan] = field(default_factory=list)
    mode_set: ModeSet | None = None
    switch: SwitchDetectorConfig | None = None
    psi_margin: dict[str, float] | None = None

    @property
    def Ts(self) -> float:
        return self.model.Ts

    @property
    def architecture(self) -> str:
        return self.config.architecture


def assemble(cfg: ScenarioConfig, seed: int | None = None, steps: int | None = None) -> ScenarioAssembly:
    """Build plant, factors, MC parameters, post-filters and attacks for ``cfg``.

    ``seed`` overrides the configured seed; ``steps`` overrides the run
    length derived from ``duration``.
    """
    model = build_plant(cfg)
    Ts = model.Ts
    m, p = model.inputs, model.outputs
    run_seed = seed if seed is not None else (cfg.seed if cfg.seed is not None else settings.seed)
    n_steps = steps if steps is not None else seconds_to_steps(cfg.duration, Ts, "duration")
    if n_steps < 0:
        raise ConfigError(f"run length must be non-negative, got {n_steps} steps")

    noise = build_noise(cfg, model)
    gains, Sigma_ry = build_gains(cfg, model, noise)
    factors = build_bezout_factors(model, gains)
    reference = build_reference(cfg, model)
    Q_r1 = build_system(cfg.Q_r1, Ts, "Q_r1")
    Q_r2 = build_system(cfg.Q_r2, Ts, "Q_r2")
    Q_uMC = build_system(cfg.Q_uMC, Ts, "Q_uMC")
    Psi = None if cfg.Psi is None else build_system(cfg.Psi, Ts, "Psi")

    mc = None
    youla = None
    switch = None
    margin = None
    if cfg.architecture == "modified":
        R = design_attack_postfilter(Q_r1, Sigma_ry)
        mc = McConfig(factors, Q_uMC, Q_r2, Q_r1, reference, Sigma_ry, Psi=Psi)
        mc = mc.with_postfilters(R, attack_postfilter(R, Q_r2, Q_uMC))
        sw = cfg.detectors.switch
        if sw is not None:
            switch = build_switch_detector(mc.Rbar, sw.s, sw.gamma, sw.L0, sw.L_l, sw.L_u)
        if Psi is not None:
            margin = psi_design_margin(factors, Psi, Q_uMC, Q_r1, Q_r2)
    else:
        Q = build_system(cfg.Q_youla, Ts, "Q") if cfg.Q_youla is not None else StateSpaceModel.zero(m, p, Ts)
        youla = YoulaParam(Q)
        youla.check_dims(factors)

    attacks = [build_attack(a, model, Q_r2) for a in cfg.attacks]
    AttackSchedule(cfg.architecture, tuple(attacks)).check(m, p, n_steps)

    fault = build_fault(cfg.fault, model)
    fault.window.check_within(n_steps, "fault window")
    plans = sorted((build_reconfiguration(e, Ts) for e in cfg.reconfigurations), key=lambda r: r.step)

    return ScenarioAssembly(
        config=cfg,
        seed=run_seed,
        steps=n_steps,
        model=model,
        noise=noise,
        fault=fault,
        factors=factors,
        Sigma_ry=Sigma_ry,
        reference=reference,
        Q_r1=Q_r1,
        Q_r2=Q_r2,
        Q_uMC=Q_uMC,
        Psi=Psi,
        mc=mc,
        youla=youla,
        attacks=attacks,
        reconfigurations=plans,
        mode_set=build_mode_set(cfg, factors, n_steps, run_seed),
        switch=switch,
        psi_margin=margin,
    )
