"""Deterministic execution of one scenario: plant, channel and MC-station in lock-step."""
import logging
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from src.attacks.channel import AttackChannel
from src.config import settings
from src.errors import DivergenceError
from src.mcstation.control import McStation
from src.mcstation.detectors import AttackResidualChi2, SwitchingLlr
from src.mcstation.pdd import (
    DEFAULT_GLR_WINDOW,
    AdditiveStealthChi2,
    GlrDetector,
    PddConfig,
    calibrate_glr_threshold,
    estimate_pdd_covariance,
)
from src.mcstation.performance import reconfigure, resilient_performance_check
from src.mcstation.traditional import TraditionalMc
from src.plantside.fd import KalmanChi2Detector
from src.plantside.runtime import PlantProcess, PlantRuntime
from src.scenario.builders import ReconfigurationPlan, ScenarioAssembly, assemble, seconds_to_steps
from src.scenario.loader import config_echo
from src.schemas.scenario import DetectorsConfig, GlrConfig, ScenarioConfig
from src.schemas.verdict import DetectorVerdict
from src.services.detector_scheduler import PDD_FAMILIES, DetectorFamily, DetectorScheduler
from src.services.frame_bus import FrameBus
from src.sscore.affine import solve_affine

logger = logging.getLogger(__name__)

REGULAR_DETECTOR = "attack_chi2"
PLANT_DETECTOR = "kalman_chi2"


@dataclass(eq=False)
class RunLog:
    """Trajectories, verdicts and reports of one run.

    Row k of every trajectory array holds step k. Signals a configuration
    does not produce (r_u and r_yu in the traditional configuration, r_PDD
    without Ψ) are NaN.
    """

    name: str
    architecture: str
    seed: int
    Ts: float
    config: dict
    k: np.ndarray
    u: np.ndarray
    y: np.ndarray
    y_true: np.ndarray
    r_y: np.ndarray
    r_u: np.ndarray
    r_yu: np.ndarray
    J_rel: np.ndarray
    r_pdd: np.ndarray
    pdd: np.ndarray
    mode: np.ndarray
    a_plant: np.ndarray
    a_mc: np.ndarray
    verdicts: list[DetectorVerdict] = field(default_factory=list)
    reports: dict[str, Any] = field(default_factory=dict)
    reconfiguration_steps: list[int] = field(default_factory=list)
    pdd_config: PddConfig | None = None

    @property
    def steps(self) -> int:
        return int(self.k.shape[0])

    @property
    def t(self) -> np.ndarray:
        return self.k * self.Ts

    def verdicts_of(self, detector: str, start: int | None = None, end: int | None = None) -> list[DetectorVerdict]:
        """Verdicts of one detector whose anchor k0 lies in [start, end)."""
        return [
            v for v in self.verdicts
            if v.detector == detector and (start is None or v.k0 >= start) and (end is None or v.k0 < end)
        ]

    def alarm_rate(self, detector: str, start: int | None = None, end: int | None = None) -> tuple[float, int]:
        """(alarm fraction, verdict count) of a detector over [start, end)."""
        sel = self.verdicts_of(detector, start, end)
        if not sel:
            return float("nan"), 0
        return sum(v.alarm for v in sel) / len(sel), len(sel)


class _Recorder:
    def __init__(self, steps: int, m: int, p: int, mc_dim: int):
        nan = np.nan
        self.u = np.full((steps, m), nan)
        self.y = np.full((steps, p), nan)
        self.y_true = np.full((steps, p), nan)
        self.r_y = np.full((steps, p), nan)
        self.r_u = np.full((steps, m), nan)
        self.r_yu = np.full((steps, p), nan)
        self.J_rel = np.full(steps, nan)
        self.r_pdd = np.full((steps, p), nan)
        self.pdd = np.zeros(steps, dtype=bool)
        self.mode = np.zeros(steps, dtype=int)
        self.a_plant = np.zeros((steps, m))
        self.a_mc = np.zeros((steps, mc_dim))
        self.verdicts: list[DetectorVerdict] = []

    def finish(self, asm: ScenarioAssembly, **extra) -> RunLog:
        return RunLog(
            name=asm.config.name,
            architecture=asm.architecture,
            seed=asm.seed,
            Ts=asm.Ts,
            config=config_echo(asm.config, asm.seed),
            k=np.arange(self.u.shape[0]),
            u=self.u,
            y=self.y,
            y_true=self.y_true,
            r_y=self.r_y,
            r_u=self.r_u,
            r_yu=self.r_yu,
            J_rel=self.J_rel,
            r_pdd=self.r_pdd,
            pdd=self.pdd,
            mode=self.mode,
            a_plant=self.a_plant,
            a_mc=self.a_mc,
            verdicts=self.verdicts,
            **extra,
        )


def _streams(seed: int) -> tuple[np.random.Generator, np.random.Generator, np.random.Generator, int]:
    """Noise, fault and attack generators plus a seed for calibration runs."""
    noise_ss, fault_ss, attack_ss, calib_ss = np.random.SeedSequence(seed).spawn(4)
    calib_seed = int(calib_ss.generate_state(1)[0])
    return np.random.default_rng(noise_ss), np.random.default_rng(fault_ss), np.random.default_rng(attack_ss), calib_seed


def _guard(k: int, x: np.ndarray, u: np.ndarray) -> None:
    norm = max(float(np.linalg.norm(x)), float(np.linalg.norm(u)))
    if not np.isfinite(norm) or norm > settings.norm_guard:
        raise DivergenceError(f"simulation diverged at step {k}: state/input norm {norm:.3e}", step=k, norm=norm)


def _pdd_segments(log: RunLog) -> list[np.ndarray]:
    """Contiguous r_PDD blocks recorded while the plant side ran in PDD mode."""
    segments = []
    start = None
    for k, flag in enumerate(np.append(log.pdd, False)):
        if flag and start is None:
            start = k
        elif not flag and start is not None:
            segments.append(log.r_pdd[start:k])
            start = None
    return segments


def calibrate_pdd(asm: ScenarioAssembly, seed: int) -> PddConfig:
    """Nominal r_PDD covariance and GLR threshold from an attack-free, fault-free run."""
    cfg = asm.config
    det = cfg.detectors
    glr = det.glr
    duration = glr.calibration_time if glr is not None else GlrConfig().calibration_time
    calibration = cfg.model_copy(update={
        "name": f"{cfg.name}.calibration",
        "duration": duration,
        "attacks": [],
        "fault": None,
        "reconfigurations": [],
        "detectors": DetectorsConfig(alpha=det.alpha, attack_chi2=False, schedule=det.schedule, Sigma_ry=det.Sigma_ry),
    })
    logger.info(f"Calibrating r_PDD statistics over {duration} s attack-free")
    log = run_scenario(calibration, seed=seed)
    segments = _pdd_segments(log)
    if not segments:
        raise DivergenceError("calibration run produced no PDD phase")
    Sigma = estimate_pdd_covariance(np.vstack(segments))
    N = glr.N if glr is not None else DEFAULT_GLR_WINDOW
    threshold = None
    if glr is not None:
        threshold = glr.threshold if glr.threshold is not None else calibrate_glr_threshold(segments, Sigma, N, glr.far)
    return PddConfig(asm.Psi, asm.reference.Q_v, Sigma, N, threshold, asm.psi_margin)


def _modified_bus(asm: ScenarioAssembly, pdd_cfg: PddConfig | None, calib_seed: int,
                  reports: dict[str, Any]) -> tuple[FrameBus, PddConfig | None]:
    det = asm.config.detectors
    bus = FrameBus()
    if det.attack_chi2:
        bus.subscribe(AttackResidualChi2(asm.mc.Rbar, det.alpha, REGULAR_DETECTOR), DetectorFamily.REGULAR)
    if asm.switch is not None:
        llr = SwitchingLlr(asm.mc.Rbar, asm.switch, det.alpha)
        bus.subscribe(llr, DetectorFamily.REGULAR)
        th = llr.threshold
        reports["llr"] = {
            "L_l": asm.switch.L_l,
            "L_u": asm.switch.L_u,
            "dof": asm.switch.dof,
            "quantile": th.quantile,
            "threshold": th.active,
            "threshold_branch": th.active_branch,
            **{f"branch_{name}": value for name, value in th.branch_values.items()},
        }
    if det.glr is not None or det.additive:
        pdd_cfg = pdd_cfg if pdd_cfg is not None else calibrate_pdd(asm, calib_seed)
        if det.additive:
            bus.subscribe(AdditiveStealthChi2(pdd_cfg, det.alpha), DetectorFamily.ADDITIVE)
        if det.glr is not None:
            bus.subscribe(GlrDetector(pdd_cfg), DetectorFamily.MULTIPLICATIVE)
        reports["pdd"] = {
            "N": pdd_cfg.N,
            "glr_threshold": pdd_cfg.glr_threshold,
            "Sigma": pdd_cfg.Sigma.tolist(),
        }
    return bus, pdd_cfg


def _apply_reconfiguration(plan: ReconfigurationPlan, runtime: PlantRuntime, station: McStation,
                           bus: FrameBus, reports: dict[str, Any]) -> None:
    """Swap plant-side and MC-side parameters at the same step."""
    runtime.reconfigure(plan.Q_r1, plan.Q_r2, plan.Q_uMC)
    new_cfg = reconfigure(station.cfg, plan.Q_r2, plan.Q_uMC, plan.Q_r1)
    station.apply(new_cfg)
    for consumer in bus.consumers():
        if hasattr(consumer, "swap_filter"):
            consumer.swap_filter(new_cfg.Rbar)
    perf = resilient_performance_check(new_cfg.factors, new_cfg)
    reports.setdefault("reconfigurations", []).append({"step": plan.step, **perf.model_dump()})
    logger.info(f"Step {plan.step}: parameters reconfigured on both sides, gamma_theta_a={perf.gamma_theta_a:.6g}")


def _run_modified(asm: ScenarioAssembly, pdd_cfg: PddConfig | None) -> RunLog:
    det = asm.config.detectors
    model = asm.model
    m, p = model.inputs, model.outputs
    noise_rng, fault_rng, attack_rng, calib_seed = _streams(asm.seed)

    reports: dict[str, Any] = {"performance": resilient_performance_check(asm.factors, asm.mc).model_dump()}
    if asm.psi_margin is not None:
        reports["psi_margin"] = dict(asm.psi_margin)
    bus, pdd_cfg = _modified_bus(asm, pdd_cfg, calib_seed, reports)

    process = PlantProcess(model, asm.noise, asm.fault, noise_rng, fault_rng)
    runtime = PlantRuntime(
        asm.factors, asm.Q_r1, asm.Q_r2, asm.reference.Q_v, asm.reference.vbar0,
        Psi=asm.Psi, Q_uMC=asm.Q_uMC if asm.Psi is not None else None, mode_set=asm.mode_set,
    )
    station = McStation(asm.mc)
    channel = AttackChannel(asm.attacks, "modified", attack_rng)
    plant_fd = KalmanChi2Detector(asm.Sigma_ry, det.alpha, PLANT_DETECTOR)
    scheduler = None
    if det.schedule is not None:
        scheduler = DetectorScheduler.from_config(det.schedule, lambda s, name: seconds_to_steps(s, asm.Ts, name))

    plans: dict[int, list[ReconfigurationPlan]] = {}
    for plan in asm.reconfigurations:
        plans.setdefault(plan.step, []).append(plan)

    rec = _Recorder(asm.steps, m, p, p)
    zero_m = np.zeros(m)

    for k in range(asm.steps):
        for plan in plans.get(k, []):
            _apply_reconfiguration(plan, runtime, station, bus, reports)
        if scheduler is not None:
            for family in scheduler.resets(k):
                for consumer in bus.consumers(family):
                    consumer.reset()
        active = scheduler.active(k) if scheduler is not None else DetectorFamily.REGULAR
        pdd = active in PDD_FAMILIES

        process.begin_step(k)
        channel.begin_step(k)

        def loop(z: np.ndarray, lin: bool):
            w, u_g = z[:m], z[m:]
            y = process.measure(u_g, lin)
            ev = runtime.evaluate(y, w, u_g, k, pdd, lin)
            r_a = channel.to_mc(zero_m, ev.r_yu, k, lin)
            mcev = station.evaluate(r_a, k, lin)
            w_next = channel.to_plant(mcev.u_mc, ev.r_yu, k, lin)
            return ev, mcev, np.concatenate([w_next, ev.u])

        z = solve_affine(lambda z, lin: loop(z, lin)[2], 2 * m)
        ev, mcev, _ = loop(z, False)

        u = ev.u
        rec.y_true[k] = process.true_output(u)
        process.advance(u)
        runtime.commit(ev)
        record = channel.commit(mcev.u_mc, ev.r_yu, k)
        obs = station.commit(mcev)

        rec.verdicts.append(plant_fd.consume(k, ev.r_y))
        families = set(PDD_FAMILIES) if pdd else {DetectorFamily.REGULAR}
        for family, verdict in bus.publish(obs, families):
            if family is None or family == active:
                rec.verdicts.append(verdict)
                if verdict.detector == REGULAR_DETECTOR:
                    rec.J_rel[k] = verdict.statistic

        rec.u[k], rec.y[k] = u, ev.y
        rec.r_y[k], rec.r_u[k], rec.r_yu[k] = ev.r_y, ev.r_u, ev.r_yu
        if obs.r_pdd is not None:
            rec.r_pdd[k] = obs.r_pdd
        rec.pdd[k] = pdd
        rec.mode[k] = ev.mode
        rec.a_plant[k], rec.a_mc[k] = record.to_plant, record.to_mc
        _guard(k, process.x, u)

    return rec.finish(
        asm,
        reports=reports,
        reconfiguration_steps=[plan.step for plan in asm.reconfigurations],
        pdd_config=pdd_cfg,
    )


def _run_traditional(asm: ScenarioAssembly) -> RunLog:
    det = asm.config.detectors
    model = asm.model
    m, p = model.inputs, model.outputs
    noise_rng, fault_rng, attack_rng, _ = _streams(asm.seed)

    process = PlantProcess(model, asm.noise, asm.fault, noise_rng, fault_rng)
    station = TraditionalMc(asm.factors, asm.youla, asm.reference.Q_v, asm.reference.vbar)
    channel = AttackChannel(asm.attacks, "traditional", attack_rng)
    detector = KalmanChi2Detector(asm.Sigma_ry, det.alpha, PLANT_DETECTOR)
    rec = _Recorder(asm.steps, m, p, p)

    for k in range(asm.steps):
        process.begin_step(k)
        channel.begin_step(k)

        def loop(z: np.ndarray, lin: bool):
            u_mc, u_g = z[:m], z[m:]
            y = process.measure(u_g, lin)
            y_a = channel.to_mc(u_mc, y, k, lin)
            tev = station.evaluate(y_a, u_mc, k, lin)
            u = channel.to_plant(u_mc, y, k, lin)
            return tev, y, np.concatenate([tev.u_mc, u])

        z = solve_affine(lambda z, lin: loop(z, lin)[2], 2 * m)
        tev, y, g = loop(z, False)

        u = g[m:]
        rec.y_true[k] = process.true_output(u)
        process.advance(u)
        record = channel.commit(tev.u_mc, y, k)
        r_y = station.commit(tev)
        verdict = detector.consume(k, r_y)
        rec.verdicts.append(verdict)
        rec.J_rel[k] = verdict.statistic

        rec.u[k], rec.y[k], rec.r_y[k] = u, y, r_y
        rec.a_plant[k], rec.a_mc[k] = record.to_plant, record.to_mc
        _guard(k, process.x, u)

    return rec.finish(asm)


def run_scenario(cfg: ScenarioConfig, seed: int | None = None, steps: int | None = None,
                 pdd_config: PddConfig | None = None) -> RunLog:
    """Execute ``cfg`` deterministically.

    Per step: plant output, plant-side computation, channel towards the MC,
    MC control and channel towards the plant are solved together for the
    in-step algebraic loop; the states then commit in that order and the
    detectors consume the MC-side frame. ``pdd_config`` skips the r_PDD
    calibration run.
    """
    asm = assemble(cfg, seed, steps)
    logger.info(f"Run '{cfg.name}' started: {asm.architecture} configuration, {asm.steps} steps, seed {asm.seed}")
    if asm.architecture == "modified":
        log = _run_modified(asm, pdd_config)
    else:
        log = _run_traditional(asm)
    alarms = sum(v.alarm for v in log.verdicts)
    logger.info(f"Run '{cfg.name}' finished: {log.steps} steps, {len(log.verdicts)} verdicts, {alarms} alarms")
    return log
