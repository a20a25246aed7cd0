"""MC-station control law u_MC = Q_uMC(r^a_yu − Q_r2 v) + v."""
import logging
from dataclasses import dataclass, replace

import numpy as np

from src.errors import DimensionError, SingularSystemError
from src.factory.bezout import BezoutFactors
from src.plantside.reference import ReferenceConfig
from src.sscore.connect import identity, product, subtract, vstack
from src.sscore.norms import require_stable
from src.sscore.statespace import LtiFilter, StateSpaceModel

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class McConfig:
    """MC-side parameters: Q_uMC, the Q_r2 copy, reference path and post-filters."""

    factors: BezoutFactors
    Q_uMC: StateSpaceModel
    Q_r2: StateSpaceModel
    Q_r1: StateSpaceModel
    reference: ReferenceConfig
    Sigma_ry: np.ndarray
    R: StateSpaceModel | None = None
    Rbar: StateSpaceModel | None = None
    Psi: StateSpaceModel | None = None

    def __post_init__(self):
        plant = self.factors.plant
        m, p = plant.inputs, plant.outputs
        require_stable(self.Q_uMC, "Q_uMC")
        require_stable(self.Q_r2, "Q_r2")
        if (self.Q_uMC.outputs, self.Q_uMC.inputs) != (m, p):
            raise DimensionError(f"Q_uMC must be {m}x{p}, got {self.Q_uMC.outputs}x{self.Q_uMC.inputs}")
        loop_static = np.eye(m) - self.Q_uMC.D @ self.Q_r2.D
        if np.linalg.matrix_rank(loop_static) < m:
            raise SingularSystemError("I - Q_uMC·Q_r2 has a singular static part")

    @property
    def loop_gain(self) -> StateSpaceModel:
        """I − Q_uMC Q_r2."""
        m = self.factors.plant.inputs
        return subtract(identity(m, self.Q_uMC.Ts), product(self.Q_uMC, self.Q_r2))

    def with_postfilters(self, R: StateSpaceModel, Rbar: StateSpaceModel) -> "McConfig":
        return replace(self, R=R, Rbar=Rbar)


@dataclass(frozen=True, eq=False)
class McObservation:
    """Per-step MC-side quantities handed to the detectors."""

    k: int
    r_yu_a: np.ndarray
    v: np.ndarray
    q_r2_v: np.ndarray
    e: np.ndarray
    r_pdd: np.ndarray | None
    u_mc: np.ndarray


@dataclass(eq=False)
class McEvaluation:
    k: int
    r_yu_a: np.ndarray
    dv: np.ndarray
    v: np.ndarray
    q_r2_v: np.ndarray
    e: np.ndarray
    u_mc: np.ndarray


class McStation:
    """Stateful MC-station: reference shaping, control law and the r_PDD pathway."""

    def __init__(self, cfg: McConfig):
        self.cfg = cfg
        self.q_v = LtiFilter(cfg.reference.Q_v)
        self.q_r2 = LtiFilter(cfg.Q_r2)
        self.q_umc = LtiFilter(cfg.Q_uMC)
        self.psi_mn = None
        if cfg.Psi is not None:
            image = vstack(cfg.factors.M, cfg.factors.N)
            # Ψ[M; N] Q_v driven by v̄
            self.psi_mn = LtiFilter(product(cfg.Psi, image, cfg.reference.Q_v))

    def evaluate(self, r_yu_a, k: int, linear_only: bool = False) -> McEvaluation:
        r = np.asarray(r_yu_a, dtype=float)
        ref = self.cfg.reference
        dv = np.zeros(ref.vbar.dim) if linear_only else ref.vbar.value(k) - ref.vbar0
        v = self.q_v.output(dv, linear_only)
        q_r2_v = self.q_r2.output(v, linear_only)
        e = r - q_r2_v
        u_mc = self.q_umc.output(e, linear_only) + v
        return McEvaluation(k=k, r_yu_a=r, dv=dv, v=v, q_r2_v=q_r2_v, e=e, u_mc=u_mc)

    def commit(self, ev: McEvaluation) -> McObservation:
        r_pdd = None
        if self.psi_mn is not None:
            vbar = self.cfg.reference.vbar.value(ev.k)
            r_pdd = ev.e - self.psi_mn.advance(vbar)
        self.q_v.advance(ev.dv)
        self.q_r2.advance(ev.v)
        self.q_umc.advance(ev.e)
        return McObservation(
            k=ev.k, r_yu_a=ev.r_yu_a.copy(), v=ev.v.copy(), q_r2_v=ev.q_r2_v.copy(),
            e=ev.e.copy(), r_pdd=r_pdd, u_mc=ev.u_mc.copy(),
        )

    def apply(self, cfg: McConfig) -> None:
        """Swap to a reconfigured parameter set at a step boundary."""
        self.q_umc.swap_model(cfg.Q_uMC, "Q_uMC")
        self.q_r2.swap_model(cfg.Q_r2, "Q_r2 copy")
        self.cfg = cfg


def mc_control(station: McStation, r_yu_a, k: int) -> np.ndarray:
    """Evaluate and commit one step of the control law; returns u_MC."""
    ev = station.evaluate(r_yu_a, k)
    station.commit(ev)
    return ev.u_mc
