"""True plant and the embedded plant-side computation of the modified configuration."""
import logging
from dataclasses import dataclass, field

import numpy as np

from src.errors import ConfigError, DimensionError
from src.factory.bezout import BezoutFactors
from src.factory.modes import ModeCompensators, ModeSet
from src.plantside.faults import FaultSpec
from src.sscore.affine import solve_affine
from src.sscore.norms import require_stable
from src.sscore.statespace import LtiFilter, NoiseSpec, StateSpaceModel

logger = logging.getLogger(__name__)


def covariance_factor(cov: np.ndarray) -> np.ndarray:
    """Symmetric square root of a PSD covariance."""
    if cov.size == 0:
        return cov.copy()
    vals, vecs = np.linalg.eigh(0.5 * (cov + cov.T))
    return vecs @ np.diag(np.sqrt(np.clip(vals, 0.0, None))) @ vecs.T


@dataclass(eq=False)
class PlantProcess:
    """x(k+1) = Ax + Bu + E_f f + w,  y = Cx + Du + F_f f + ν.

    Noise and fault samples are drawn once per step in ``begin_step`` so that
    repeated ``measure`` calls inside the loop solver see the same draws.
    """

    model: StateSpaceModel
    noise: NoiseSpec
    fault: FaultSpec
    noise_rng: np.random.Generator
    fault_rng: np.random.Generator
    x0: np.ndarray | None = None

    def __post_init__(self):
        self.noise.check_dims(self.model)
        self.fault.check_dims(self.model)
        self.x = np.zeros(self.model.n) if self.x0 is None else np.asarray(self.x0, dtype=float).copy()
        self._w_factor = covariance_factor(self.noise.Sigma_w)
        self._nu_factor = covariance_factor(self.noise.Sigma_nu)
        self.w = np.zeros(self.model.n)
        self.nu = np.zeros(self.model.outputs)
        self.f = np.zeros(self.fault.dim)
        self.k = -1

    def begin_step(self, k: int) -> None:
        self.k = k
        self.w = self._w_factor @ self.noise_rng.standard_normal(self.model.n)
        self.nu = self._nu_factor @ self.noise_rng.standard_normal(self.model.outputs)
        self.f = self.fault.sample(k, self.fault_rng)

    def measure(self, u, linear_only: bool = False) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        if linear_only:
            return self.model.D @ u
        return self.model.C @ self.x + self.model.D @ u + self.fault.F_f @ self.f + self.nu

    def true_output(self, u) -> np.ndarray:
        """Output without sensor noise and sensor faults."""
        return self.model.C @ self.x + self.model.D @ np.asarray(u, dtype=float)

    def advance(self, u) -> None:
        u = np.asarray(u, dtype=float)
        self.x = self.model.A @ self.x + self.model.B @ u + self.fault.E_f @ self.f + self.w


@dataclass(frozen=True, eq=False)
class ResidualFrame:
    """Per-step plant-side record sent towards the MC-station."""

    k: int
    r_y: np.ndarray
    r_u: np.ndarray
    r_yu: np.ndarray
    u: np.ndarray
    r_pd: np.ndarray | None = None
    mode: int = 0


@dataclass(eq=False)
class _ModeBank:
    """Observer and compensators of one mode, advanced every step."""

    comps: ModeCompensators
    xhat: np.ndarray
    V_0i: LtiFilter
    Q_i: LtiFilter
    R_0i: LtiFilter
    V_i0: LtiFilter
    Vbar_i0: LtiFilter

    @classmethod
    def create(cls, comps: ModeCompensators) -> "_ModeBank":
        return cls(
            comps=comps,
            xhat=np.zeros(comps.factors.plant.n),
            V_0i=LtiFilter(comps.V_0i),
            Q_i=LtiFilter(comps.Q_i),
            R_0i=LtiFilter(comps.R_0i),
            V_i0=LtiFilter(comps.V_i0),
            Vbar_i0=LtiFilter(comps.Vbar_i0),
        )

    @property
    def F(self) -> np.ndarray:
        return self.comps.factors.F

    @property
    def L(self) -> np.ndarray:
        return self.comps.factors.L


@dataclass(eq=False)
class PlantEvaluation:
    """One evaluation of the embedded computation; ``commit`` replays it."""

    k: int
    y: np.ndarray
    w: np.ndarray
    u: np.ndarray
    r_y: np.ndarray
    r_u: np.ndarray
    r_yu: np.ndarray
    pdd: bool
    mode: int
    s: np.ndarray
    r_pd: np.ndarray | None = None
    bank_ry: list[np.ndarray] = field(default_factory=list)
    bank_delta: list[np.ndarray] = field(default_factory=list)


@dataclass(eq=False)
class PlantRuntime:
    """Embedded observer-based controller and residual fusion.

    Plain mode:  u = F x̂ + v₀ + w,  r_y = y − Cx̂ − Du,  r_u = u − Fx̂ − v₀,
    r_yu = Q_r1 r_y + Q_r2 r_u.  PDD mode adds r̄_PD = Ψ[u; y] to r_yu and
    subtracts the plant-side copy Q_uMC r̄_PD from the input. With a mode set
    the active mode's gains drive the plant and the residuals are mapped
    back to the base frame.
    """

    factors: BezoutFactors
    Q_r1: StateSpaceModel
    Q_r2: StateSpaceModel
    Q_v: StateSpaceModel
    vbar0: np.ndarray
    Psi: StateSpaceModel | None = None
    Q_uMC: StateSpaceModel | None = None
    mode_set: ModeSet | None = None

    def __post_init__(self):
        plant = self.factors.plant
        m, p = plant.inputs, plant.outputs
        for name, sys, shape in (("Q_r1", self.Q_r1, (p, p)), ("Q_r2", self.Q_r2, (p, m))):
            require_stable(sys, name)
            if (sys.outputs, sys.inputs) != shape:
                raise DimensionError(f"{name} must be {shape[0]}x{shape[1]}, got {sys.outputs}x{sys.inputs}")
        if self.Q_v.outputs != m:
            raise DimensionError(f"Q_v must produce {m} outputs, got {self.Q_v.outputs}")
        if self.Psi is not None and (self.Psi.outputs, self.Psi.inputs) != (p, m + p):
            raise DimensionError(f"Psi must be {p}x{m + p}, got {self.Psi.outputs}x{self.Psi.inputs}")
        self.vbar0 = np.asarray(self.vbar0, dtype=float).reshape(-1)
        self.xhat = np.zeros(plant.n)
        self.q_r1 = LtiFilter(self.Q_r1)
        self.q_r2 = LtiFilter(self.Q_r2)
        self.q_v0 = LtiFilter(self.Q_v)
        self.psi = LtiFilter(self.Psi) if self.Psi is not None else None
        self.q_umc = LtiFilter(self.Q_uMC) if self.Q_uMC is not None else None
        self.banks: list[_ModeBank] = []
        if self.mode_set is not None:
            self.banks = [_ModeBank.create(c) for c in self.mode_set.compensators(self.factors)]
        self._mode = 0

    @property
    def plant(self) -> StateSpaceModel:
        return self.factors.plant

    @property
    def has_pdd(self) -> bool:
        return self.psi is not None and self.q_umc is not None

    def mode_index(self, k: int) -> int:
        if self.mode_set is None:
            return 0
        i = self.mode_set.mode_at(k)
        if i != self._mode:
            logger.info(f"Step {k}: embedded gains switched from mode {self._mode} to mode {i}")
            self._mode = i
        return i

    def evaluate(self, y, w, u_guess, k: int, pdd: bool = False, linear_only: bool = False) -> PlantEvaluation:
        """Embedded computation with the input-dependent terms taken from ``u_guess``.

        At the loop fixed point the returned ``u`` equals ``u_guess``. With
        ``linear_only`` every state and the baseline v̄₀ are treated as zero.
        """
        if pdd and not self.has_pdd:
            raise ConfigError("PDD mode needs Psi and the plant-side Q_uMC copy")
        plant = self.plant
        C, D = plant.C, plant.D
        y = np.asarray(y, dtype=float)
        w = np.asarray(w, dtype=float)
        u_g = np.asarray(u_guess, dtype=float)
        lin = linear_only

        v0 = self.q_v0.output(np.zeros_like(self.vbar0) if lin else self.vbar0, lin)
        r_pd = self.psi.output(np.concatenate([u_g, y]), lin) if self.psi is not None else None
        corr = self.q_umc.output(r_pd, lin) if pdd else np.zeros(plant.inputs)
        s = v0 + w - corr

        if not self.banks:
            xhat = np.zeros_like(self.xhat) if lin else self.xhat
            r_y = y - C @ xhat - D @ u_g
            u = self.factors.F @ xhat + s
            r_u = w - corr
            ev = PlantEvaluation(k=k, y=y, w=w, u=u, r_y=r_y, r_u=r_u, r_yu=None, pdd=pdd, mode=0, s=s, r_pd=r_pd)
        else:
            i = self.mode_index(k) if not lin else self._mode
            bank_ry, bank_delta = [], []
            for bank in self.banks:
                xh = np.zeros_like(bank.xhat) if lin else bank.xhat
                bank_ry.append(y - C @ xh - D @ u_g)
            active = self.banks[i]
            xh_i = np.zeros_like(active.xhat) if lin else active.xhat
            u = active.F @ xh_i + active.V_0i.output(s, lin) + active.Q_i.output(bank_ry[i], lin)
            for bank in self.banks:
                xh = np.zeros_like(bank.xhat) if lin else bank.xhat
                bank_delta.append(u - bank.F @ xh)
            r_y = active.R_0i.output(bank_ry[i], lin)
            r_u = active.V_i0.output(bank_delta[i], lin) + active.Vbar_i0.output(bank_ry[i], lin) - v0
            ev = PlantEvaluation(
                k=k, y=y, w=w, u=u, r_y=r_y, r_u=r_u, r_yu=None, pdd=pdd, mode=i, s=s, r_pd=r_pd,
                bank_ry=bank_ry, bank_delta=bank_delta,
            )

        r_yu = self.q_r1.output(ev.r_y, lin) + self.q_r2.output(ev.r_u, lin)
        if pdd:
            r_yu = r_yu + r_pd
        ev.r_yu = r_yu
        return ev

    def compute(self, y, w, k: int, pdd: bool = False) -> PlantEvaluation:
        """Embedded computation for a measured y, resolving the input loop."""
        m = self.plant.inputs

        def loop(u_g: np.ndarray, lin: bool) -> np.ndarray:
            if lin:
                return self.evaluate(np.zeros_like(y), np.zeros(m), u_g, k, pdd, linear_only=True).u
            return self.evaluate(y, w, u_g, k, pdd).u

        u = solve_affine(loop, m)
        return self.evaluate(y, w, u, k, pdd)

    def commit(self, ev: PlantEvaluation) -> None:
        """Advance every embedded state with the inputs of ``ev``."""
        plant = self.plant
        A, B = plant.A, plant.B
        self.q_v0.advance(self.vbar0)
        if self.psi is not None:
            self.psi.advance(np.concatenate([ev.u, ev.y]))
        if self.q_umc is not None:
            self.q_umc.advance(ev.r_pd if ev.pdd else np.zeros(self.q_umc.model.inputs))
        if not self.banks:
            self.xhat = A @ self.xhat + B @ ev.u + self.factors.L @ ev.r_y
        else:
            for bank, r_y_j, delta_j in zip(self.banks, ev.bank_ry, ev.bank_delta):
                bank.V_0i.advance(ev.s)
                bank.Q_i.advance(r_y_j)
                bank.R_0i.advance(r_y_j)
                bank.V_i0.advance(delta_j)
                bank.Vbar_i0.advance(r_y_j)
                bank.xhat = A @ bank.xhat + B @ ev.u + bank.L @ r_y_j
        self.q_r1.advance(ev.r_y)
        self.q_r2.advance(ev.r_u)

    def frame(self, ev: PlantEvaluation) -> ResidualFrame:
        return ResidualFrame(
            k=ev.k,
            r_y=ev.r_y.copy(),
            r_u=ev.r_u.copy(),
            r_yu=ev.r_yu.copy(),
            u=ev.u.copy(),
            r_pd=None if ev.r_pd is None else ev.r_pd.copy(),
            mode=ev.mode,
        )

    def reconfigure(self, Q_r1: StateSpaceModel | None = None, Q_r2: StateSpaceModel | None = None,
                    Q_uMC: StateSpaceModel | None = None) -> None:
        """Swap the residual filters (and the Q_uMC copy); states persist when dimensions match."""
        if Q_r1 is not None:
            require_stable(Q_r1, "Q_r1")
            self.Q_r1 = Q_r1
            self.q_r1.swap_model(Q_r1, "Q_r1")
        if Q_r2 is not None:
            require_stable(Q_r2, "Q_r2")
            self.Q_r2 = Q_r2
            self.q_r2.swap_model(Q_r2, "Q_r2")
        if Q_uMC is not None and self.q_umc is not None:
            require_stable(Q_uMC, "Q_uMC")
            self.Q_uMC = Q_uMC
            self.q_umc.swap_model(Q_uMC, "Q_uMC copy")
