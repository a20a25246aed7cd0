"""Attack residual χ² detector and the switching on/off LLR detector."""
import logging
from collections import deque
from collections.abc import Iterable
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from src.errors import ConfigError, DimensionError, SingularSystemError
from src.mcstation.control import McConfig, McObservation
from src.schemas.verdict import DetectorVerdict, Polarity
from src.sscore.chi2 import chi2_quantile, ncx2_quantile
from src.sscore.statespace import LtiFilter, StateSpaceModel

logger = logging.getLogger(__name__)

TRUNCATION_TOL = 1e-8

ATTACK_FREE = "attack_free"
AMBIGUOUS = "ambiguous"
ATTACKED = "attacked"


class AttackResidualChi2:
    """r̄ = R̄ e with e = r^a_yu − Q_r2 v; J = r̄ᵀr̄ against χ²_{1−α}(k_y)."""

    name = "attack_chi2"

    def __init__(self, Rbar: StateSpaceModel, alpha: float = 0.01, name: str | None = None):
        self.filter = LtiFilter(Rbar)
        self.alpha = alpha
        self.dim = Rbar.outputs
        self.threshold = chi2_quantile(1.0 - alpha, self.dim)
        if name:
            self.name = name

    def consume(self, obs: McObservation) -> DetectorVerdict:
        r = self.filter.advance(obs.e)
        return DetectorVerdict.judge(self.name, obs.k, float(r @ r), self.threshold)

    def swap_filter(self, Rbar: StateSpaceModel) -> None:
        self.filter.swap_model(Rbar, "R̄")

    def reset(self) -> None:
        self.filter.reset()


def attack_residual_chi2(
    cfg: McConfig, Rbar: StateSpaceModel | None, frames: Iterable[McObservation], alpha: float = 0.01
) -> list[DetectorVerdict]:
    """Run the attack χ² detector over a sequence of MC observations."""
    Rbar = Rbar if Rbar is not None else cfg.Rbar
    if Rbar is None:
        raise ConfigError("attack detection needs the post-filter R̄; design it first")
    detector = AttackResidualChi2(Rbar, alpha)
    return [detector.consume(obs) for obs in frames]


@dataclass(frozen=True, eq=False)
class SwitchDetectorConfig:
    """Window, truncation horizon and the attack-energy bounds of the LLR test."""

    s: int
    gamma: int
    L0: float
    L_l: float
    L_u: float
    H_o: np.ndarray
    H_eta: np.ndarray
    sigma_min: float
    sigma_max: float
    A_R: np.ndarray
    B_R: np.ndarray
    C_R: np.ndarray
    D_R: np.ndarray

    @property
    def tau(self) -> int:
        return self.s + self.gamma

    @property
    def k_y(self) -> int:
        return self.C_R.shape[0]

    @property
    def dof(self) -> int:
        return self.k_y * (self.s + 1)


def _markov_blocks(R: StateSpaceModel, count: int) -> list[np.ndarray]:
    """[D_R, C_R B_R, C_R A B_R, …] with ``count`` entries."""
    blocks = [R.D]
    CA = R.C
    for _ in range(1, count):
        blocks.append(CA @ R.B)
        CA = CA @ R.A
    return blocks


def build_switch_detector(
    R: StateSpaceModel,
    s: int,
    gamma: int,
    L0: float,
    L_l: float | None = None,
    L_u: float | None = None,
) -> SwitchDetectorConfig:
    """Assemble H_o, the truncated Toeplitz H_η̄ and the bounds L_l, L_u.

    Optional ``L_l``/``L_u`` replace the derived bounds (used to pin
    reference thresholds whose noise covariances are not available).
    """
    if s < 0 or gamma < 0:
        raise ConfigError(f"window s and horizon γ must be non-negative, got s={s}, γ={gamma}")
    if L0 <= 0:
        raise ConfigError(f"L0 must be positive, got {L0}")
    A, C = R.A, R.C
    k_y, k_in = R.outputs, R.inputs
    if R.n:
        tail = float(np.linalg.norm(np.linalg.matrix_power(A, gamma), 2))
        if tail >= TRUNCATION_TOL:
            raise ConfigError(f"truncation invalid: ‖A_R^γ‖ = {tail:.3e} ≥ {TRUNCATION_TOL:g}, increase γ")

    H_o = np.vstack([C @ np.linalg.matrix_power(A, t) for t in range(s + 1)]) if R.n else np.zeros((k_y * (s + 1), 0))

    blocks = _markov_blocks(R, gamma + s + 1)
    n_cols = gamma + s + 1
    H = np.zeros((k_y * (s + 1), k_in * n_cols))
    for t in range(s + 1):
        for j in range(n_cols):
            d = t + gamma - j
            if 0 <= d < len(blocks):
                H[t * k_y:(t + 1) * k_y, j * k_in:(j + 1) * k_in] = blocks[d]

    rank = np.linalg.matrix_rank(H)
    if rank < k_y * (s + 1):
        raise SingularSystemError(f"rank deficiency: rank(H_η̄) = {rank} < {k_y * (s + 1)}")
    eig = np.linalg.eigvalsh(H @ H.T)
    sigma_min, sigma_max = float(eig[0]), float(eig[-1])
    tau = s + gamma
    derived_l = float(np.sqrt(tau * sigma_min) * L0)
    derived_u = float(np.sqrt(tau * sigma_max) * L0)
    if L_l is not None or L_u is not None:
        logger.info(f"LLR bounds overridden: derived ({derived_l:.6g}, {derived_u:.6g}) -> ({L_l}, {L_u})")
    low = derived_l if L_l is None else float(L_l)
    high = derived_u if L_u is None else float(L_u)
    if low > high:
        raise ConfigError(f"LLR bounds must satisfy L_l <= L_u, got {low} and {high}")

    return SwitchDetectorConfig(
        s=s, gamma=gamma, L0=L0, L_l=low, L_u=high, H_o=H_o, H_eta=H,
        sigma_min=sigma_min, sigma_max=sigma_max,
        A_R=A.copy(), B_R=R.B.copy(), C_R=C.copy(), D_R=R.D.copy(),
    )


def llr_branch(norm: float, L_l: float, L_u: float) -> str:
    if norm <= L_l:
        return ATTACK_FREE
    if norm >= L_u:
        return ATTACKED
    return AMBIGUOUS


def llr_branch_values(norm: float, L_l: float, L_u: float) -> dict[str, float]:
    """All three branch formulas evaluated at ‖r̄‖ = ``norm``."""
    return {
        ATTACK_FREE: 0.5 * (norm - L_u) ** 2,
        AMBIGUOUS: 0.5 * ((norm - L_u) ** 2 - (norm - L_l) ** 2),
        ATTACKED: -0.5 * (norm - L_l) ** 2,
    }


def llr_value(norm: float, L_l: float, L_u: float) -> tuple[float, str]:
    branch = llr_branch(norm, L_l, L_u)
    return llr_branch_values(norm, L_l, L_u)[branch], branch


def llr_projection_statistic(window, L_l: float, L_u: float) -> float:
    """Constrained likelihood ratio by explicit projection.

    η_l is the projection of r̄ onto the ball ‖η‖ ≤ L_l and η_u the
    projection onto the exterior ‖η‖ ≥ L_u; J = ½‖r̄−η_u‖² − ½‖r̄−η_l‖².
    """
    r = np.asarray(window, dtype=float).reshape(-1)
    norm = float(np.linalg.norm(r))
    if norm == 0.0:
        return 0.5 * L_u**2
    eta_l = r * min(1.0, L_l / norm)
    eta_u = r * max(1.0, L_u / norm)
    return float(0.5 * np.sum((r - eta_u) ** 2) - 0.5 * np.sum((r - eta_l) ** 2))


@dataclass(frozen=True)
class LlrThreshold:
    """(1−α) non-central χ² quantile of ‖r̄‖² mapped through the LLR branches."""

    quantile: float
    branch_values: dict[str, float]
    active: float
    active_branch: str


@lru_cache(maxsize=64)
def _threshold(alpha: float, dof: int, L_l: float, L_u: float) -> LlrThreshold:
    q = ncx2_quantile(1.0 - alpha, dof, L_u**2)
    root = float(np.sqrt(q))
    values = llr_branch_values(root, L_l, L_u)
    branch = llr_branch(root, L_l, L_u)
    return LlrThreshold(quantile=q, branch_values=values, active=values[branch], active_branch=branch)


def llr_threshold(cfg: SwitchDetectorConfig, alpha: float = 0.01) -> LlrThreshold:
    if not 0.0 < alpha < 1.0:
        raise ConfigError(f"alpha must lie in (0, 1), got {alpha}")
    return _threshold(float(alpha), cfg.dof, float(cfg.L_l), float(cfg.L_u))


def llr_statistic(cfg: SwitchDetectorConfig, window, k0: int = 0, alpha: float = 0.01) -> DetectorVerdict:
    """Piecewise LLR on a stacked window; alarm when J falls below the threshold."""
    r = np.asarray(window, dtype=float).reshape(-1)
    if r.size != cfg.dof:
        raise DimensionError(f"LLR window must have {cfg.dof} entries, got {r.size}")
    J, branch = llr_value(float(np.linalg.norm(r)), cfg.L_l, cfg.L_u)
    threshold = llr_threshold(cfg, alpha)
    return DetectorVerdict.judge("switch_llr", k0, J, threshold.active, Polarity.BELOW, branch)


class SwitchingLlr:
    """Sliding-window LLR detector for attack switching-on and switching-off."""

    name = "switch_llr"

    def __init__(self, Rbar: StateSpaceModel, cfg: SwitchDetectorConfig, alpha: float = 0.01, name: str | None = None):
        if Rbar.outputs != cfg.k_y:
            raise DimensionError(f"R̄ has {Rbar.outputs} outputs, switch detector expects {cfg.k_y}")
        self.filter = LtiFilter(Rbar)
        self.cfg = cfg
        self.alpha = alpha
        self.threshold = llr_threshold(cfg, alpha)
        self.window: deque[np.ndarray] = deque(maxlen=cfg.s + 1)
        if name:
            self.name = name

    def consume(self, obs: McObservation) -> DetectorVerdict | None:
        """Returns None until the window holds s+1 residuals."""
        self.window.append(self.filter.advance(obs.e))
        if len(self.window) < self.window.maxlen:
            return None
        stacked = np.concatenate(self.window)
        J, branch = llr_value(float(np.linalg.norm(stacked)), self.cfg.L_l, self.cfg.L_u)
        k0 = obs.k - self.cfg.s
        return DetectorVerdict.judge(self.name, k0, J, self.threshold.active, Polarity.BELOW, branch)

    def swap_filter(self, Rbar: StateSpaceModel) -> None:
        self.filter.swap_model(Rbar, "R̄")

    def reset(self) -> None:
        self.window.clear()
        self.filter.reset()
