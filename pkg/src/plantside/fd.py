"""Plant-side operations and the Kalman-residual χ² fault detector."""
import logging
from collections.abc import Iterable

import numpy as np
from scipy import linalg

from src.errors import SingularSystemError
from src.plantside.runtime import PlantProcess, PlantRuntime, ResidualFrame
from src.schemas.verdict import DetectorVerdict
from src.sscore.chi2 import chi2_quantile

logger = logging.getLogger(__name__)


def plant_step(process: PlantProcess, u, k: int) -> np.ndarray:
    """Draw the step's noise and fault, measure y(k) and advance x."""
    process.begin_step(k)
    y = process.measure(u)
    process.advance(u)
    return y


def embedded_compute(runtime: PlantRuntime, y, u_mc_a, k: int) -> tuple[np.ndarray, ResidualFrame]:
    ev = runtime.compute(y, u_mc_a, k, pdd=False)
    runtime.commit(ev)
    return ev.u, runtime.frame(ev)


def pdd_mode_compute(runtime: PlantRuntime, y, u_mc_a, k: int) -> tuple[np.ndarray, ResidualFrame]:
    """Embedded computation with the performance-degradation residual attached."""
    ev = runtime.compute(y, u_mc_a, k, pdd=True)
    runtime.commit(ev)
    return ev.u, runtime.frame(ev)


def mode_switch(runtime: PlantRuntime, k: int) -> int:
    return runtime.mode_index(k)


class KalmanChi2Detector:
    """J = r_yᵀ Σ⁻¹ r_y against the central χ²(k_y) quantile."""

    name = "kalman_chi2"

    def __init__(self, Sigma_ry: np.ndarray, alpha: float = 0.01, name: str | None = None):
        Sigma = np.atleast_2d(np.asarray(Sigma_ry, dtype=float))
        try:
            self._chol = linalg.cho_factor(0.5 * (Sigma + Sigma.T))
        except linalg.LinAlgError as e:
            raise SingularSystemError(f"residual covariance is not positive definite: {e}") from e
        self.dim = Sigma.shape[0]
        self.alpha = alpha
        self.threshold = chi2_quantile(1.0 - alpha, self.dim)
        if name:
            self.name = name

    def statistic(self, r_y) -> float:
        r = np.asarray(r_y, dtype=float)
        return float(r @ linalg.cho_solve(self._chol, r))

    def consume(self, k: int, r_y) -> DetectorVerdict:
        return DetectorVerdict.judge(self.name, k, self.statistic(r_y), self.threshold)

    def reset(self) -> None:
        """Stateless: each verdict depends on its own frame only."""


def fd_chi2(frames: Iterable[ResidualFrame], Sigma_ry, alpha: float = 0.01) -> list[DetectorVerdict]:
    detector = KalmanChi2Detector(Sigma_ry, alpha)
    return [detector.consume(frame.k, frame.r_y) for frame in frames]
