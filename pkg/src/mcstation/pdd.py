"""Performance-degradation residual detectors: GLR for multiplicative and χ² for additive stealth."""
import logging
from collections import deque
from collections.abc import Iterable
from dataclasses import dataclass, replace

import numpy as np

from src.config import settings
from src.errors import ConfigError, DimensionError, SingularSystemError
from src.mcstation.control import McObservation
from src.mcstation.postfilter import inverse_sqrt
from src.schemas.verdict import DetectorVerdict
from src.sscore.chi2 import chi2_quantile
from src.sscore.statespace import StateSpaceModel, as_matrix

logger = logging.getLogger(__name__)

DEFAULT_GLR_WINDOW = 50


@dataclass(frozen=True, eq=False)
class PddConfig:
    """Ψ filter, reference pathway and the nominal statistics of r_PDD."""

    Psi: StateSpaceModel
    Q_v: StateSpaceModel
    Sigma: np.ndarray
    N: int = DEFAULT_GLR_WINDOW
    glr_threshold: float | None = None
    margin: dict[str, float] | None = None

    def __post_init__(self):
        p = self.Psi.outputs
        object.__setattr__(self, "Sigma", as_matrix(self.Sigma, rows=p, cols=p, name="Sigma_pdd"))
        if self.N < p + 1:
            raise ConfigError(f"GLR window N={self.N} must exceed the residual dimension {p}")

    @property
    def dim(self) -> int:
        return self.Psi.outputs

    def calibrated(self, threshold: float) -> "PddConfig":
        return replace(self, glr_threshold=float(threshold))


def estimate_pdd_covariance(stream) -> np.ndarray:
    """Zero-mean sample covariance of an attack-free r_PDD stream."""
    R = np.atleast_2d(np.asarray(stream, dtype=float))
    if R.shape[0] < 10 * R.shape[1]:
        raise ConfigError(f"covariance estimate needs at least {10 * R.shape[1]} samples, got {R.shape[0]}")
    return R.T @ R / R.shape[0]


def _glr_terms(logdet_sigma: float, logdet_hat, quad, N: int, k: int):
    return 0.5 * N * (logdet_sigma - logdet_hat) + 0.5 * quad - 0.5 * N * k


def glr_statistic(window, Sigma) -> float:
    """J = (N/2)(ln det Σ − ln det Σ̂_a) + ½Σ rᵀΣ⁻¹r − Nk/2, Σ̂_a = (1/N)Σ r rᵀ."""
    W = np.atleast_2d(np.asarray(window, dtype=float))
    N, k = W.shape
    Sigma = as_matrix(Sigma, rows=k, cols=k, name="Sigma")
    sign_s, logdet_s = np.linalg.slogdet(Sigma)
    if sign_s <= 0:
        raise SingularSystemError("nominal r_PDD covariance is not positive definite")
    Sigma_hat = W.T @ W / N
    sign_h, logdet_h = np.linalg.slogdet(Sigma_hat)
    if sign_h <= 0 or not np.isfinite(logdet_h):
        raise SingularSystemError(f"sample covariance of the GLR window is singular (N={N}, k={k})")
    quad = float(np.sum(W * np.linalg.solve(Sigma, W.T).T))
    return float(_glr_terms(logdet_s, logdet_h, quad, N, k))


def sliding_glr(stream, Sigma, N: int) -> np.ndarray:
    """GLR statistic of every length-N window of ``stream``."""
    R = np.atleast_2d(np.asarray(stream, dtype=float))
    T, k = R.shape
    if T < N:
        return np.empty(0)
    Sigma = as_matrix(Sigma, rows=k, cols=k, name="Sigma")
    sign_s, logdet_s = np.linalg.slogdet(Sigma)
    if sign_s <= 0:
        raise SingularSystemError("nominal r_PDD covariance is not positive definite")
    outer = np.einsum("ti,tj->tij", R, R)
    cum = np.concatenate([np.zeros((1, k, k)), np.cumsum(outer, axis=0)])
    hats = (cum[N:] - cum[:-N]) / N
    signs, logdets = np.linalg.slogdet(hats)
    if np.any(signs <= 0):
        raise SingularSystemError(f"sample covariance of a GLR window is singular (N={N}, k={k})")
    q = np.sum(R * np.linalg.solve(Sigma, R.T).T, axis=1)
    cq = np.concatenate([[0.0], np.cumsum(q)])
    quads = cq[N:] - cq[:-N]
    return _glr_terms(logdet_s, logdets, quads, N, k)


def calibrate_glr_threshold(streams: Iterable, Sigma, N: int = DEFAULT_GLR_WINDOW, far: float = 0.01,
                            max_windows: int | None = None) -> float:
    """Empirical (1−FAR) quantile of J over sliding attack-free windows."""
    if not 0.0 < far < 1.0:
        raise ConfigError(f"target FAR must lie in (0, 1), got {far}")
    values = np.concatenate([sliding_glr(s, Sigma, N) for s in streams])
    if values.size == 0:
        raise ConfigError(f"no complete GLR window of length {N} in the calibration data")
    limit = settings.glr_calibration_windows if max_windows is None else max_windows
    if values.size > limit:
        values = values[:limit]
    elif values.size < limit:
        logger.warning(f"GLR calibration uses {values.size} windows, fewer than the configured {limit}")
    threshold = float(np.quantile(values, 1.0 - far, method="higher"))
    logger.info(f"GLR threshold calibrated at FAR {far}: {threshold:.6g} over {values.size} windows")
    return threshold


def glr_pdd_detect(cfg: PddConfig, window, k0: int = 0) -> DetectorVerdict:
    if cfg.glr_threshold is None:
        raise ConfigError("GLR threshold is not calibrated")
    W = np.atleast_2d(np.asarray(window, dtype=float))
    if W.shape != (cfg.N, cfg.dim):
        raise DimensionError(f"GLR window must be {cfg.N}x{cfg.dim}, got {W.shape[0]}x{W.shape[1]}")
    return DetectorVerdict.judge("glr", k0, glr_statistic(W, cfg.Sigma), cfg.glr_threshold)


class GlrDetector:
    """Sliding-window GLR on r_PDD for multiplicative stealthy attacks."""

    name = "glr"

    def __init__(self, cfg: PddConfig, name: str | None = None):
        if cfg.glr_threshold is None:
            raise ConfigError("GLR threshold is not calibrated")
        self.cfg = cfg
        self.window: deque[np.ndarray] = deque(maxlen=cfg.N)
        if name:
            self.name = name

    def consume(self, obs: McObservation) -> DetectorVerdict | None:
        if obs.r_pdd is None:
            raise ConfigError("GLR detector needs r_PDD; the MC station has no Psi")
        self.window.append(obs.r_pdd)
        if len(self.window) < self.cfg.N:
            return None
        J = glr_statistic(np.vstack(self.window), self.cfg.Sigma)
        return DetectorVerdict.judge(self.name, obs.k - self.cfg.N + 1, J, self.cfg.glr_threshold)

    def reset(self) -> None:
        self.window.clear()


class AdditiveStealthChi2:
    """J = ‖Σ^{-1/2} r_PDD‖² against χ²_{1−α}(k_y)."""

    name = "additive_chi2"

    def __init__(self, cfg: PddConfig, alpha: float = 0.01, name: str | None = None):
        self.whiten = inverse_sqrt(cfg.Sigma, "nominal r_PDD covariance")
        self.threshold = chi2_quantile(1.0 - alpha, cfg.dim)
        self.alpha = alpha
        if name:
            self.name = name

    def statistic(self, r_pdd) -> float:
        z = self.whiten @ np.asarray(r_pdd, dtype=float)
        return float(z @ z)

    def consume(self, obs: McObservation) -> DetectorVerdict:
        if obs.r_pdd is None:
            raise ConfigError("additive stealth detection needs r_PDD; the MC station has no Psi")
        return DetectorVerdict.judge(self.name, obs.k, self.statistic(obs.r_pdd), self.threshold)

    def reset(self) -> None:
        pass


def additive_stealth_detect(cfg: PddConfig, frames: Iterable[McObservation], alpha: float = 0.01) -> list[DetectorVerdict]:
    detector = AdditiveStealthChi2(cfg, alpha)
    return [detector.consume(obs) for obs in frames]
