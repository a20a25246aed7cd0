"""Covert and feedback-stealthy attack construction."""
import logging

import numpy as np
from scipy import linalg

from src.attacks.specs import CovertAttack, UnitaryChoice
from src.errors import ConfigError, SingularSystemError
from src.mcstation.control import McConfig
from src.plantside.profiles import VectorProfile, Window
from src.sscore.statespace import as_matrix

logger = logging.getLogger(__name__)


def covert_attack_gen(cfg: McConfig, a_uMC: VectorProfile, window: Window) -> CovertAttack:
    """a_ryu = −Q_r2 a_uMC, so that η_a = Q_r2 a_uMC + a_ryu vanishes."""
    return CovertAttack(window=window, a_uMC=a_uMC, Q_r2=cfg.Q_r2)


def estimate_steady_stats(frames, N: int | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Maximum-likelihood mean ζ̂ and covariance Σ̂ of the last N frames."""
    R = np.atleast_2d(np.asarray(frames, dtype=float))
    N = R.shape[0] if N is None else N
    dim = R.shape[1]
    if N < 10 * dim or R.shape[0] < N:
        raise ConfigError(f"steady statistics need N >= {10 * dim} frames, got {min(N, R.shape[0])}")
    window = R[-N:]
    zeta = window.mean(axis=0)
    centered = window - zeta
    return zeta, centered.T @ centered / N


def unitary_factor(choice: UnitaryChoice, dim: int, rng: np.random.Generator | None = None) -> np.ndarray:
    if choice == UnitaryChoice.IDENTITY:
        return np.eye(dim)
    if choice == UnitaryChoice.NEGATIVE:
        return -np.eye(dim)
    if rng is None:
        raise ConfigError("a random unitary factor needs a generator")
    Qm, Rm = np.linalg.qr(rng.standard_normal((dim, dim)))
    return Qm @ np.diag(np.sign(np.diag(Rm)))


def _sqrt_psd(M: np.ndarray) -> np.ndarray:
    vals, vecs = np.linalg.eigh(0.5 * (M + M.T))
    return vecs @ np.diag(np.sqrt(np.clip(vals, 0.0, None))) @ vecs.T


class FeedbackStealthDesign:
    """Kalman recursion Π and the moment-preserving scaling Ξ = Σ̂^{1/2} U Σ_Δ^{-1/2}.

    Each frame r gives Δr = r − ζ̂ − C_Π x̂_Π and r^a = Ξ Δr + ζ̂, so that
    r^a has mean ζ̂ and covariance Σ̂ whenever Δr is white with covariance Σ_Δ.
    """

    def __init__(self, zeta_hat, Sigma_hat, U: np.ndarray, A_pi=None, C_pi=None, Q_pi=None):
        self.zeta = np.asarray(zeta_hat, dtype=float).reshape(-1)
        p = self.zeta.size
        self.Sigma = as_matrix(Sigma_hat, rows=p, cols=p, name="Sigma_hat")
        self.U = as_matrix(U, rows=p, cols=p, name="U")
        if not np.allclose(self.U @ self.U.T, np.eye(p), atol=1e-10):
            raise ConfigError("U must be orthogonal")
        self.A = np.zeros((p, p)) if A_pi is None else as_matrix(A_pi, rows=p, cols=p, name="A_pi")
        self.C = np.eye(p) if C_pi is None else as_matrix(C_pi, rows=p, cols=p, name="C_pi")
        self.Q = np.zeros((p, p)) if Q_pi is None else as_matrix(Q_pi, rows=p, cols=p, name="Q_pi")
        self.Sigma_half = _sqrt_psd(self.Sigma)
        self.reset()
        Pi_a = self.Pi_a
        if not np.allclose(Pi_a @ self.Sigma @ Pi_a.T, self.Sigma, rtol=0.0, atol=1e-8):
            raise ConfigError("Pi_a does not preserve the residual covariance Sigma_hat")

    @property
    def dim(self) -> int:
        return self.zeta.size

    def reset(self) -> None:
        p = self.dim
        self.xhat = np.zeros(p)
        self.P = np.zeros((p, p))
        self._update_scaling()

    def _update_scaling(self) -> None:
        self.Sigma_delta = self.C @ self.P @ self.C.T + self.Sigma
        vals, vecs = np.linalg.eigh(0.5 * (self.Sigma_delta + self.Sigma_delta.T))
        if vals.min() <= 1e-14 * max(1.0, float(np.abs(vals).max())):
            raise SingularSystemError(f"innovation covariance Σ_Δ is singular (min eigenvalue {vals.min():.3e})")
        inv_half = vecs @ np.diag(vals ** -0.5) @ vecs.T
        self.Xi = self.Sigma_half @ self.U @ inv_half
        self.gain = self.A @ self.P @ self.C.T @ np.linalg.inv(self.Sigma_delta)

    def output(self, r, linear_only: bool = False) -> np.ndarray:
        r = np.asarray(r, dtype=float)
        if linear_only:
            return self.Xi @ r
        return self.Xi @ (r - self.zeta - self.C @ self.xhat) + self.zeta

    def advance(self, r) -> np.ndarray:
        out = self.output(r)
        delta = np.asarray(r, dtype=float) - self.zeta - self.C @ self.xhat
        self.xhat = self.A @ self.xhat + self.gain @ delta
        self.P = self.A @ self.P @ self.A.T + self.Q - self.gain @ self.Sigma_delta @ self.gain.T
        self._update_scaling()
        return out

    @property
    def Pi_a(self) -> np.ndarray:
        """Current static part Ξ of the attack operator."""
        return self.Xi.copy()


def feedback_stealth_gen(design: FeedbackStealthDesign, frames) -> np.ndarray:
    """Transform a (steps, p) stream of r_yu frames."""
    R = np.atleast_2d(np.asarray(frames, dtype=float))
    return np.vstack([design.advance(r) for r in R]) if R.shape[0] else R.copy()


def moment_mismatch(stream, zeta, Sigma) -> tuple[float, float]:
    """(‖mean − ζ‖∞, relative Frobenius covariance error) of an attacked stream."""
    R = np.atleast_2d(np.asarray(stream, dtype=float))
    mean = R.mean(axis=0)
    centered = R - mean
    cov = centered.T @ centered / R.shape[0]
    Sigma = np.asarray(Sigma, dtype=float)
    return float(np.abs(mean - zeta).max()), float(linalg.norm(cov - Sigma, "fro") / linalg.norm(Sigma, "fro"))
