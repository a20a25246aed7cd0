"""Whitening post-filter for the Q_r1-filtered Kalman residual."""
import logging

import numpy as np

from src.errors import SingularSystemError
from src.sscore.connect import identity, product, subtract
from src.sscore.riccati import solve_dare
from src.sscore.statespace import StateSpaceModel, as_matrix, simulate

logger = logging.getLogger(__name__)


def inverse_sqrt(Sigma: np.ndarray, name: str = "covariance") -> np.ndarray:
    """Symmetric Σ^{-1/2}; raises on a covariance that is not positive definite."""
    S = 0.5 * (Sigma + Sigma.T)
    vals, vecs = np.linalg.eigh(S)
    if vals.size and vals.min() <= 1e-14 * max(1.0, float(np.abs(vals).max())):
        raise SingularSystemError(f"{name} is not positive definite (min eigenvalue {vals.min():.3e})")
    return vecs @ np.diag(vals ** -0.5) @ vecs.T


def design_attack_postfilter(Q_r1: StateSpaceModel, Sigma_ry) -> StateSpaceModel:
    """Innovation-form whitening filter R for o = Q_r1 r_y with r_y ~ N(0, Σ).

    R = (A − LC, −L, Σ_r1^{-1/2}C, Σ_r1^{-1/2}) with L the steady Kalman gain
    of Q_r1 driven by white r_y, so R·Q_r1 r_y has identity covariance.
    """
    p = Q_r1.inputs
    Sigma = as_matrix(Sigma_ry, rows=p, cols=p, name="Sigma_ry")
    A, B, C, D = Q_r1.A, Q_r1.B, Q_r1.C, Q_r1.D
    DSD = D @ Sigma @ D.T

    if Q_r1.is_static:
        W = inverse_sqrt(DSD, "D_r1 Σ D_r1ᵀ (rank deficiency)")
        return StateSpaceModel.static(W, Q_r1.Ts)

    P = solve_dare(A.T, C.T, B @ Sigma @ B.T, DSD, B @ Sigma @ D.T)
    Sigma_r1 = C @ P @ C.T + DSD
    W = inverse_sqrt(Sigma_r1, "innovation covariance Σ_r1 (rank deficiency)")
    L = np.linalg.solve(Sigma_r1, (A @ P @ C.T + B @ Sigma @ D.T).T).T
    R = StateSpaceModel(A - L @ C, -L, W @ C, W, Q_r1.Ts)
    logger.debug(f"Post-filter designed: order {R.n}, innovation covariance trace {np.trace(Sigma_r1):.6g}")
    return R


def attack_postfilter(R: StateSpaceModel, Q_r2: StateSpaceModel, Q_uMC: StateSpaceModel) -> StateSpaceModel:
    """R̄ = R(I − Q_r2 Q_uMC), applied to e = r^a_yu − Q_r2 v."""
    p = Q_r2.outputs
    return product(R, subtract(identity(p, R.Ts), product(Q_r2, Q_uMC)))


def whiteness_deviation(
    R: StateSpaceModel,
    Q_r1: StateSpaceModel,
    Sigma_ry,
    samples: int,
    rng: np.random.Generator,
    warmup: int = 500,
) -> float:
    """Relative Frobenius distance of cov(R Q_r1 r_y) from I, by simulation."""
    p = Q_r1.inputs
    Sigma = as_matrix(Sigma_ry, rows=p, cols=p, name="Sigma_ry")
    vals, vecs = np.linalg.eigh(0.5 * (Sigma + Sigma.T))
    factor = vecs @ np.diag(np.sqrt(np.clip(vals, 0.0, None))) @ vecs.T
    r_y = rng.standard_normal((samples + warmup, p)) @ factor.T
    out = simulate(R, simulate(Q_r1, r_y))[warmup:]
    cov = out.T @ out / out.shape[0]
    eye = np.eye(R.outputs)
    return float(np.linalg.norm(cov - eye, "fro") / np.linalg.norm(eye, "fro"))
