"""Discrete algebraic Riccati equations and the gains designed from them."""
import logging
from dataclasses import dataclass

import numpy as np

from src.config import settings
from src.errors import RiccatiError, UnstableSystemError
from src.sscore.norms import is_schur, spectral_radius
from src.sscore.statespace import NoiseSpec, StateSpaceModel, as_matrix

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class GainReport:
    """Riccati-designed gain together with its certificate."""

    gain: np.ndarray
    P: np.ndarray
    innovation_cov: np.ndarray | None
    spectral_radius: float


def _symmetrize(M: np.ndarray) -> np.ndarray:
    return 0.5 * (M + M.T)


def _require_psd(M: np.ndarray, name: str, strict: bool = False) -> None:
    if M.size == 0:
        return
    scale = max(1.0, float(np.max(np.abs(M))))
    if not np.allclose(M, M.T, atol=1e-10 * scale, rtol=0.0):
        raise RiccatiError(f"{name} is not symmetric")
    low = float(np.linalg.eigvalsh(_symmetrize(M)).min())
    if strict and low <= 0:
        raise RiccatiError(f"{name} must be positive definite (min eigenvalue {low:.3e})")
    if low < -1e-10 * scale:
        raise RiccatiError(f"{name} is indefinite (min eigenvalue {low:.3e})")


def riccati_map(P: np.ndarray, A, B, Q, R, S=None) -> np.ndarray:
    """One application of the control-orientation Riccati map.

    Φ(P) = AᵀPA − (AᵀPB + S)(R + BᵀPB)⁻¹(BᵀPA + Sᵀ) + Q
    """
    cross = A.T @ P @ B + (0.0 if S is None else S)
    gram = R + B.T @ P @ B
    if B.shape[1] == 0:
        return _symmetrize(A.T @ P @ A + Q)
    return _symmetrize(A.T @ P @ A - cross @ np.linalg.solve(gram, cross.T) + Q)


def dare_residual(P, A, B, Q, R, S=None) -> float:
    """Frobenius norm of P − Φ(P)."""
    return float(np.linalg.norm(P - riccati_map(P, A, B, Q, R, S), "fro"))


def _doubling(A: np.ndarray, G: np.ndarray, H: np.ndarray, tol: float, max_iter: int) -> tuple[np.ndarray, int]:
    """Structure-preserving doubling; H_k converges to the stabilizing solution."""
    n = A.shape[0]
    eye = np.eye(n)
    for it in range(1, max_iter + 1):
        W = eye + G @ H
        try:
            WA = np.linalg.solve(W, A)
            WG = np.linalg.solve(W, G)
        except np.linalg.LinAlgError as e:
            raise RiccatiError(f"doubling step {it} hit a singular matrix: {e}") from e
        A_next = A @ WA
        G_next = _symmetrize(G + A @ WG @ A.T)
        H_next = _symmetrize(H + A.T @ H @ WA)
        if not (np.all(np.isfinite(H_next)) and np.all(np.isfinite(A_next))):
            raise RiccatiError(f"doubling diverged at step {it}")
        delta = np.linalg.norm(H_next - H, "fro")
        A, G, H = A_next, G_next, H_next
        if delta <= tol * max(1.0, np.linalg.norm(H, "fro")):
            return H, it
    raise RiccatiError(f"doubling did not converge in {max_iter} iterations")


def _fixed_point(A, B, Q, R, S, tol: float, max_iter: int) -> tuple[np.ndarray, int]:
    P = Q.copy()
    for it in range(1, max_iter + 1):
        try:
            P_next = riccati_map(P, A, B, Q, R, S)
        except np.linalg.LinAlgError as e:
            raise RiccatiError(f"R + BᵀPB became singular at iteration {it}") from e
        if not np.all(np.isfinite(P_next)):
            raise RiccatiError(f"Riccati iteration diverged at step {it}")
        delta = np.linalg.norm(P_next - P, "fro")
        P = P_next
        if delta <= tol * max(1.0, np.linalg.norm(P, "fro")):
            return P, it
    raise RiccatiError(f"Riccati iteration did not converge in {max_iter} iterations")


def solve_dare(A, B_or_Ct, Q, R, S=None) -> np.ndarray:
    """Stabilizing solution of the discrete algebraic Riccati equation.

    Control orientation: pass (A, B, Qx, Ru). Filter orientation: pass
    (Aᵀ, Cᵀ, Σ_w, Σ_ν), optionally with the cross covariance S. With R
    positive definite the structured doubling algorithm is used (the cross
    term is absorbed into A and Q); otherwise the plain Riccati map is
    iterated, which only needs R + BᵀPB invertible along the way.
    """
    A = as_matrix(A, name="A")
    n = A.shape[0]
    B = as_matrix(B_or_Ct, rows=n, name="B") if np.size(B_or_Ct) else np.zeros((n, 0))
    m = B.shape[1]
    Q = as_matrix(Q, rows=n, cols=n, name="Q")
    R = as_matrix(R, rows=m, cols=m, name="R") if m else np.zeros((0, 0))
    S = None if S is None else as_matrix(S, rows=n, cols=m, name="S")

    _require_psd(R, "R")
    if S is None:
        _require_psd(Q, "Q")
    else:
        _require_psd(np.block([[Q, S], [S.T, R]]), "[Q S; Sᵀ R]")

    tol, max_iter = settings.dare_tol, settings.dare_max_iter
    definite = m == 0 or float(np.linalg.eigvalsh(_symmetrize(R)).min()) > 1e-12 * max(1.0, np.abs(R).max())
    if definite:
        if m:
            Rinv = np.linalg.inv(R)
            A_red = A if S is None else A - B @ Rinv @ S.T
            Q_red = Q if S is None else _symmetrize(Q - S @ Rinv @ S.T)
            G0 = _symmetrize(B @ Rinv @ B.T)
        else:
            A_red, Q_red, G0 = A, Q, np.zeros((n, n))
        P, iters = _doubling(A_red, G0, _symmetrize(Q_red), tol, max_iter)
        method = "doubling"
    else:
        P, iters = _fixed_point(A, B, Q, R, S, tol, max_iter)
        method = "fixed-point"

    P = _symmetrize(P)
    residual = dare_residual(P, A, B, Q, R, S)
    if residual > settings.dare_residual_tol * max(1.0, np.linalg.norm(P, "fro")):
        raise RiccatiError(f"DARE residual {residual:.3e} exceeds tolerance ({method}, {iters} iterations)")
    logger.debug(f"DARE solved by {method} in {iters} iterations, residual {residual:.3e}")
    return P


def kalman_gain(model: StateSpaceModel, noise: NoiseSpec) -> GainReport:
    """Predictor-form Kalman gain L = A P Cᵀ Σ_ry⁻¹ with Σ_ry = C P Cᵀ + Σ_ν."""
    noise.check_dims(model)
    A, C = model.A, model.C
    P = solve_dare(A.T, C.T, noise.Sigma_w, noise.Sigma_nu)
    Sigma_ry = _symmetrize(C @ P @ C.T + noise.Sigma_nu)
    L = np.linalg.solve(Sigma_ry, (A @ P @ C.T).T).T
    rho = spectral_radius(A - L @ C)
    if not is_schur(A - L @ C):
        raise UnstableSystemError(f"A - LC is not Schur (spectral radius {rho:.6f}); (C, A) not detectable")
    return GainReport(L, P, Sigma_ry, rho)


def lq_gain(model: StateSpaceModel, Qx, Ru) -> GainReport:
    """LQ state feedback F = −(Ru + BᵀPB)⁻¹BᵀPA, so that u = F x."""
    A, B = model.A, model.B
    Qx = as_matrix(Qx, rows=model.n, cols=model.n, name="Qx")
    Ru = as_matrix(Ru, rows=model.inputs, cols=model.inputs, name="Ru")
    P = solve_dare(A, B, Qx, Ru)
    if model.inputs:
        F = -np.linalg.solve(Ru + B.T @ P @ B, B.T @ P @ A)
    else:
        F = np.zeros((0, model.n))
    rho = spectral_radius(A + B @ F)
    if not is_schur(A + B @ F):
        raise UnstableSystemError(f"A + BF is not Schur (spectral radius {rho:.6f}); (A, B) not stabilizable")
    return GainReport(F, P, None, rho)
