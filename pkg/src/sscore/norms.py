"""Frequency responses, stability tests and system norms."""
import logging

import numpy as np
from scipy import linalg

from src.config import settings
from src.errors import SingularSystemError, UnstableSystemError
from src.sscore.statespace import StateSpaceModel

logger = logging.getLogger(__name__)

EIG_TOL = 1e-8


def spectral_radius(A) -> float:
    A = np.asarray(A, dtype=float)
    if A.size == 0:
        return 0.0
    return float(np.max(np.abs(np.linalg.eigvals(A))))


def is_schur(A, margin: float | None = None) -> bool:
    """True iff every eigenvalue lies strictly inside the unit circle (with margin)."""
    margin = settings.schur_margin if margin is None else margin
    return spectral_radius(A) < 1.0 - margin


def require_stable(model: StateSpaceModel, name: str = "model") -> None:
    if not model.is_static and not is_schur(model.A):
        raise UnstableSystemError(f"{name} is not stable (spectral radius {spectral_radius(model.A):.6f})")


def frequency_grid(Ts: float = 0.1, size: int | None = None, decades: float = 4.0) -> np.ndarray:
    """Log-spaced frequencies (rad/s) in (0, π/Ts]."""
    size = settings.grid_size if size is None else size
    nyquist = np.pi / Ts
    return np.logspace(np.log10(nyquist) - decades, np.log10(nyquist), size)


def freq_response(model: StateSpaceModel, omega: float) -> np.ndarray:
    """C (zI − A)⁻¹ B + D evaluated at z = exp(jωTs)."""
    return freq_response_grid(model, np.array([omega]))[0]


def freq_response_grid(model: StateSpaceModel, omegas) -> np.ndarray:
    """Responses stacked along the first axis, shape (len(omegas), p, m)."""
    omegas = np.atleast_1d(np.asarray(omegas, dtype=float))
    D = model.D.astype(complex)
    if model.is_static:
        return np.broadcast_to(D, (omegas.size,) + D.shape).copy()
    z = np.exp(1j * omegas * model.Ts)
    n = model.n
    resolvent = z[:, None, None] * np.eye(n) - model.A
    cond = np.linalg.cond(resolvent)
    if np.any(cond > 1e12):
        bad = omegas[np.argmax(cond)]
        raise SingularSystemError(f"resolvent is near-singular at omega={bad:.6g} rad/s (cond {cond.max():.3e})")
    X = np.linalg.solve(resolvent, np.broadcast_to(model.B.astype(complex), (omegas.size, n, model.inputs)))
    return model.C @ X + D


def max_singular_values(model: StateSpaceModel, omegas) -> np.ndarray:
    resp = freq_response_grid(model, omegas)
    if resp.shape[1] == 0 or resp.shape[2] == 0:
        return np.zeros(resp.shape[0])
    return np.linalg.norm(resp, ord=2, axis=(1, 2))


def _bilinear(model: StateSpaceModel) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Continuous-time equivalent under z = (1 + s) / (1 − s); the H∞ norm is preserved."""
    n = model.n
    E = model.A + np.eye(n)
    Einv_A = np.linalg.solve(E, model.A - np.eye(n))
    Einv_B = np.linalg.solve(E, model.B)
    C_Einv = np.linalg.solve(E.T, model.C.T).T
    return Einv_A, np.sqrt(2.0) * Einv_B, np.sqrt(2.0) * C_Einv, model.D - model.C @ Einv_B


def _imaginary_crossings(Ac, Bc, Cc, Dc, gamma: float) -> np.ndarray:
    """Frequencies where γ is a singular value of the continuous response.

    Uses the extended pencil (M, E); a finite eigenvalue on the imaginary
    axis means the norm is at least γ.
    """
    n, m = Bc.shape
    p = Cc.shape[0]
    Z = np.zeros
    M = np.block([
        [Ac, Z((n, n)), Bc, Z((n, p))],
        [Z((n, n)), -Ac.T, Z((n, m)), -Cc.T],
        [Z((m, n)), Bc.T, -gamma * np.eye(m), Dc.T],
        [Cc, Z((p, n)), Dc, -gamma * np.eye(p)],
    ])
    E = linalg.block_diag(np.eye(2 * n), Z((m + p, m + p)))
    eigs = linalg.eigvals(M, E)
    eigs = eigs[np.isfinite(eigs)]
    on_axis = eigs[np.abs(eigs.real) <= EIG_TOL * (1.0 + np.abs(eigs))]
    return np.unique(np.abs(on_axis.imag))


def hinf_norm(model: StateSpaceModel, rtol: float | None = None) -> float:
    """H∞ norm by bisection on the bounded-real pencil test.

    The bracket starts at the grid maximum (plus ω = 0, π/Ts and the pole
    angles) and ten times that value. Each rejected γ also lifts the lower
    bound with the response at the midpoints of its crossing frequencies.
    """
    rtol = settings.hinf_rtol if rtol is None else rtol
    if model.is_static:
        return float(np.linalg.norm(model.D, 2)) if model.D.size else 0.0
    require_stable(model)
    if model.inputs == 0 or model.outputs == 0:
        return 0.0

    poles = np.linalg.eigvals(model.A)
    angles = np.abs(np.angle(poles)) / model.Ts
    nyquist = np.pi / model.Ts
    omegas = np.concatenate([frequency_grid(model.Ts), [0.0, nyquist], angles[angles > 0]])
    lo = float(max_singular_values(model, omegas).max())
    if lo == 0.0:
        return 0.0

    Ac, Bc, Cc, Dc = _bilinear(model)

    def refine(gamma: float) -> float | None:
        crossings = _imaginary_crossings(Ac, Bc, Cc, Dc, gamma)
        if crossings.size == 0:
            return None
        # continuous ω_c maps back to θ = 2·atan(ω_c)
        theta = 2.0 * np.arctan(crossings)
        probes = theta if theta.size == 1 else np.concatenate([theta, 0.5 * (theta[1:] + theta[:-1])])
        return float(max_singular_values(model, probes / model.Ts).max())

    hi = 10.0 * lo
    for _ in range(60):
        bound = refine(hi)
        if bound is None:
            break
        lo = max(lo, bound)
        hi *= 2.0
    else:
        raise UnstableSystemError("H∞ upper bracket did not close; model is close to instability")

    iterations = 0
    while hi - lo > rtol * hi and iterations < 200:
        iterations += 1
        mid = 0.5 * (lo + hi)
        bound = refine(mid)
        if bound is None:
            hi = mid
        else:
            lo = max(mid, bound)
    logger.debug(f"H∞ bisection finished after {iterations} steps, bracket [{lo:.12g}, {hi:.12g}]")
    return 0.5 * (lo + hi)


def h2_norm(model: StateSpaceModel) -> float:
    """sqrt(trace(C P Cᵀ + D Dᵀ)), P the controllability Gramian."""
    if model.is_static:
        return float(np.linalg.norm(model.D, "fro"))
    require_stable(model)
    P = linalg.solve_discrete_lyapunov(model.A, model.B @ model.B.T)
    return float(np.sqrt(max(0.0, np.trace(model.C @ P @ model.C.T + model.D @ model.D.T))))


def impulse_response(model: StateSpaceModel, steps: int) -> np.ndarray:
    """Markov parameters D, CB, CAB, … stacked as (steps, p, m)."""
    out = np.zeros((steps, model.outputs, model.inputs))
    if steps == 0:
        return out
    out[0] = model.D
    AkB = model.B
    for k in range(1, steps):
        out[k] = model.C @ AkB
        AkB = model.A @ AkB
    return out
