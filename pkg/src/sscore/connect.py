"""Interconnection algebra for discrete-time state-space models."""
import logging
from functools import reduce

import numpy as np
from scipy import linalg, signal

from src.errors import DimensionError, SingularSystemError
from src.sscore.statespace import StateSpaceModel, as_matrix

logger = logging.getLogger(__name__)


def _same_period(*models: StateSpaceModel) -> float:
    periods = {m.Ts for m in models}
    if len(periods) > 1:
        raise DimensionError(f"sample periods differ: {sorted(periods)}")
    return models[0].Ts


def series_connect(first: StateSpaceModel, second: StateSpaceModel) -> StateSpaceModel:
    """Realize second∘first: the output of ``first`` drives ``second``."""
    if first.outputs != second.inputs:
        raise DimensionError(
            f"series connection needs first.outputs == second.inputs, got {first.outputs} and {second.inputs}"
        )
    Ts = _same_period(first, second)
    n1, n2 = first.n, second.n
    A = np.block([
        [first.A, np.zeros((n1, n2))],
        [second.B @ first.C, second.A],
    ])
    B = np.vstack([first.B, second.B @ first.D])
    C = np.hstack([second.D @ first.C, second.C])
    D = second.D @ first.D
    return StateSpaceModel(A, B, C, D, Ts)


def product(*systems: StateSpaceModel) -> StateSpaceModel:
    """Transfer-matrix product G1·G2·…·Gk (Gk acts first)."""
    if not systems:
        raise DimensionError("product needs at least one system")
    return reduce(lambda acc, nxt: series_connect(nxt, acc), systems)


def add(*systems: StateSpaceModel) -> StateSpaceModel:
    """Parallel sum G1 + G2 + … of systems sharing input and output dimensions."""
    if not systems:
        raise DimensionError("add needs at least one system")
    first = systems[0]
    for other in systems[1:]:
        if (other.inputs, other.outputs) != (first.inputs, first.outputs):
            raise DimensionError(
                f"parallel sum needs equal shapes, got {first.outputs}x{first.inputs} and {other.outputs}x{other.inputs}"
            )
    Ts = _same_period(*systems)
    A = linalg.block_diag(*[s.A for s in systems]) if any(s.n for s in systems) else np.zeros((0, 0))
    B = np.vstack([s.B for s in systems])
    C = np.hstack([s.C for s in systems])
    D = sum(s.D for s in systems)
    return StateSpaceModel(A, B, C, D, Ts)


def scale(system: StateSpaceModel, gain) -> StateSpaceModel:
    """Left-multiply by a static gain (scalar or matrix)."""
    K = np.asarray(gain, dtype=float)
    if K.ndim == 0:
        return StateSpaceModel(system.A, system.B, K * system.C, K * system.D, system.Ts)
    K = as_matrix(K, cols=system.outputs, name="gain")
    return StateSpaceModel(system.A, system.B, K @ system.C, K @ system.D, system.Ts)


def negate(system: StateSpaceModel) -> StateSpaceModel:
    return scale(system, -1.0)


def subtract(left: StateSpaceModel, right: StateSpaceModel) -> StateSpaceModel:
    return add(left, negate(right))


def static_gain(gain, Ts: float = 0.1) -> StateSpaceModel:
    return StateSpaceModel.static(gain, Ts)


def identity(dim: int, Ts: float = 0.1) -> StateSpaceModel:
    return StateSpaceModel.identity(dim, Ts)


def hstack(*systems: StateSpaceModel) -> StateSpaceModel:
    """[G1 G2 …]: separate inputs, summed outputs."""
    outputs = {s.outputs for s in systems}
    if len(outputs) != 1:
        raise DimensionError(f"hstack needs equal output dimensions, got {sorted(outputs)}")
    Ts = _same_period(*systems)
    A = linalg.block_diag(*[s.A for s in systems]) if any(s.n for s in systems) else np.zeros((0, 0))
    n = A.shape[0]
    B = linalg.block_diag(*[s.B for s in systems]) if n else np.zeros((0, sum(s.inputs for s in systems)))
    C = np.hstack([s.C for s in systems])
    D = np.hstack([s.D for s in systems])
    return StateSpaceModel(A, B.reshape(n, -1) if n else B, C, D, Ts)


def vstack(*systems: StateSpaceModel) -> StateSpaceModel:
    """[G1; G2; …]: shared input, stacked outputs."""
    inputs = {s.inputs for s in systems}
    if len(inputs) != 1:
        raise DimensionError(f"vstack needs equal input dimensions, got {sorted(inputs)}")
    Ts = _same_period(*systems)
    A = linalg.block_diag(*[s.A for s in systems]) if any(s.n for s in systems) else np.zeros((0, 0))
    n = A.shape[0]
    B = np.vstack([s.B for s in systems])
    C = linalg.block_diag(*[s.C for s in systems]) if n else np.zeros((sum(s.outputs for s in systems), 0))
    D = np.vstack([s.D for s in systems])
    return StateSpaceModel(A, B, C.reshape(-1, n) if n else C, D, Ts)


def block_diagonal(*systems: StateSpaceModel) -> StateSpaceModel:
    """diag(G1, G2, …): separate inputs and outputs."""
    Ts = _same_period(*systems)
    n = sum(s.n for s in systems)
    A = linalg.block_diag(*[s.A for s in systems]) if n else np.zeros((0, 0))
    B = np.zeros((n, sum(s.inputs for s in systems)))
    C = np.zeros((sum(s.outputs for s in systems), n))
    D = np.zeros((sum(s.outputs for s in systems), sum(s.inputs for s in systems)))
    xi = ui = yi = 0
    for s in systems:
        B[xi:xi + s.n, ui:ui + s.inputs] = s.B
        C[yi:yi + s.outputs, xi:xi + s.n] = s.C
        D[yi:yi + s.outputs, ui:ui + s.inputs] = s.D
        xi, ui, yi = xi + s.n, ui + s.inputs, yi + s.outputs
    return StateSpaceModel(A, B, C, D, Ts)


def invert_io(model: StateSpaceModel) -> StateSpaceModel:
    """Input/output inverse (A - B D^-1 C, B D^-1, -D^-1 C, D^-1)."""
    if model.inputs != model.outputs:
        raise DimensionError(f"inverse needs a square system, got {model.outputs}x{model.inputs}")
    sv = np.linalg.svd(model.D, compute_uv=False)
    smallest = float(sv.min()) if sv.size else 0.0
    if sv.size == 0 or smallest <= 1e-12 * max(1.0, float(sv.max())):
        raise SingularSystemError(f"feedthrough D is singular (smallest singular value {smallest:.3e})")
    cond = float(sv.max() / smallest)
    if cond > 1e8:
        logger.warning(f"inverting feedthrough with condition number {cond:.3e}")
    Dinv = np.linalg.inv(model.D)
    A = model.A - model.B @ Dinv @ model.C
    B = model.B @ Dinv
    C = -Dinv @ model.C
    return StateSpaceModel(A, B, C, Dinv, model.Ts)


def closed_loop_matrix(plant: StateSpaceModel, controller: StateSpaceModel) -> np.ndarray:
    """Closed-loop A-matrix of the positive-feedback loop u = K y, y = G u."""
    if controller.inputs != plant.outputs or controller.outputs != plant.inputs:
        raise DimensionError("controller dimensions do not match the plant")
    Z = np.eye(plant.inputs) - controller.D @ plant.D
    if np.linalg.matrix_rank(Z) < Z.shape[0]:
        raise SingularSystemError("loop is ill-posed: I - Dk·Dg is singular")
    Zi = np.linalg.inv(Z)
    A, B, C, D = plant.A, plant.B, plant.C, plant.D
    Ak, Bk, Ck, Dk = controller.A, controller.B, controller.C, controller.D
    top = np.hstack([A + B @ Zi @ Dk @ C, B @ Zi @ Ck])
    bottom = np.hstack([Bk @ (C + D @ Zi @ Dk @ C), Ak + Bk @ D @ Zi @ Ck])
    return np.vstack([top, bottom])


def _krylov_basis(A: np.ndarray, B: np.ndarray, tol: float) -> np.ndarray:
    """Orthonormal basis of span[B, AB, A²B, …]."""
    n = A.shape[0]
    if B.size == 0 or n == 0:
        return np.zeros((n, 0))
    basis = linalg.orth(B, rcond=tol)
    while basis.shape[1] < n:
        grown = linalg.orth(np.hstack([basis, A @ basis]), rcond=tol)
        if grown.shape[1] == basis.shape[1]:
            break
        basis = grown
    return basis


def minimal_realization(model: StateSpaceModel, tol: float = 1e-10) -> StateSpaceModel:
    """Remove uncontrollable and unobservable states by orthogonal projection."""
    if model.is_static:
        return model
    Tc = _krylov_basis(model.A, model.B, tol)
    A = Tc.T @ model.A @ Tc
    B = Tc.T @ model.B
    C = model.C @ Tc
    To = _krylov_basis(A.T, C.T, tol)
    A, B, C = To.T @ A @ To, To.T @ B, C @ To
    reduced = StateSpaceModel(A, B, C, model.D, model.Ts)
    if reduced.n < model.n:
        logger.debug(f"minimal realization removed {model.n - reduced.n} of {model.n} states")
    return reduced


def transfer_to_statespace(numerator, denominator, Ts: float = 0.1) -> StateSpaceModel:
    """SISO z-domain transfer function (descending powers) to a state-space model."""
    num = np.atleast_1d(np.asarray(numerator, dtype=float))
    den = np.trim_zeros(np.atleast_1d(np.asarray(denominator, dtype=float)), "f")
    if den.size == 0:
        raise DimensionError("denominator must have a nonzero coefficient")
    num = np.trim_zeros(num, "f")
    if num.size == 0:
        return StateSpaceModel.zero(1, 1, Ts)
    if num.size > den.size:
        raise DimensionError(f"transfer function is improper: numerator degree {num.size - 1} > {den.size - 1}")
    if den.size == 1:
        return StateSpaceModel.static([[num[0] / den[0]]], Ts)
    A, B, C, D = signal.tf2ss(num, den)
    return StateSpaceModel(A, B, C, D, Ts)


def transfer_matrix(entries, Ts: float = 0.1) -> StateSpaceModel:
    """MIMO model from a row-major grid of (numerator, denominator) pairs."""
    rows = []
    for row in entries:
        blocks = [transfer_to_statespace(num, den, Ts) for num, den in row]
        rows.append(hstack(*blocks))
    return minimal_realization(_stack_rows(rows))


def _stack_rows(rows: list[StateSpaceModel]) -> StateSpaceModel:
    widths = {r.inputs for r in rows}
    if len(widths) != 1:
        raise DimensionError(f"transfer matrix rows have different widths: {sorted(widths)}")
    return vstack(*rows)


def diagonal_transfer(entries, Ts: float = 0.1) -> StateSpaceModel:
    """Block-diagonal model from a list of SISO (numerator, denominator) pairs."""
    return block_diagonal(*[transfer_to_statespace(num, den, Ts) for num, den in entries])
