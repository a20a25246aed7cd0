"""Coprime factors of an observer-based loop and the Bezout identity check."""
import logging
from dataclasses import dataclass

import numpy as np

from src.errors import DimensionError, SingularSystemError, UnstableSystemError
from src.sscore.norms import freq_response_grid, frequency_grid, is_schur, spectral_radius
from src.sscore.statespace import StateSpaceModel, as_matrix

logger = logging.getLogger(__name__)

MAX_WEIGHT_COND = 1e8


@dataclass(frozen=True, eq=False)
class FactorGains:
    """Feedback gain F, observer gain L and invertible weightings W, V."""

    F: np.ndarray
    L: np.ndarray
    W: np.ndarray | None = None
    V: np.ndarray | None = None

    def __post_init__(self):
        F = as_matrix(self.F, name="F")
        L = as_matrix(self.L, cols=None, name="L")
        m, n = F.shape
        if L.shape[0] != n:
            raise DimensionError(f"L has {L.shape[0]} rows but F acts on {n} states")
        p = L.shape[1]
        W = np.eye(p) if self.W is None else as_matrix(self.W, rows=p, cols=p, name="W")
        V = np.eye(m) if self.V is None else as_matrix(self.V, rows=m, cols=m, name="V")
        for name, mat in (("W", W), ("V", V)):
            cond = np.linalg.cond(mat) if mat.size else 1.0
            if not np.isfinite(cond) or cond >= MAX_WEIGHT_COND:
                raise SingularSystemError(f"weighting {name} is not safely invertible (condition number {cond:.3e})")
        object.__setattr__(self, "F", F)
        object.__setattr__(self, "L", L)
        object.__setattr__(self, "W", W)
        object.__setattr__(self, "V", V)

    def check(self, model: StateSpaceModel) -> None:
        """Require A + BF and A − LC to be Schur for ``model``."""
        if self.F.shape != (model.inputs, model.n):
            raise DimensionError(f"F has shape {self.F.shape}, expected {(model.inputs, model.n)}")
        if self.L.shape != (model.n, model.outputs):
            raise DimensionError(f"L has shape {self.L.shape}, expected {(model.n, model.outputs)}")
        AF = model.A + model.B @ self.F
        AL = model.A - self.L @ model.C
        if not is_schur(AF):
            raise UnstableSystemError(f"A + BF is not Schur (spectral radius {spectral_radius(AF):.6f})")
        if not is_schur(AL):
            raise UnstableSystemError(f"A - LC is not Schur (spectral radius {spectral_radius(AL):.6f})")


@dataclass(frozen=True, eq=False)
class BezoutFactors:
    """Left and right coprime factors with their Bezout partners."""

    plant: StateSpaceModel
    gains: FactorGains
    M: StateSpaceModel
    N: StateSpaceModel
    Mh: StateSpaceModel
    Nh: StateSpaceModel
    X: StateSpaceModel
    Y: StateSpaceModel
    Xh: StateSpaceModel
    Yh: StateSpaceModel

    @property
    def F(self) -> np.ndarray:
        return self.gains.F

    @property
    def L(self) -> np.ndarray:
        return self.gains.L

    def items(self) -> list[tuple[str, StateSpaceModel]]:
        return [
            ("M", self.M), ("N", self.N), ("Mh", self.Mh), ("Nh", self.Nh),
            ("X", self.X), ("Y", self.Y), ("Xh", self.Xh), ("Yh", self.Yh),
        ]


def build_bezout_factors(model: StateSpaceModel, gains: FactorGains) -> BezoutFactors:
    """State-space realizations of the eight factors for (F, L, W, V)."""
    gains.check(model)
    A, B, C, D, Ts = model.A, model.B, model.C, model.D, model.Ts
    F, L, W, V = gains.F, gains.L, gains.W, gains.V
    Winv, Vinv = np.linalg.inv(W), np.linalg.inv(V)
    AF = A + B @ F
    AL = A - L @ C
    CF = C + D @ F
    BL = B - L @ D
    m, p = model.inputs, model.outputs

    factors = BezoutFactors(
        plant=model,
        gains=gains,
        M=StateSpaceModel(AF, B @ V, F, V, Ts),
        N=StateSpaceModel(AF, B @ V, CF, D @ V, Ts),
        Mh=StateSpaceModel(AL, -L, W @ C, W, Ts),
        Nh=StateSpaceModel(AL, BL, W @ C, W @ D, Ts),
        X=StateSpaceModel(AL, -BL, Vinv @ F, Vinv, Ts),
        Y=StateSpaceModel(AL, -L, Vinv @ F, np.zeros((m, p)), Ts),
        Xh=StateSpaceModel(AF, L @ Winv, CF, Winv, Ts),
        Yh=StateSpaceModel(AF, -L @ Winv, F, np.zeros((m, p)), Ts),
    )
    logger.debug(
        f"Built Bezout factors: rho(A+BF)={spectral_radius(AF):.4f}, rho(A-LC)={spectral_radius(AL):.4f}"
    )
    return factors


def verify_bezout(factors: BezoutFactors, grid_size: int | None = None) -> float:
    """Largest ‖[X Y; −N̂ M̂][M −Ŷ; N X̂] − I‖_F over the frequency grid."""
    omegas = frequency_grid(factors.plant.Ts, grid_size)
    resp = {name: freq_response_grid(sys, omegas) for name, sys in factors.items()}
    left = np.concatenate([
        np.concatenate([resp["X"], resp["Y"]], axis=2),
        np.concatenate([-resp["Nh"], resp["Mh"]], axis=2),
    ], axis=1)
    right = np.concatenate([
        np.concatenate([resp["M"], -resp["Yh"]], axis=2),
        np.concatenate([resp["N"], resp["Xh"]], axis=2),
    ], axis=1)
    size = left.shape[1]
    deviation = np.linalg.norm(left @ right - np.eye(size), ord="fro", axis=(1, 2))
    return float(deviation.max())
