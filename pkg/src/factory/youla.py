"""Youla-parameterized stabilizing controllers."""
import logging
from dataclasses import dataclass
from typing import Literal

import numpy as np

from src.errors import DimensionError, SingularSystemError, UnstableSystemError
from src.factory.bezout import BezoutFactors
from src.sscore.connect import add, closed_loop_matrix, invert_io, negate, product, subtract
from src.sscore.norms import is_schur, require_stable, spectral_radius
from src.sscore.statespace import StateSpaceModel

logger = logging.getLogger(__name__)

YoulaForm = Literal["observer", "left", "right"]


@dataclass(frozen=True, eq=False)
class YoulaParam:
    """Stable parameter system Q (m×p)."""

    Q: StateSpaceModel

    def __post_init__(self):
        require_stable(self.Q, "Youla parameter Q")

    @classmethod
    def zero(cls, inputs: int, outputs: int, Ts: float = 0.1) -> "YoulaParam":
        """Q = 0, mapping p residual channels to m inputs."""
        return cls(StateSpaceModel.zero(inputs, outputs, Ts))

    def check_dims(self, factors: BezoutFactors) -> None:
        plant = factors.plant
        if (self.Q.outputs, self.Q.inputs) != (plant.inputs, plant.outputs):
            raise DimensionError(
                f"Q must be {plant.inputs}x{plant.outputs}, got {self.Q.outputs}x{self.Q.inputs}"
            )


def _observer_form(factors: BezoutFactors, Q: StateSpaceModel) -> StateSpaceModel:
    """u = F x̂ + V Q(W r_y) with the observer driven by r_y = y − Cx̂ − Du."""
    plant = factors.plant
    A, B, C, D = plant.A, plant.B, plant.C, plant.D
    F, L, W, V = factors.gains.F, factors.gains.L, factors.gains.W, factors.gains.V
    Aq, Bq, Cq, Dq = Q.A, Q.B, Q.C, Q.D
    n, nq, m, p = plant.n, Q.n, plant.inputs, plant.outputs

    Z = np.eye(m) + V @ Dq @ W @ D
    if np.linalg.matrix_rank(Z) < m:
        raise SingularSystemError("static part of X + QN̂ is singular")
    Zi = np.linalg.inv(Z)
    Ku_x = Zi @ (F - V @ Dq @ W @ C)
    Ku_q = Zi @ V @ Cq
    Ku_y = Zi @ V @ Dq @ W
    # r_y = Rx x̂ + Rq ξ + Ry y
    Rx = -C - D @ Ku_x
    Rq = -D @ Ku_q
    Ry = np.eye(p) - D @ Ku_y

    Ak = np.block([
        [A + B @ Ku_x + L @ Rx, B @ Ku_q + L @ Rq],
        [Bq @ W @ Rx, Aq + Bq @ W @ Rq],
    ])
    Bk = np.vstack([B @ Ku_y + L @ Ry, Bq @ W @ Ry])
    Ck = np.hstack([Ku_x, Ku_q])
    return StateSpaceModel(Ak.reshape(n + nq, n + nq), Bk, Ck, Ku_y, plant.Ts)


def _left_form(factors: BezoutFactors, Q: StateSpaceModel) -> StateSpaceModel:
    """−(X + QN̂)⁻¹(Y − QM̂)."""
    denominator = add(factors.X, product(Q, factors.Nh))
    numerator = subtract(factors.Y, product(Q, factors.Mh))
    return negate(product(invert_io(denominator), numerator))


def _right_form(factors: BezoutFactors, Q: StateSpaceModel) -> StateSpaceModel:
    """−(Ŷ − MQ)(X̂ + NQ)⁻¹."""
    numerator = subtract(factors.Yh, product(factors.M, Q))
    denominator = add(factors.Xh, product(factors.N, Q))
    return negate(product(numerator, invert_io(denominator)))


def internally_stable(plant: StateSpaceModel, controller: StateSpaceModel) -> bool:
    """Positive-feedback loop u = K y is internally stable."""
    return is_schur(closed_loop_matrix(plant, controller))


def youla_controller(factors: BezoutFactors, param: YoulaParam, form: YoulaForm = "observer") -> StateSpaceModel:
    """Stabilizing controller K for parameter Q, sign convention u = K y.

    ``observer`` realizes K with states (x̂, ξ_Q), so the closed loop has
    exactly the eigenvalues of A + BF, A − LC and Q; its internal stability
    is verified. ``left`` and ``right`` assemble the two coprime formulas
    from the factor realizations and are meant for frequency-domain
    comparison, since their realizations carry hidden modes.
    """
    param.check_dims(factors)
    if form == "observer":
        controller = _observer_form(factors, param.Q)
        closed = closed_loop_matrix(factors.plant, controller)
        if not is_schur(closed):
            raise UnstableSystemError(
                f"Youla closed loop is not Schur (spectral radius {spectral_radius(closed):.6f})"
            )
        return controller
    if form == "left":
        return _left_form(factors, param.Q)
    if form == "right":
        return _right_form(factors, param.Q)
    raise ValueError(f"Unknown Youla form: {form}")
