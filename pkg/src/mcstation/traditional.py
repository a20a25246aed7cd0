"""MC-station of the traditional configuration: full observer-based controller at the MC."""
import logging
from dataclasses import dataclass

import numpy as np

from src.factory.bezout import BezoutFactors
from src.factory.youla import YoulaParam
from src.plantside.reference import PiecewiseReference
from src.sscore.statespace import LtiFilter, StateSpaceModel

logger = logging.getLogger(__name__)


@dataclass(eq=False)
class TraditionalEvaluation:
    k: int
    y_a: np.ndarray
    u_mc: np.ndarray
    r_y: np.ndarray
    vbar: np.ndarray


class TraditionalMc:
    """u_MC = F x̂ + V Q(W r_y) + Q_v v̄ with r_y = y^a − Cx̂ − D u_MC.

    Only y^a reaches the station and only u_MC leaves it, so any input-channel
    tampering stays outside the observer's view.
    """

    def __init__(self, factors: BezoutFactors, param: YoulaParam, Q_v: StateSpaceModel, vbar: PiecewiseReference):
        param.check_dims(factors)
        self.factors = factors
        self.q = LtiFilter(param.Q)
        self.q_v = LtiFilter(Q_v)
        self.vbar = vbar
        self.xhat = np.zeros(factors.plant.n)

    def evaluate(self, y_a, u_guess, k: int, linear_only: bool = False) -> TraditionalEvaluation:
        plant = self.factors.plant
        gains = self.factors.gains
        y_a = np.asarray(y_a, dtype=float)
        u_g = np.asarray(u_guess, dtype=float)
        xhat = np.zeros_like(self.xhat) if linear_only else self.xhat
        vbar = np.zeros(self.vbar.dim) if linear_only else self.vbar.value(k)
        r_y = y_a - plant.C @ xhat - plant.D @ u_g
        u = gains.F @ xhat + gains.V @ self.q.output(gains.W @ r_y, linear_only) + self.q_v.output(vbar, linear_only)
        return TraditionalEvaluation(k=k, y_a=y_a, u_mc=u, r_y=r_y, vbar=vbar)

    def commit(self, ev: TraditionalEvaluation) -> np.ndarray:
        """Advance observer and filters; returns the residual r_y seen by the MC."""
        plant = self.factors.plant
        self.q.advance(self.factors.gains.W @ ev.r_y)
        self.q_v.advance(ev.vbar)
        self.xhat = plant.A @ self.xhat + plant.B @ ev.u_mc + self.factors.L @ ev.r_y
        return ev.r_y.copy()
