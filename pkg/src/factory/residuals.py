"""The one-to-one map between plant I/O data and the (r_u, r_y) residual pair."""
import numpy as np

from src.errors import DimensionError
from src.factory.bezout import BezoutFactors
from src.factory.youla import YoulaParam
from src.sscore.connect import add, hstack, negate, product, subtract, vstack
from src.sscore.statespace import Signal, StateSpaceModel, simulate


def residual_generator(factors: BezoutFactors, param: YoulaParam) -> StateSpaceModel:
    """[r_u; r_y] = [[X + QN̂, Y − QM̂], [−N̂, M̂]] [u; y]."""
    param.check_dims(factors)
    Q = param.Q
    top = hstack(add(factors.X, product(Q, factors.Nh)), subtract(factors.Y, product(Q, factors.Mh)))
    bottom = hstack(negate(factors.Nh), factors.Mh)
    return vstack(top, bottom)


def io_reconstructor(factors: BezoutFactors, param: YoulaParam) -> StateSpaceModel:
    """[u; y] = [M; N] r_u + [−Ŷ + MQ; X̂ + NQ] r_y."""
    param.check_dims(factors)
    Q = param.Q
    image = vstack(factors.M, factors.N)
    kernel_side = vstack(
        add(negate(factors.Yh), product(factors.M, Q)),
        add(factors.Xh, product(factors.N, Q)),
    )
    return hstack(image, kernel_side)


def _check_aligned(first: Signal, second: Signal, names: str) -> None:
    if not first.aligned_with(second):
        raise DimensionError(f"{names} are not aligned ({len(first)} vs {len(second)} samples)")


def residuals_from_io(factors: BezoutFactors, param: YoulaParam, u: Signal, y: Signal) -> tuple[Signal, Signal]:
    """Residual pair of recorded I/O data, filters started from rest."""
    _check_aligned(u, y, "u and y")
    plant = factors.plant
    if u.dim != plant.inputs or y.dim != plant.outputs:
        raise DimensionError(f"expected u of dim {plant.inputs} and y of dim {plant.outputs}")
    stacked = simulate(residual_generator(factors, param), np.hstack([u.values, y.values]))
    m = plant.inputs
    return Signal(stacked[:, :m], u.Ts, u.start), Signal(stacked[:, m:], u.Ts, u.start)


def io_from_residuals(factors: BezoutFactors, param: YoulaParam, r_u: Signal, r_y: Signal) -> tuple[Signal, Signal]:
    """Inverse of residuals_from_io."""
    _check_aligned(r_u, r_y, "r_u and r_y")
    plant = factors.plant
    if r_u.dim != plant.inputs or r_y.dim != plant.outputs:
        raise DimensionError(f"expected r_u of dim {plant.inputs} and r_y of dim {plant.outputs}")
    stacked = simulate(io_reconstructor(factors, param), np.hstack([r_u.values, r_y.values]))
    m = plant.inputs
    return Signal(stacked[:, :m], r_u.Ts, r_u.start), Signal(stacked[:, m:], r_u.Ts, r_u.start)
