"""Mode re-parameterization for moving-target gain switching.

Every mode (F_i, L_i) is related to the base pair (F, L) by a set of stable
compensators, so the plant side can run any mode while the MC-station keeps
seeing base-frame residuals.
"""
import bisect
import logging
from dataclasses import dataclass, field

import numpy as np

from src.errors import ConfigError, NumericalError
from src.factory.bezout import BezoutFactors, FactorGains, build_bezout_factors
from src.sscore.connect import add, hstack, invert_io, negate, product, vstack
from src.sscore.norms import freq_response_grid, frequency_grid
from src.sscore.statespace import Signal, StateSpaceModel, simulate

logger = logging.getLogger(__name__)

INVERSE_TOL = 1e-8


@dataclass(frozen=True, eq=False)
class ModeCompensators:
    """Compensators relating mode i to the base mode."""

    index: int
    factors: BezoutFactors
    V_i0: StateSpaceModel
    V_0i: StateSpaceModel
    R_i0: StateSpaceModel
    R_0i: StateSpaceModel
    Rbar_i0: StateSpaceModel
    Vbar_i0: StateSpaceModel
    Q_i: StateSpaceModel

    @property
    def Q_u(self) -> StateSpaceModel:
        """Weight of r_{u,i} in the image-side reconstruction."""
        return self.V_i0

    @property
    def Q_e(self) -> StateSpaceModel:
        """Weight of r_{y,i} in the image-side reconstruction."""
        return self.Vbar_i0


def _grid_identity_deviation(system: StateSpaceModel) -> float:
    resp = freq_response_grid(system, frequency_grid(system.Ts))
    return float(np.linalg.norm(resp - np.eye(system.outputs), ord="fro", axis=(1, 2)).max())


def _require_unit_weights(base: BezoutFactors) -> None:
    gains = base.gains
    if not (np.allclose(gains.W, np.eye(gains.W.shape[0])) and np.allclose(gains.V, np.eye(gains.V.shape[0]))):
        raise ConfigError("mode re-parameterization needs the base factors built with W = I and V = I")


def reparameterize_mode(base: BezoutFactors, mode: FactorGains, index: int = 1) -> ModeCompensators:
    """Compensators for switching the embedded gains from (F, L) to (F_i, L_i)."""
    _require_unit_weights(base)
    plant = base.plant
    A, B, C, Ts = plant.A, plant.B, plant.C, plant.Ts
    F, L = base.F, base.L
    Fi, Li = mode.F, mode.L
    factors_i = build_bezout_factors(plant, FactorGains(Fi, Li))
    m, p = plant.inputs, plant.outputs

    V_i0 = StateSpaceModel(A + B @ Fi, B, Fi - F, np.eye(m), Ts)
    V_0i = StateSpaceModel(A + B @ F, B, F - Fi, np.eye(m), Ts)
    R_0i = StateSpaceModel(A - L @ C, Li - L, C, np.eye(p), Ts)
    R_i0 = invert_io(R_0i)
    Vbar_i0 = add(product(base.X, negate(factors_i.Yh)), product(base.Y, factors_i.Xh))
    Rbar_i0 = add(product(factors_i.X, negate(base.Yh)), product(factors_i.Y, base.Xh))
    Q_i = product(Rbar_i0, R_0i)

    for name, pair in (("V_i0·V_0i", product(V_i0, V_0i)), ("R_i0·R_0i", product(R_i0, R_0i))):
        deviation = _grid_identity_deviation(pair)
        if deviation > INVERSE_TOL:
            raise NumericalError(f"mode {index}: {name} deviates from identity by {deviation:.3e}")

    return ModeCompensators(
        index=index,
        factors=factors_i,
        V_i0=V_i0,
        V_0i=V_0i,
        R_i0=R_i0,
        R_0i=R_0i,
        Rbar_i0=Rbar_i0,
        Vbar_i0=Vbar_i0,
        Q_i=Q_i,
    )


def io_from_mode_residuals(
    base: BezoutFactors, comps: ModeCompensators, r_u_i: Signal, r_y_i: Signal
) -> tuple[Signal, Signal]:
    """[u; y] = [M; N](V_i0 r_{u,i} + V̄_i0 r_{y,i}) + [−Ŷ; X̂] R_0i r_{y,i}."""
    image = vstack(base.M, base.N)
    kernel_side = vstack(negate(base.Yh), base.Xh)
    from_ru = product(image, comps.Q_u)
    from_ry = add(product(image, comps.Q_e), product(kernel_side, comps.R_0i))
    stacked = simulate(hstack(from_ru, from_ry), np.hstack([r_u_i.values, r_y_i.values]))
    m = base.plant.inputs
    return Signal(stacked[:, :m], r_u_i.Ts, r_u_i.start), Signal(stacked[:, m:], r_u_i.Ts, r_u_i.start)


@dataclass(eq=False)
class ModeSet:
    """Gain pairs (index 0 is the base pair) and a piecewise-constant schedule.

    ``schedule`` holds (start_step, mode_index) breakpoints; mode 0 is active
    before the first breakpoint.
    """

    gains: list[FactorGains]
    schedule: list[tuple[int, int]] = field(default_factory=list)

    def __post_init__(self):
        if not self.gains:
            raise ConfigError("mode set needs at least the base gains")
        self.schedule = sorted((int(k), int(i)) for k, i in self.schedule)
        for k, i in self.schedule:
            if not 0 <= i < len(self.gains):
                raise ConfigError(f"schedule selects mode {i} at step {k}, but only {len(self.gains)} modes exist")
            if k < 0:
                raise ConfigError(f"schedule breakpoint at negative step {k}")
        self._starts = [k for k, _ in self.schedule]

    def __len__(self) -> int:
        return len(self.gains)

    def mode_at(self, k: int) -> int:
        pos = bisect.bisect_right(self._starts, k) - 1
        return 0 if pos < 0 else self.schedule[pos][1]

    def compensators(self, base: BezoutFactors) -> list[ModeCompensators]:
        """Compensators for every mode; rejects non-stabilizing modes."""
        return [reparameterize_mode(base, g, i) for i, g in enumerate(self.gains)]


def random_dwell_schedule(
    n_modes: int, steps: int, min_dwell: int, max_dwell: int, rng: np.random.Generator
) -> list[tuple[int, int]]:
    """Seeded moving-target schedule: random dwell times, never repeating a mode."""
    if n_modes < 1:
        raise ConfigError("need at least one mode")
    if not 1 <= min_dwell <= max_dwell:
        raise ConfigError(f"invalid dwell range [{min_dwell}, {max_dwell}]")
    schedule = [(0, 0)]
    k, current = 0, 0
    while n_modes > 1:
        k += int(rng.integers(min_dwell, max_dwell + 1))
        if k >= steps:
            break
        choices = [i for i in range(n_modes) if i != current]
        current = int(rng.choice(choices))
        schedule.append((k, current))
    logger.debug(f"Generated moving-target schedule with {len(schedule)} segments over {steps} steps")
    return schedule
