"""Reference schedule and the shaping filter Q_v."""
import bisect
from dataclasses import dataclass

import numpy as np

from src.errors import ConfigError
from src.sscore.norms import require_stable
from src.sscore.statespace import StateSpaceModel, as_vector


@dataclass(frozen=True, eq=False)
class PiecewiseReference:
    """v̄(k) held constant between (start_step, value) breakpoints."""

    breakpoints: tuple[tuple[int, np.ndarray], ...]

    def __post_init__(self):
        if not self.breakpoints:
            raise ConfigError("reference needs at least one breakpoint")
        points = sorted(((int(k), np.asarray(v, dtype=float).reshape(-1)) for k, v in self.breakpoints), key=lambda kv: kv[0])
        if points[0][0] != 0:
            raise ConfigError("reference must start at step 0")
        dims = {v.shape[0] for _, v in points}
        if len(dims) != 1:
            raise ConfigError(f"reference values have inconsistent dimensions {sorted(dims)}")
        object.__setattr__(self, "breakpoints", tuple(points))
        object.__setattr__(self, "_starts", [k for k, _ in points])

    @classmethod
    def constant(cls, value) -> "PiecewiseReference":
        return cls(((0, value),))

    @property
    def dim(self) -> int:
        return self.breakpoints[0][1].shape[0]

    def value(self, k: int) -> np.ndarray:
        pos = bisect.bisect_right(self._starts, k) - 1
        return self.breakpoints[max(pos, 0)][1]


@dataclass(frozen=True, eq=False)
class ReferenceConfig:
    """Target v̄, embedded baseline v̄₀ and pre-filter Q_v.

    The MC applies v = Q_v(v̄ − v̄₀) and the plant side v₀ = Q_v v̄₀.
    """

    vbar: PiecewiseReference
    vbar0: np.ndarray
    Q_v: StateSpaceModel

    def __post_init__(self):
        require_stable(self.Q_v, "Q_v")
        object.__setattr__(self, "vbar0", as_vector(self.vbar0, self.vbar.dim, "vbar0"))
        if self.Q_v.inputs != self.vbar.dim:
            raise ConfigError(f"Q_v expects {self.Q_v.inputs} inputs, reference has dimension {self.vbar.dim}")

    @classmethod
    def with_default_baseline(cls, vbar: PiecewiseReference, Q_v: StateSpaceModel) -> "ReferenceConfig":
        """v̄₀ defaults to the first reference value."""
        return cls(vbar, vbar.value(0).copy(), Q_v)
