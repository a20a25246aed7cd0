"""Process and sensor faults entering through E_f and F_f."""
from dataclasses import dataclass

import numpy as np

from src.errors import DimensionError
from src.plantside.profiles import VectorProfile, Window
from src.sscore.statespace import StateSpaceModel, as_matrix


@dataclass(frozen=True, eq=False)
class FaultSpec:
    E_f: np.ndarray
    F_f: np.ndarray
    profile: VectorProfile
    window: Window = Window()

    def __post_init__(self):
        E = as_matrix(self.E_f, name="E_f")
        F = as_matrix(self.F_f, cols=E.shape[1], name="F_f")
        if self.profile.dim != E.shape[1]:
            raise DimensionError(f"fault profile has dimension {self.profile.dim}, E_f has {E.shape[1]} columns")
        object.__setattr__(self, "E_f", E)
        object.__setattr__(self, "F_f", F)

    @classmethod
    def none(cls, model: StateSpaceModel) -> "FaultSpec":
        return cls(np.zeros((model.n, 1)), np.zeros((model.outputs, 1)), VectorProfile.zero(1), Window(0, 0))

    @classmethod
    def sensor_bias(cls, model: StateSpaceModel, sensor: int, profile: VectorProfile, window: Window) -> "FaultSpec":
        """Additive fault on one measurement channel."""
        F = np.zeros((model.outputs, 1))
        F[sensor, 0] = 1.0
        return cls(np.zeros((model.n, 1)), F, profile, window)

    @property
    def dim(self) -> int:
        return self.E_f.shape[1]

    def check_dims(self, model: StateSpaceModel) -> None:
        if self.E_f.shape[0] != model.n or self.F_f.shape[0] != model.outputs:
            raise DimensionError(
                f"fault matrices {self.E_f.shape}/{self.F_f.shape} do not fit n={model.n}, p={model.outputs}"
            )

    def sample(self, k: int, rng: np.random.Generator) -> np.ndarray:
        """f(k); zero outside the activation window."""
        if not self.window.contains(k) or self.profile.is_zero:
            return np.zeros(self.dim)
        return self.profile.sample(k, rng)
