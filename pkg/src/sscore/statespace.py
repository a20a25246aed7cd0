"""Discrete-time LTI models, signals and stateful filters."""
import logging
from dataclasses import dataclass, field

import numpy as np

from src.errors import ConfigError, DimensionError

logger = logging.getLogger(__name__)

SYMMETRY_TOL = 1e-12


def as_matrix(value, rows: int | None = None, cols: int | None = None, name: str = "matrix") -> np.ndarray:
    """Coerce a nested list or array into a 2-D float matrix."""
    mat = np.array(value, dtype=float)
    if mat.ndim == 0:
        mat = mat.reshape(1, 1)
    elif mat.ndim == 1:
        mat = mat.reshape(-1, 1) if cols == 1 else mat.reshape(1, -1)
    if mat.size == 0:
        mat = np.zeros((rows or 0, cols or 0))
    if mat.ndim != 2:
        raise DimensionError(f"{name} must be two-dimensional, got shape {mat.shape}")
    if rows is not None and mat.shape[0] != rows:
        raise DimensionError(f"{name} has {mat.shape[0]} rows, expected {rows}")
    if cols is not None and mat.shape[1] != cols:
        raise DimensionError(f"{name} has {mat.shape[1]} columns, expected {cols}")
    return mat


def as_vector(value, dim: int, name: str = "vector") -> np.ndarray:
    """Coerce a value into a 1-D float vector of the given dimension."""
    vec = np.asarray(value, dtype=float).reshape(-1)
    if vec.shape[0] != dim:
        raise DimensionError(f"{name} has dimension {vec.shape[0]}, expected {dim}")
    return vec


@dataclass(frozen=True, eq=False)
class StateSpaceModel:
    """Discrete LTI quadruple (A, B, C, D) with sample period Ts."""

    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    D: np.ndarray
    Ts: float = 0.1

    def __post_init__(self):
        D = np.array(self.D, dtype=float, ndmin=2)
        p, m = D.shape
        A = np.asarray(self.A, dtype=float)
        n = A.shape[0] if A.size else 0
        if n:
            A = as_matrix(A, rows=n, cols=n, name="A")
            B = as_matrix(self.B, rows=n, cols=m, name="B")
            C = as_matrix(self.C, rows=p, cols=n, name="C")
        else:
            A, B, C = np.zeros((0, 0)), np.zeros((0, m)), np.zeros((p, 0))
        if self.Ts <= 0:
            raise ConfigError(f"sample period must be positive, got {self.Ts}")
        for name, mat in (("A", A), ("B", B), ("C", C), ("D", D)):
            if not np.all(np.isfinite(mat)):
                raise DimensionError(f"{name} contains non-finite entries")
            mat.setflags(write=False)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "B", B)
        object.__setattr__(self, "C", C)
        object.__setattr__(self, "D", D)

    @classmethod
    def build(cls, A, B, C, D, Ts: float = 0.1) -> "StateSpaceModel":
        """Build a model from nested lists, checking mutual consistency."""
        A = as_matrix(A, name="A")
        n = A.shape[0]
        if A.shape != (n, n):
            raise DimensionError(f"A must be square, got shape {A.shape}")
        D = as_matrix(D, name="D")
        p, m = D.shape
        B = as_matrix(B, rows=n, cols=m, name="B") if n else np.zeros((0, m))
        C = as_matrix(C, rows=p, cols=n, name="C") if n else np.zeros((p, 0))
        return cls(A, B, C, D, Ts)

    @classmethod
    def static(cls, gain, Ts: float = 0.1) -> "StateSpaceModel":
        """Memoryless system y = K u."""
        D = as_matrix(gain, name="gain")
        return cls(np.zeros((0, 0)), np.zeros((0, D.shape[1])), np.zeros((D.shape[0], 0)), D, Ts)

    @classmethod
    def identity(cls, dim: int, Ts: float = 0.1) -> "StateSpaceModel":
        return cls.static(np.eye(dim), Ts)

    @classmethod
    def zero(cls, outputs: int, inputs: int, Ts: float = 0.1) -> "StateSpaceModel":
        return cls.static(np.zeros((outputs, inputs)), Ts)

    @property
    def n(self) -> int:
        """State dimension."""
        return self.A.shape[0]

    @property
    def inputs(self) -> int:
        return self.D.shape[1]

    @property
    def outputs(self) -> int:
        return self.D.shape[0]

    @property
    def is_static(self) -> bool:
        return self.n == 0

    def dc_gain(self) -> np.ndarray:
        """Static gain C (I - A)^-1 B + D."""
        if self.is_static:
            return self.D.copy()
        return self.C @ np.linalg.solve(np.eye(self.n) - self.A, self.B) + self.D

    def to_dict(self) -> dict:
        """Serializable state-space blocks."""
        return {
            "A": self.A.tolist(),
            "B": self.B.tolist(),
            "C": self.C.tolist(),
            "D": self.D.tolist(),
            "Ts": self.Ts,
        }

    def __repr__(self) -> str:
        return f"StateSpaceModel(n={self.n}, inputs={self.inputs}, outputs={self.outputs}, Ts={self.Ts})"


def _check_covariance(mat: np.ndarray, name: str, strict: bool) -> None:
    if mat.shape[0] != mat.shape[1]:
        raise DimensionError(f"{name} must be square, got shape {mat.shape}")
    scale = max(1.0, float(np.max(np.abs(mat)))) if mat.size else 1.0
    if not np.allclose(mat, mat.T, atol=SYMMETRY_TOL * scale, rtol=0.0):
        raise ConfigError(f"{name} is not symmetric")
    if mat.size == 0:
        return
    eigs = np.linalg.eigvalsh(mat)
    if strict and eigs.min() <= 0:
        raise ConfigError(f"{name} must be positive definite (min eigenvalue {eigs.min():.3e})")
    if eigs.min() < -SYMMETRY_TOL * scale:
        raise ConfigError(f"{name} must be positive semidefinite (min eigenvalue {eigs.min():.3e})")


@dataclass(frozen=True, eq=False)
class NoiseSpec:
    """Process and measurement noise covariances."""

    Sigma_w: np.ndarray
    Sigma_nu: np.ndarray

    def __post_init__(self):
        Sw = np.atleast_2d(np.asarray(self.Sigma_w, dtype=float))
        Sn = np.atleast_2d(np.asarray(self.Sigma_nu, dtype=float))
        _check_covariance(Sw, "Sigma_w", strict=False)
        _check_covariance(Sn, "Sigma_nu", strict=True)
        object.__setattr__(self, "Sigma_w", Sw)
        object.__setattr__(self, "Sigma_nu", Sn)

    @classmethod
    def isotropic(cls, n: int, p: int, variance: float) -> "NoiseSpec":
        return cls(variance * np.eye(n), variance * np.eye(p))

    @classmethod
    def silent(cls, n: int, p: int) -> "NoiseSpec":
        """Zero process noise with a negligible measurement floor, for deterministic runs."""
        return cls(np.zeros((n, n)), 1e-30 * np.eye(p))

    @property
    def is_silent(self) -> bool:
        return not np.any(self.Sigma_w) and float(np.max(self.Sigma_nu)) <= 1e-30

    def check_dims(self, model: StateSpaceModel) -> None:
        if self.Sigma_w.shape != (model.n, model.n):
            raise DimensionError(f"Sigma_w shape {self.Sigma_w.shape} does not match state dimension {model.n}")
        if self.Sigma_nu.shape != (model.outputs, model.outputs):
            raise DimensionError(
                f"Sigma_nu shape {self.Sigma_nu.shape} does not match output dimension {model.outputs}"
            )


@dataclass(frozen=True, eq=False)
class Signal:
    """Uniformly sampled vector signal; row k holds the sample at step k."""

    values: np.ndarray
    Ts: float = 0.1
    start: int = 0

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if vals.ndim == 1:
            vals = vals.reshape(-1, 1)
        if vals.ndim != 2:
            raise DimensionError(f"signal values must be a (steps, dim) array, got shape {vals.shape}")
        if self.Ts <= 0:
            raise ConfigError(f"sample period must be positive, got {self.Ts}")
        object.__setattr__(self, "values", vals)

    def __len__(self) -> int:
        return self.values.shape[0]

    @property
    def dim(self) -> int:
        return self.values.shape[1]

    @property
    def steps(self) -> np.ndarray:
        return np.arange(self.start, self.start + len(self))

    @property
    def times(self) -> np.ndarray:
        return self.steps * self.Ts

    def aligned_with(self, other: "Signal") -> bool:
        return len(self) == len(other) and self.start == other.start and np.isclose(self.Ts, other.Ts)


def step_lti(model: StateSpaceModel, state, input) -> tuple[np.ndarray, np.ndarray]:
    """Advance one step: returns (A x + B u, C x + D u)."""
    x = as_vector(state, model.n, "state")
    u = as_vector(input, model.inputs, "input")
    return model.A @ x + model.B @ u, model.C @ x + model.D @ u


def simulate(model: StateSpaceModel, inputs, x0=None) -> np.ndarray:
    """Run the model over a (steps, inputs) array from x0 (zero by default)."""
    u = np.asarray(inputs, dtype=float)
    if u.ndim == 1:
        u = u.reshape(-1, model.inputs)
    if u.shape[1] != model.inputs:
        raise DimensionError(f"input array has {u.shape[1]} columns, model expects {model.inputs}")
    x = np.zeros(model.n) if x0 is None else as_vector(x0, model.n, "x0")
    out = np.empty((u.shape[0], model.outputs))
    A, B, C, D = model.A, model.B, model.C, model.D
    for k in range(u.shape[0]):
        out[k] = C @ x + D @ u[k]
        x = A @ x + B @ u[k]
    return out


def simulate_signal(model: StateSpaceModel, signal: Signal) -> Signal:
    """Filter a Signal through the model from zero state."""
    return Signal(simulate(model, signal.values), signal.Ts, signal.start)


@dataclass(eq=False)
class LtiFilter:
    """Stateful stepper around a StateSpaceModel.

    ``output`` previews the response without touching the state, ``advance``
    commits one step. With ``linear_only`` the preview returns the pure
    feedthrough D u, which is what the loop solver needs for its Jacobian.
    """

    model: StateSpaceModel
    state: np.ndarray = field(default=None)

    def __post_init__(self):
        self.state = np.zeros(self.model.n) if self.state is None else as_vector(self.state, self.model.n)

    def output(self, u, linear_only: bool = False) -> np.ndarray:
        u = np.asarray(u, dtype=float).reshape(-1)
        if linear_only:
            return self.model.D @ u
        return self.model.C @ self.state + self.model.D @ u

    def advance(self, u) -> np.ndarray:
        u = np.asarray(u, dtype=float).reshape(-1)
        y = self.model.C @ self.state + self.model.D @ u
        self.state = self.model.A @ self.state + self.model.B @ u
        return y

    def reset(self) -> None:
        self.state = np.zeros(self.model.n)

    def swap_model(self, model: StateSpaceModel, name: str = "filter") -> None:
        """Replace the realization, keeping the state when dimensions allow."""
        if model.n != self.model.n:
            logger.warning(f"{name}: state dimension changed {self.model.n} -> {model.n}, resetting state")
            self.model = model
            self.state = np.zeros(model.n)
            return
        self.model = model
