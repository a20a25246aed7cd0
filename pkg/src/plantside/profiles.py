"""Per-step signal profiles for faults and attack payloads."""
from dataclasses import dataclass, field

import numpy as np

from src.errors import ConfigError, DimensionError


@dataclass(frozen=True)
class Constant:
    value: float

    def sample(self, k: int, rng: np.random.Generator) -> float:
        return self.value


@dataclass(frozen=True)
class Sine:
    """amplitude·sin(omega·k + phase), omega in rad/step."""

    amplitude: float
    omega: float
    phase: float = 0.0

    def sample(self, k: int, rng: np.random.Generator) -> float:
        return self.amplitude * np.sin(self.omega * k + self.phase)


@dataclass(frozen=True)
class Gaussian:
    mean: float
    variance: float

    def __post_init__(self):
        if self.variance < 0:
            raise ConfigError(f"Gaussian profile variance must be non-negative, got {self.variance}")

    def sample(self, k: int, rng: np.random.Generator) -> float:
        return self.mean + np.sqrt(self.variance) * rng.standard_normal()


Component = Constant | Sine | Gaussian


@dataclass(frozen=True)
class Window:
    """Closed-open activation window [start, end) in steps; end=None is open-ended."""

    start: int = 0
    end: int | None = None

    def __post_init__(self):
        if self.start < 0:
            raise ConfigError(f"window start must be non-negative, got {self.start}")
        if self.end is not None and self.end < self.start:
            raise ConfigError(f"window end {self.end} precedes start {self.start}")

    def contains(self, k: int) -> bool:
        return k >= self.start and (self.end is None or k < self.end)

    def check_within(self, steps: int, name: str = "window") -> None:
        if self.start > steps or (self.end is not None and self.end > steps):
            raise ConfigError(f"{name} [{self.start}, {self.end}) exceeds the run length of {steps} steps")


@dataclass(frozen=True)
class VectorProfile:
    """Sum of components per channel; channels not listed stay at zero.

    Gaussian components draw from ``rng`` in channel order, once per call.
    """

    dim: int
    channels: dict[int, tuple[Component, ...]] = field(default_factory=dict)

    def __post_init__(self):
        for ch in self.channels:
            if not 0 <= ch < self.dim:
                raise DimensionError(f"profile channel {ch} outside dimension {self.dim}")

    @classmethod
    def zero(cls, dim: int) -> "VectorProfile":
        return cls(dim)

    @property
    def is_zero(self) -> bool:
        return not self.channels

    @property
    def is_random(self) -> bool:
        return any(isinstance(c, Gaussian) for comps in self.channels.values() for c in comps)

    def sample(self, k: int, rng: np.random.Generator) -> np.ndarray:
        out = np.zeros(self.dim)
        for ch in sorted(self.channels):
            out[ch] = sum(c.sample(k, rng) for c in self.channels[ch])
        return out
