"""Attack variants injected on the plant↔MC communication channels."""
import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Literal

import numpy as np

from src.errors import ConfigError, DimensionError
from src.plantside.profiles import VectorProfile, Window
from src.sscore.norms import impulse_response, require_stable
from src.sscore.statespace import StateSpaceModel, as_matrix

logger = logging.getLogger(__name__)

Architecture = Literal["modified", "traditional"]


class Direction(str, Enum):
    """Channel direction."""

    TO_PLANT = "toPlant"
    TO_MC = "toMC"


class UnitaryChoice(str, Enum):
    """Unitary factor U of the feedback-stealth scaling Ξ."""

    IDENTITY = "identity"
    NEGATIVE = "negative"
    RANDOM = "random"


@dataclass(frozen=True, eq=False)
class AdditiveAttack:
    """a_uMC on the input channel; a_ryu (modified) or a_y (traditional) towards the MC."""

    window: Window
    a_uMC: VectorProfile
    a_ryu: VectorProfile | None = None
    a_y: VectorProfile | None = None
    kind: str = "additive"

    def check(self, architecture: Architecture, m: int, p: int) -> None:
        if self.a_uMC.dim != m:
            raise DimensionError(f"a_uMC has dimension {self.a_uMC.dim}, plant has {m} inputs")
        for name, prof in (("a_ryu", self.a_ryu), ("a_y", self.a_y)):
            if prof is not None and prof.dim != p:
                raise DimensionError(f"{name} has dimension {prof.dim}, plant has {p} outputs")
        if architecture == "modified" and self.a_y is not None and not self.a_y.is_zero:
            raise ConfigError("a_y has no channel in the modified configuration; only r_yu is transmitted")
        if architecture == "traditional" and self.a_ryu is not None and not self.a_ryu.is_zero:
            raise ConfigError("a_ryu has no channel in the traditional configuration; only y is transmitted")

    def to_mc_profile(self, architecture: Architecture) -> VectorProfile | None:
        return self.a_ryu if architecture == "modified" else self.a_y


@dataclass(frozen=True, eq=False)
class MultiplicativeAttack:
    """[to_plant; to_mc] ← [to_plant; to_mc] + Π^a[u_MC; y] + [ε_u; ε_y].

    Π^a acts on the untampered payloads. In the modified configuration the
    toMC payload is r_yu and Π^a must be block diagonal.
    """

    window: Window
    Pi: StateSpaceModel
    eps_u: VectorProfile
    eps_y: VectorProfile
    kind: str = "multiplicative"

    def __post_init__(self):
        require_stable(self.Pi, "Pi^a")
        if self.Pi.inputs != self.Pi.outputs:
            raise DimensionError(f"Pi^a must be square, got {self.Pi.outputs}x{self.Pi.inputs}")
        if self.Pi.n > self.Pi.inputs:
            raise ConfigError(f"Pi^a is limited to first-order filters per channel, got order {self.Pi.n}")

    def check(self, architecture: Architecture, m: int, p: int) -> None:
        if self.Pi.inputs != m + p:
            raise DimensionError(f"Pi^a must be {m + p}x{m + p}, got {self.Pi.outputs}x{self.Pi.inputs}")
        if (self.eps_u.dim, self.eps_y.dim) != (m, p):
            raise DimensionError(f"eps_u/eps_y must have dimensions {m}/{p}, got {self.eps_u.dim}/{self.eps_y.dim}")
        top = np.eye(m + p)[:m] + self.Pi.D[:m]
        bar = np.eye(m + p)
        bar[:m] = top
        if np.linalg.matrix_rank(bar) < m + p:
            raise ConfigError("I + diag(I, 0)Π^a has a singular static part")
        if architecture == "modified":
            markov = impulse_response(self.Pi, 50)
            cross = max(np.abs(markov[:, :m, m:]).max(initial=0.0), np.abs(markov[:, m:, :m]).max(initial=0.0))
            if cross > 1e-12:
                raise ConfigError("Pi^a must be block diagonal in the modified configuration")


@dataclass(frozen=True, eq=False)
class CovertAttack:
    """a_uMC on the input channel masked by a_ryu = −Q_r2 a_uMC.

    The attacker needs Q_r2; the masking filter keeps running after the
    window so that its tail cancels the remaining response.
    """

    window: Window
    a_uMC: VectorProfile
    Q_r2: StateSpaceModel
    kind: str = "covert"

    def __post_init__(self):
        require_stable(self.Q_r2, "attacker copy of Q_r2")

    def check(self, architecture: Architecture, m: int, p: int) -> None:
        if architecture != "modified":
            raise ConfigError("covert attacks target the modified configuration")
        if self.a_uMC.dim != m or (self.Q_r2.outputs, self.Q_r2.inputs) != (p, m):
            raise DimensionError(f"covert attack needs a_uMC of dimension {m} and Q_r2 of shape {p}x{m}")


@dataclass(frozen=True, eq=False)
class FeedbackStealthAttack:
    """r^a = ΞΠ(r − ζ̂) + ζ̂ on the toMC channel.

    Without explicit ``zeta_hat``/``Sigma_hat`` the attacker learns them from
    the frames in ``learning`` (default: the ``learning_frames`` steps before
    activation). Π is a Kalman filter with (A_Π, C_Π, Q_Π); the defaults
    A_Π = 0, C_Π = I, Q_Π = 0 give Δr = r − ζ̂.
    """

    window: Window
    unitary: UnitaryChoice = UnitaryChoice.NEGATIVE
    zeta_hat: np.ndarray | None = None
    Sigma_hat: np.ndarray | None = None
    learning: Window | None = None
    learning_frames: int = 100
    A_pi: np.ndarray | None = None
    C_pi: np.ndarray | None = None
    Q_pi: np.ndarray | None = None
    unitary_seed: int | None = None
    kind: str = "feedback_stealth"

    def __post_init__(self):
        if (self.zeta_hat is None) != (self.Sigma_hat is None):
            raise ConfigError("zeta_hat and Sigma_hat must be supplied together")

    def learning_window(self) -> Window:
        if self.learning is not None:
            return self.learning
        return Window(max(0, self.window.start - self.learning_frames), self.window.start)

    def check(self, architecture: Architecture, m: int, p: int) -> None:
        if architecture != "modified":
            raise ConfigError("feedback-stealth attacks act on the r_yu channel of the modified configuration")
        if self.zeta_hat is not None:
            as_matrix(np.reshape(self.zeta_hat, (-1, 1)), rows=p, name="zeta_hat")
            as_matrix(self.Sigma_hat, rows=p, cols=p, name="Sigma_hat")
        learn = self.learning_window()
        if self.zeta_hat is None and learn.end is not None and learn.end > self.window.start:
            raise ConfigError("learning window must end before the attack starts")


AttackSpec = AdditiveAttack | MultiplicativeAttack | CovertAttack | FeedbackStealthAttack


@dataclass(frozen=True)
class AttackSchedule:
    """Attack specs with their architecture, validated together."""

    architecture: Architecture
    specs: tuple = field(default_factory=tuple)

    def check(self, m: int, p: int, steps: int | None = None) -> None:
        for spec in self.specs:
            spec.check(self.architecture, m, p)
            if steps is not None:
                spec.window.check_within(steps, f"{spec.kind} attack window")
