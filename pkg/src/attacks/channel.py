"""Communication channel between the plant side and the MC-station."""
import logging
from dataclasses import dataclass, field

import numpy as np

from src.attacks.specs import (
    AdditiveAttack,
    Architecture,
    AttackSpec,
    CovertAttack,
    Direction,
    FeedbackStealthAttack,
    MultiplicativeAttack,
    UnitaryChoice,
)
from src.attacks.stealth import FeedbackStealthDesign, estimate_steady_stats, unitary_factor
from src.errors import ConfigError
from src.plantside.profiles import VectorProfile
from src.sscore.statespace import LtiFilter

logger = logging.getLogger(__name__)


def _draw(prof: VectorProfile, k: int, rng: np.random.Generator | None) -> np.ndarray:
    if rng is None and prof.is_random:
        raise ConfigError("Gaussian attack profiles need a random generator")
    return prof.sample(k, rng)


def channel_apply(
    spec: AttackSpec,
    direction: Direction,
    payload,
    k: int,
    rng: np.random.Generator | None = None,
    architecture: Architecture = "modified",
) -> np.ndarray:
    """Memoryless channel: additive terms, or a static Π^a block on its own payload.

    Covert and feedback-stealth attacks carry filter state; run them
    through ``AttackChannel``.
    """
    x = np.asarray(payload, dtype=float)
    if not spec.window.contains(k):
        return x.copy()
    direction = Direction(direction)
    if isinstance(spec, AdditiveAttack):
        prof = spec.a_uMC if direction == Direction.TO_PLANT else spec.to_mc_profile(architecture)
        return x if prof is None else x + _draw(prof, k, rng)
    if isinstance(spec, MultiplicativeAttack):
        if not spec.Pi.is_static:
            raise ConfigError("a dynamic Pi^a needs the stateful AttackChannel")
        m = spec.eps_u.dim
        if direction == Direction.TO_PLANT:
            return x + spec.Pi.D[:m, :m] @ x + _draw(spec.eps_u, k, rng)
        return x + spec.Pi.D[m:, m:] @ x + _draw(spec.eps_y, k, rng)
    raise ConfigError(f"{spec.kind} attacks are stateful; use AttackChannel")


@dataclass(eq=False)
class _Stage:
    spec: AttackSpec

    def begin_step(self, k: int, rng: np.random.Generator) -> None:
        pass

    def to_plant(self, plant, mc, k: int, lin: bool) -> np.ndarray:
        return plant

    def to_mc(self, plant, mc, k: int, lin: bool) -> np.ndarray:
        return mc

    def commit(self, plant, mc, k: int) -> None:
        pass


@dataclass(eq=False)
class _AdditiveStage(_Stage):
    architecture: Architecture = "modified"
    a_plant: np.ndarray = None
    a_mc: np.ndarray = None

    def begin_step(self, k, rng):
        spec = self.spec
        active = spec.window.contains(k)
        self.a_plant = spec.a_uMC.sample(k, rng) if active else np.zeros(spec.a_uMC.dim)
        prof = spec.to_mc_profile(self.architecture)
        self.a_mc = None if prof is None else (prof.sample(k, rng) if active else np.zeros(prof.dim))

    def to_plant(self, plant, mc, k, lin):
        return plant if lin else plant + self.a_plant

    def to_mc(self, plant, mc, k, lin):
        return mc if lin or self.a_mc is None else mc + self.a_mc


@dataclass(eq=False)
class _MultiplicativeStage(_Stage):
    pi: LtiFilter = None
    eps_u: np.ndarray = None
    eps_y: np.ndarray = None
    active: bool = False

    def __post_init__(self):
        self.pi = LtiFilter(self.spec.Pi)

    def begin_step(self, k, rng):
        self.active = self.spec.window.contains(k)
        if self.active:
            self.eps_u = self.spec.eps_u.sample(k, rng)
            self.eps_y = self.spec.eps_y.sample(k, rng)

    def _out(self, plant, mc, lin):
        return self.pi.output(np.concatenate([plant, mc]), lin)

    def to_plant(self, plant, mc, k, lin):
        if not self.active:
            return plant
        m = plant.size
        return plant + self._out(plant, mc, lin)[:m] + (0.0 if lin else self.eps_u)

    def to_mc(self, plant, mc, k, lin):
        if not self.active:
            return mc
        m = plant.size
        return mc + self._out(plant, mc, lin)[m:] + (0.0 if lin else self.eps_y)

    def commit(self, plant, mc, k):
        if self.active:
            self.pi.advance(np.concatenate([plant, mc]))


@dataclass(eq=False)
class _CovertStage(_Stage):
    q_r2: LtiFilter = None
    a_plant: np.ndarray = None

    def __post_init__(self):
        self.q_r2 = LtiFilter(self.spec.Q_r2)

    def begin_step(self, k, rng):
        spec = self.spec
        self.a_plant = spec.a_uMC.sample(k, rng) if spec.window.contains(k) else np.zeros(spec.a_uMC.dim)

    def to_plant(self, plant, mc, k, lin):
        return plant if lin else plant + self.a_plant

    def to_mc(self, plant, mc, k, lin):
        return mc if lin else mc - self.q_r2.output(self.a_plant)

    def commit(self, plant, mc, k):
        self.q_r2.advance(self.a_plant)


@dataclass(eq=False)
class _FeedbackStealthStage(_Stage):
    rng_seed: int | None = None
    design: FeedbackStealthDesign | None = None
    learned: list[np.ndarray] = field(default_factory=list)

    def _activate(self, k: int, rng: np.random.Generator) -> None:
        spec = self.spec
        if spec.zeta_hat is not None:
            zeta, Sigma = np.asarray(spec.zeta_hat, dtype=float), np.asarray(spec.Sigma_hat, dtype=float)
        else:
            zeta, Sigma = estimate_steady_stats(np.vstack(self.learned) if self.learned else np.zeros((0, 1)))
            logger.info(f"Step {k}: stealth attacker learned statistics from {len(self.learned)} frames")
        unitary_rng = np.random.default_rng(spec.unitary_seed) if spec.unitary_seed is not None else rng
        U = unitary_factor(UnitaryChoice(spec.unitary), zeta.size, unitary_rng)
        self.design = FeedbackStealthDesign(zeta, Sigma, U, spec.A_pi, spec.C_pi, spec.Q_pi)

    def begin_step(self, k, rng):
        if self.spec.window.contains(k) and self.design is None:
            self._activate(k, rng)

    def to_mc(self, plant, mc, k, lin):
        if self.design is None or not self.spec.window.contains(k):
            return mc
        return self.design.output(mc, lin)

    def commit(self, plant, mc, k):
        spec = self.spec
        if spec.zeta_hat is None and self.design is None and spec.learning_window().contains(k):
            self.learned.append(np.asarray(mc, dtype=float).copy())
        if self.design is not None and spec.window.contains(k):
            self.design.advance(mc)


def _stage(spec: AttackSpec, architecture: Architecture) -> _Stage:
    if isinstance(spec, AdditiveAttack):
        return _AdditiveStage(spec, architecture)
    if isinstance(spec, MultiplicativeAttack):
        return _MultiplicativeStage(spec)
    if isinstance(spec, CovertAttack):
        return _CovertStage(spec)
    if isinstance(spec, FeedbackStealthAttack):
        return _FeedbackStealthStage(spec)
    raise ConfigError(f"unknown attack spec {type(spec).__name__}")


@dataclass(frozen=True, eq=False)
class ChannelRecord:
    """Effective per-step perturbation of both channel directions."""

    k: int
    to_plant: np.ndarray
    to_mc: np.ndarray


class AttackChannel:
    """Stateful channel applying every attack stage in order.

    Stages see the payloads as left by the previous stage. Random profile
    samples are drawn once per step in ``begin_step`` so that loop previews
    are consistent.
    """

    def __init__(self, specs: list[AttackSpec], architecture: Architecture, rng: np.random.Generator):
        self.architecture = architecture
        self.rng = rng
        self.stages = [_stage(s, architecture) for s in specs]

    @property
    def is_clean(self) -> bool:
        return not self.stages

    def begin_step(self, k: int) -> None:
        for stage in self.stages:
            stage.begin_step(k, self.rng)

    def _pass(self, plant, mc, k: int, lin: bool):
        plant = np.asarray(plant, dtype=float)
        mc = np.asarray(mc, dtype=float)
        trail = []
        for stage in self.stages:
            trail.append((plant, mc))
            plant, mc = stage.to_plant(plant, mc, k, lin), stage.to_mc(plant, mc, k, lin)
        return plant, mc, trail

    def to_mc(self, plant, mc, k: int, linear_only: bool = False) -> np.ndarray:
        return self._pass(plant, mc, k, linear_only)[1]

    def to_plant(self, plant, mc, k: int, linear_only: bool = False) -> np.ndarray:
        return self._pass(plant, mc, k, linear_only)[0]

    def commit(self, plant, mc, k: int) -> ChannelRecord:
        """Advance stage states with the untampered payloads of step k."""
        out_plant, out_mc, trail = self._pass(plant, mc, k, False)
        for stage, (p_in, m_in) in zip(self.stages, trail):
            stage.commit(p_in, m_in, k)
        return ChannelRecord(k, out_plant - np.asarray(plant, dtype=float), out_mc - np.asarray(mc, dtype=float))
