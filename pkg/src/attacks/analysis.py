"""Closed-form attacked closed-loop models, used as oracles against simulation."""
import logging
from dataclasses import dataclass, field

import numpy as np
from scipy import linalg

from src.attacks.specs import (
    AdditiveAttack,
    Architecture,
    AttackSpec,
    CovertAttack,
    FeedbackStealthAttack,
    MultiplicativeAttack,
    UnitaryChoice,
)
from src.attacks.stealth import FeedbackStealthDesign, unitary_factor
from src.errors import ConfigError
from src.factory.bezout import BezoutFactors
from src.factory.youla import YoulaParam
from src.mcstation.control import McConfig
from src.mcstation.performance import attack_loop_gain, fault_robustness_system, filtered_residual_gain
from src.sscore.connect import (
    add,
    hstack,
    identity,
    invert_io,
    minimal_realization,
    negate,
    product,
    static_gain,
    subtract,
    vstack,
)
from src.sscore.norms import is_schur, spectral_radius
from src.sscore.statespace import StateSpaceModel, simulate

logger = logging.getLogger(__name__)


@dataclass(eq=False)
class AttackAnalysis:
    """Predicted maps into [u; y] under one attack variant.

    ``attack_to_io`` is driven by the stacked signals named in
    ``attack_inputs``; ``ry_to_io`` by the Kalman residual r_y.
    """

    architecture: Architecture
    kind: str
    attack_to_io: StateSpaceModel | None
    attack_inputs: list[str]
    ry_to_io: StateSpaceModel
    v_to_io: StateSpaceModel | None = None
    eta_a: StateSpaceModel | None = None
    theta_a: StateSpaceModel | None = None
    Phi: StateSpaceModel | None = None
    Psi: StateSpaceModel | None = None
    stable: bool = True
    notes: list[str] = field(default_factory=list)

    def predict(self, attack_signals) -> np.ndarray:
        """Response of ``attack_to_io`` to a (steps, inputs) array from rest."""
        if self.attack_to_io is None:
            raise ConfigError(f"{self.kind} analysis has no attack-to-output model")
        return simulate(self.attack_to_io, attack_signals)


def _checked(model: StateSpaceModel, name: str, notes: list[str]) -> tuple[StateSpaceModel, bool]:
    reduced = minimal_realization(model)
    if reduced.n and not is_schur(reduced.A):
        rho = spectral_radius(reduced.A)
        logger.warning(f"Predicted {name} loop is unstable (spectral radius {rho:.6f})")
        notes.append(f"{name} unstable, spectral radius {rho:.6f}")
        return reduced, False
    return reduced, True


def _block(model: StateSpaceModel, rows: slice, cols: slice) -> StateSpaceModel:
    return StateSpaceModel(model.A, model.B[:, cols], model.C[rows], model.D[rows, cols], model.Ts)


def _image(factors: BezoutFactors) -> StateSpaceModel:
    return vstack(factors.M, factors.N)


def _youla_blocks(factors: BezoutFactors, param: YoulaParam) -> tuple[StateSpaceModel, StateSpaceModel, StateSpaceModel]:
    """(X + QN̂, Y − QM̂, [−Ŷ + MQ; X̂ + NQ])."""
    Q = param.Q
    left_u = add(factors.X, product(Q, factors.Nh))
    left_y = subtract(factors.Y, product(Q, factors.Mh))
    right = vstack(add(negate(factors.Yh), product(factors.M, Q)), add(factors.Xh, product(factors.N, Q)))
    return left_u, left_y, right


def _predict_modified(factors: BezoutFactors, cfg: McConfig, spec: AttackSpec | None) -> AttackAnalysis:
    m, p = factors.plant.inputs, factors.plant.outputs
    Ts = factors.plant.Ts
    image = _image(factors)
    notes: list[str] = []
    nominal_ry = fault_robustness_system(factors, cfg.Q_uMC, filtered_residual_gain(cfg.Q_r1, cfg.Q_r2, cfg.Q_uMC))
    eta = hstack(cfg.Q_r2, identity(p, Ts))
    theta = hstack(identity(m, Ts), cfg.Q_uMC)

    if spec is None or isinstance(spec, (AdditiveAttack, CovertAttack)):
        # Δ = [M; N](I − Q_uMC Q_r2)⁻¹(a_uMC + Q_uMC a_ryu)
        model = product(image, attack_loop_gain(cfg.Q_uMC, cfg.Q_r2), theta)
        model, stable = _checked(model, "attack-to-output", notes)
        kind = "none" if spec is None else spec.kind
        return AttackAnalysis("modified", kind, model, ["a_uMC", "a_ryu"], nominal_ry,
                              eta_a=eta, theta_a=theta, stable=stable, notes=notes)

    if isinstance(spec, MultiplicativeAttack):
        Gu = add(identity(m, Ts), _block(spec.Pi, slice(0, m), slice(0, m)))
        Gr = add(identity(p, Ts), _block(spec.Pi, slice(m, m + p), slice(m, m + p)))
        loop = subtract(identity(m, Ts), product(Gu, cfg.Q_uMC, Gr, cfg.Q_r2))
        T = invert_io(minimal_realization(loop))
        attack = product(image, T, hstack(identity(m, Ts), product(Gu, cfg.Q_uMC)))
        ry = add(vstack(negate(factors.Yh), factors.Xh), product(image, T, Gu, cfg.Q_uMC, Gr, cfg.Q_r1))
        v = product(image, T, Gu, subtract(identity(m, Ts), product(cfg.Q_uMC, cfg.Q_r2)))
        attack, ok_a = _checked(attack, "attack-to-output", notes)
        ry, ok_r = _checked(ry, "residual-to-output", notes)
        v, ok_v = _checked(v, "reference-to-output", notes)
        return AttackAnalysis("modified", spec.kind, attack, ["eps_u", "eps_y"], ry, v_to_io=v,
                              eta_a=eta, theta_a=theta, stable=ok_a and ok_r and ok_v, notes=notes)

    if isinstance(spec, FeedbackStealthAttack):
        if spec.zeta_hat is None:
            raise ConfigError("loop prediction under a feedback-stealth attack needs explicit statistics")
        rng = np.random.default_rng(spec.unitary_seed)
        design = FeedbackStealthDesign(spec.zeta_hat, spec.Sigma_hat, unitary_factor(UnitaryChoice(spec.unitary), p, rng),
                                       spec.A_pi, spec.C_pi, spec.Q_pi)
        Pi_a = design.Pi_a
        ry = fault_robustness_system(factors, cfg.Q_uMC, filtered_residual_gain(cfg.Q_r1, cfg.Q_r2, cfg.Q_uMC, Pi_a), Pi_a)
        ry, stable = _checked(ry, "residual-to-output", notes)
        return AttackAnalysis("modified", spec.kind, None, [], ry, eta_a=eta, theta_a=theta,
                              stable=stable, notes=notes)

    raise ConfigError(f"unknown attack spec {type(spec).__name__}")


def _predict_traditional(factors: BezoutFactors, param: YoulaParam, spec: AttackSpec | None) -> AttackAnalysis:
    m, p = factors.plant.inputs, factors.plant.outputs
    Ts = factors.plant.Ts
    image = _image(factors)
    left_u, left_y, right = _youla_blocks(factors, param)
    notes: list[str] = []

    if spec is None or isinstance(spec, AdditiveAttack):
        # Δ = [M; N]((X + QN̂)a_u − (Y − QM̂)a_y)
        model, stable = _checked(product(image, hstack(left_u, negate(left_y))), "attack-to-output", notes)
        kind = "none" if spec is None else spec.kind
        return AttackAnalysis("traditional", kind, model, ["a_uMC", "a_y"], minimal_realization(right),
                              stable=stable, notes=notes)

    if isinstance(spec, MultiplicativeAttack):
        P = hstack(left_u, negate(left_y))
        select_u = static_gain(linalg.block_diag(np.eye(m), np.zeros((p, p))), Ts)
        Pi_bar = add(identity(m + p, Ts), product(select_u, spec.Pi))
        Phi = minimal_realization(negate(product(P, spec.Pi, invert_io(Pi_bar))))
        Psi = minimal_realization(add(P, product(Phi, select_u)))
        inner = invert_io(minimal_realization(add(identity(m, Ts), product(Phi, image))))
        v_model = product(image, inner)
        attack = product(image, inner, Psi)
        ry = product(subtract(identity(m + p, Ts), product(image, inner, Phi)), right)
        v_model, ok_v = _checked(v_model, "reference-to-output", notes)
        attack, ok_a = _checked(attack, "attack-to-output", notes)
        ry, ok_r = _checked(ry, "residual-to-output", notes)
        return AttackAnalysis("traditional", spec.kind, attack, ["eps_u", "eps_y"], ry, v_to_io=v_model,
                              Phi=Phi, Psi=Psi, stable=ok_v and ok_a and ok_r, notes=notes)

    raise ConfigError(f"{spec.kind} attacks have no prediction in the traditional configuration")


def predict_attacked_closed_loop(
    factors: BezoutFactors,
    cfg: McConfig | None,
    spec: AttackSpec | None,
    architecture: Architecture = "modified",
    param: YoulaParam | None = None,
) -> AttackAnalysis:
    """Attack-to-[u; y] and r_y-to-[u; y] models of the attacked loop.

    Unstable predictions are returned with ``stable=False`` and a warning;
    multiplicative attacks may destabilize the loop.
    """
    if spec is not None:
        spec.check(architecture, factors.plant.inputs, factors.plant.outputs)
    if architecture == "modified":
        if cfg is None:
            raise ConfigError("modified-configuration prediction needs the MC configuration")
        return _predict_modified(factors, cfg, spec)
    param = param if param is not None else YoulaParam.zero(factors.plant.inputs, factors.plant.outputs, factors.plant.Ts)
    return _predict_traditional(factors, param, spec)


def eta_a_signal(Q_r2: StateSpaceModel, a_uMC, a_ryu) -> np.ndarray:
    """η_a = Q_r2 a_uMC + a_ryu from recorded channel perturbations."""
    return simulate(Q_r2, a_uMC) + np.asarray(a_ryu, dtype=float)
