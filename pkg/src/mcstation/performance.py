"""Resilient and fault-tolerant performance indices and MC-side reconfiguration."""
import logging
from dataclasses import replace

import numpy as np

from src.factory.bezout import BezoutFactors
from src.mcstation.control import McConfig
from src.mcstation.postfilter import attack_postfilter, design_attack_postfilter
from src.schemas.verdict import PerformanceReportModel
from src.sscore.connect import (
    add,
    identity,
    invert_io,
    minimal_realization,
    negate,
    product,
    static_gain,
    subtract,
    vstack,
)
from src.sscore.norms import h2_norm, hinf_norm, require_stable
from src.sscore.statespace import StateSpaceModel, as_matrix

logger = logging.getLogger(__name__)


def attack_loop_gain(Q_uMC: StateSpaceModel, Q_r2: StateSpaceModel) -> StateSpaceModel:
    """(I − Q_uMC Q_r2)⁻¹, the map from ϑ_a-type injections to the MC input."""
    m = Q_uMC.outputs
    loop = subtract(identity(m, Q_uMC.Ts), product(Q_uMC, Q_r2))
    return minimal_realization(invert_io(minimal_realization(loop)))


def filtered_residual_gain(Q_r1: StateSpaceModel, Q_r2: StateSpaceModel, Q_uMC: StateSpaceModel,
                           Pi_a=None) -> StateSpaceModel:
    """Q̄_r1 = (I − Q_r2 Q_uMC Π_a)⁻¹ Q_r1 with Π_a = I by default."""
    p = Q_r1.outputs
    inner = product(Q_uMC, static_gain(Pi_a, Q_r1.Ts)) if Pi_a is not None else Q_uMC
    loop = subtract(identity(p, Q_r1.Ts), product(Q_r2, inner))
    return minimal_realization(product(invert_io(minimal_realization(loop)), Q_r1))


def fault_robustness_system(factors: BezoutFactors, Q_uMC: StateSpaceModel, Qbar_r1: StateSpaceModel,
                            Pi_a=None) -> StateSpaceModel:
    """[−Ŷ; X̂] + [M; N] Q_uMC Π_a Q̄_r1: the map from r_y to [u; y]."""
    base = vstack(negate(factors.Yh), factors.Xh)
    image = vstack(factors.M, factors.N)
    inner = product(Q_uMC, static_gain(Pi_a, Q_uMC.Ts)) if Pi_a is not None else Q_uMC
    return minimal_realization(add(base, product(image, inner, Qbar_r1)))


def resilient_performance_check(
    factors: BezoutFactors,
    cfg: McConfig,
    Q_r1: StateSpaceModel | None = None,
    target_theta_a: float | None = None,
    target_ry: float | None = None,
) -> PerformanceReportModel:
    """H∞ indices γ_θa and γ_ry of the current MC parameters."""
    Q_r1 = cfg.Q_r1 if Q_r1 is None else Q_r1
    for name, sys in (("Q_r1", Q_r1), ("Q_r2", cfg.Q_r2), ("Q_uMC", cfg.Q_uMC)):
        require_stable(sys, name)
    gamma_theta_a = hinf_norm(attack_loop_gain(cfg.Q_uMC, cfg.Q_r2))
    Qbar = filtered_residual_gain(Q_r1, cfg.Q_r2, cfg.Q_uMC)
    gamma_ry = hinf_norm(fault_robustness_system(factors, cfg.Q_uMC, Qbar))
    logger.info(f"Performance indices: gamma_theta_a={gamma_theta_a:.6g}, gamma_ry={gamma_ry:.6g}")
    return PerformanceReportModel(
        gamma_theta_a=gamma_theta_a,
        gamma_ry=gamma_ry,
        target_theta_a=target_theta_a,
        target_ry=target_ry,
        pass_theta_a=None if target_theta_a is None else gamma_theta_a <= target_theta_a,
        pass_ry=None if target_ry is None else gamma_ry <= target_ry,
    )


def psi_design_margin(
    factors: BezoutFactors,
    Psi: StateSpaceModel,
    Q_uMC: StateSpaceModel,
    Q_r1: StateSpaceModel,
    Q_r2: StateSpaceModel,
    Pi_a=None,
) -> dict[str, float]:
    """H2 gain of the r_y path through Ψ under Π_a against the nominal ‖Q̄_r1‖₂.

    A ratio above one means the performance-degradation residual amplifies
    the Π_a-distorted loop more than the nominal residual channel.
    """
    p = Q_r1.outputs
    Pi = -np.eye(p) if Pi_a is None else as_matrix(Pi_a, rows=p, cols=p, name="Pi_a")
    Qbar_a = filtered_residual_gain(Q_r1, Q_r2, Q_uMC, Pi)
    gamma_psi = h2_norm(minimal_realization(product(Psi, fault_robustness_system(factors, Q_uMC, Qbar_a, Pi))))
    gamma_r1 = h2_norm(filtered_residual_gain(Q_r1, Q_r2, Q_uMC))
    ratio = gamma_psi / gamma_r1 if gamma_r1 > 0 else float("inf")
    return {"gamma_psi": gamma_psi, "gamma_r1": gamma_r1, "ratio": ratio}


def reconfigure(
    cfg: McConfig,
    new_Q_r2: StateSpaceModel | None = None,
    new_Q_uMC: StateSpaceModel | None = None,
    new_Q_r1: StateSpaceModel | None = None,
) -> McConfig:
    """New MC parameter set with the post-filters redesigned for it."""
    Q_r2 = cfg.Q_r2 if new_Q_r2 is None else new_Q_r2
    Q_uMC = cfg.Q_uMC if new_Q_uMC is None else new_Q_uMC
    Q_r1 = cfg.Q_r1 if new_Q_r1 is None else new_Q_r1
    require_stable(Q_r1, "Q_r1")
    R = design_attack_postfilter(Q_r1, cfg.Sigma_ry)
    updated = replace(cfg, Q_r2=Q_r2, Q_uMC=Q_uMC, Q_r1=Q_r1, R=R, Rbar=attack_postfilter(R, Q_r2, Q_uMC))
    changed = [name for name, new in (("Q_r2", new_Q_r2), ("Q_uMC", new_Q_uMC), ("Q_r1", new_Q_r1)) if new is not None]
    logger.info(f"MC configuration rebuilt with new {', '.join(changed) or 'nothing'}")
    return updated
