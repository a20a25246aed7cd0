"""MC-station: control law, post-filters, detectors and performance checks."""
from .control import McConfig, McEvaluation, McObservation, McStation, mc_control
from .detectors import (
    AttackResidualChi2,
    LlrThreshold,
    SwitchDetectorConfig,
    SwitchingLlr,
    attack_residual_chi2,
    build_switch_detector,
    llr_branch_values,
    llr_projection_statistic,
    llr_statistic,
    llr_threshold,
)
from .pdd import (
    AdditiveStealthChi2,
    GlrDetector,
    PddConfig,
    additive_stealth_detect,
    calibrate_glr_threshold,
    estimate_pdd_covariance,
    glr_pdd_detect,
    glr_statistic,
    sliding_glr,
)
from .performance import (
    attack_loop_gain,
    fault_robustness_system,
    filtered_residual_gain,
    psi_design_margin,
    reconfigure,
    resilient_performance_check,
)
from .postfilter import attack_postfilter, design_attack_postfilter, inverse_sqrt, whiteness_deviation
from .traditional import TraditionalEvaluation, TraditionalMc

__all__ = [
    "McConfig",
    "McStation",
    "McEvaluation",
    "McObservation",
    "mc_control",
    "design_attack_postfilter",
    "attack_postfilter",
    "inverse_sqrt",
    "whiteness_deviation",
    "AttackResidualChi2",
    "attack_residual_chi2",
    "SwitchDetectorConfig",
    "build_switch_detector",
    "llr_branch_values",
    "llr_projection_statistic",
    "llr_statistic",
    "llr_threshold",
    "LlrThreshold",
    "SwitchingLlr",
    "PddConfig",
    "glr_statistic",
    "sliding_glr",
    "glr_pdd_detect",
    "calibrate_glr_threshold",
    "estimate_pdd_covariance",
    "GlrDetector",
    "AdditiveStealthChi2",
    "additive_stealth_detect",
    "resilient_performance_check",
    "psi_design_margin",
    "reconfigure",
    "attack_loop_gain",
    "filtered_residual_gain",
    "fault_robustness_system",
    "TraditionalMc",
    "TraditionalEvaluation",
]
