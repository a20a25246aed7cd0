"""Attack models: channel injection, stealthy constructions and closed-loop predictors."""
from .analysis import AttackAnalysis, eta_a_signal, predict_attacked_closed_loop
from .channel import AttackChannel, ChannelRecord, channel_apply
from .specs import (
    AdditiveAttack,
    Architecture,
    AttackSchedule,
    AttackSpec,
    CovertAttack,
    Direction,
    FeedbackStealthAttack,
    MultiplicativeAttack,
    UnitaryChoice,
)
from .stealth import (
    FeedbackStealthDesign,
    covert_attack_gen,
    estimate_steady_stats,
    feedback_stealth_gen,
    moment_mismatch,
    unitary_factor,
)

__all__ = [
    "AdditiveAttack",
    "MultiplicativeAttack",
    "CovertAttack",
    "FeedbackStealthAttack",
    "AttackSpec",
    "AttackSchedule",
    "Architecture",
    "Direction",
    "UnitaryChoice",
    "channel_apply",
    "AttackChannel",
    "ChannelRecord",
    "covert_attack_gen",
    "estimate_steady_stats",
    "FeedbackStealthDesign",
    "feedback_stealth_gen",
    "moment_mismatch",
    "unitary_factor",
    "AttackAnalysis",
    "predict_attacked_closed_loop",
    "eta_a_signal",
]
