"""Coprime factors, Youla controllers, residual maps and mode compensators."""
from .bezout import BezoutFactors, FactorGains, build_bezout_factors, verify_bezout
from .modes import ModeCompensators, ModeSet, io_from_mode_residuals, random_dwell_schedule, reparameterize_mode
from .residuals import io_from_residuals, io_reconstructor, residual_generator, residuals_from_io
from .youla import YoulaParam, internally_stable, youla_controller

__all__ = [
    "FactorGains",
    "BezoutFactors",
    "build_bezout_factors",
    "verify_bezout",
    "YoulaParam",
    "youla_controller",
    "internally_stable",
    "residual_generator",
    "io_reconstructor",
    "residuals_from_io",
    "io_from_residuals",
    "ModeCompensators",
    "ModeSet",
    "reparameterize_mode",
    "io_from_mode_residuals",
    "random_dwell_schedule",
]
