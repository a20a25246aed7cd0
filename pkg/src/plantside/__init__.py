"""Plant side: true plant, faults, reference and the embedded computation."""
from .faults import FaultSpec
from .fd import KalmanChi2Detector, embedded_compute, fd_chi2, mode_switch, pdd_mode_compute, plant_step
from .profiles import Constant, Gaussian, Sine, VectorProfile, Window
from .reference import PiecewiseReference, ReferenceConfig
from .runtime import PlantEvaluation, PlantProcess, PlantRuntime, ResidualFrame, covariance_factor

__all__ = [
    "Constant",
    "Gaussian",
    "Sine",
    "VectorProfile",
    "Window",
    "FaultSpec",
    "PiecewiseReference",
    "ReferenceConfig",
    "PlantProcess",
    "PlantRuntime",
    "PlantEvaluation",
    "ResidualFrame",
    "covariance_factor",
    "plant_step",
    "embedded_compute",
    "pdd_mode_compute",
    "mode_switch",
    "fd_chi2",
    "KalmanChi2Detector",
]
