"""Services module."""
from .detector_scheduler import PDD_FAMILIES, DetectorFamily, DetectorScheduler
from .experiment_executor import ExperimentExecutor, experiment_executor
from .frame_bus import FrameBus, FrameConsumer, Subscription
from .run_log_service import RunLogService, run_log_service

__all__ = [
    "FrameBus",
    "FrameConsumer",
    "Subscription",
    "DetectorFamily",
    "DetectorScheduler",
    "PDD_FAMILIES",
    "RunLogService",
    "run_log_service",
    "ExperimentExecutor",
    "experiment_executor",
]
