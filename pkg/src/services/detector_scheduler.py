"""Round-robin dwell schedule of the detector families."""
import logging
from enum import Enum

from src.schemas.scenario import DetectorScheduleConfig

logger = logging.getLogger(__name__)


class DetectorFamily(str, Enum):
    """Detector family enum."""

    REGULAR = "regular"
    ADDITIVE = "additive"
    MULTIPLICATIVE = "multiplicative"


PDD_FAMILIES = frozenset({DetectorFamily.ADDITIVE, DetectorFamily.MULTIPLICATIVE})


class DetectorScheduler:
    """Tells which detector family is active at each step.

    The cycle runs regular → additive → multiplicative with the configured
    dwell times in steps; before ``start`` the regular family is active.
    Additive and multiplicative phases put the plant side in PDD mode.
    """

    def __init__(self, regular: int, additive: int, multiplicative: int, start: int = 0):
        self.dwell = [
            (DetectorFamily.REGULAR, regular),
            (DetectorFamily.ADDITIVE, additive),
            (DetectorFamily.MULTIPLICATIVE, multiplicative),
        ]
        self.cycle = regular + additive + multiplicative
        if self.cycle <= 0 or min(regular, additive, multiplicative) < 0:
            raise ValueError(f"invalid detector dwell times {regular}/{additive}/{multiplicative}")
        self.start = start

    @classmethod
    def from_config(cls, cfg: DetectorScheduleConfig, to_steps) -> "DetectorScheduler":
        """``to_steps(seconds, name)`` converts the configured times."""
        return cls(
            to_steps(cfg.regular, "regular dwell"),
            to_steps(cfg.additive, "additive dwell"),
            to_steps(cfg.multiplicative, "multiplicative dwell"),
            to_steps(cfg.start, "schedule start"),
        )

    def active(self, k: int) -> DetectorFamily:
        if k < self.start:
            return DetectorFamily.REGULAR
        phase = (k - self.start) % self.cycle
        for family, steps in self.dwell:
            if phase < steps:
                return family
            phase -= steps
        return DetectorFamily.REGULAR

    def pdd(self, k: int) -> bool:
        return self.active(k) in PDD_FAMILIES

    def resets(self, k: int) -> set[DetectorFamily]:
        """Families whose detector windows restart at step k.

        Regular windows restart when the regular phase is entered; the
        r_PDD windows restart when a PDD block (additive then
        multiplicative) begins, so they may span both PDD phases.
        """
        if k == 0:
            return set()
        now, before = self.active(k), self.active(k - 1)
        if now == before:
            return set()
        if now == DetectorFamily.REGULAR:
            return {DetectorFamily.REGULAR}
        if before == DetectorFamily.REGULAR:
            return set(PDD_FAMILIES)
        return set()

    def dwell_counts(self, steps: int) -> dict[DetectorFamily, int]:
        """Number of steps each family is active within [0, steps)."""
        counts = {family: 0 for family, _ in self.dwell}
        for k in range(steps):
            counts[self.active(k)] += 1
        return counts
