"""Synchronous fan-out of MC-side frames to detector consumers."""
import dataclasses
import logging
from dataclasses import dataclass
from typing import Protocol

import numpy as np

from src.schemas.verdict import DetectorVerdict

logger = logging.getLogger(__name__)


class FrameConsumer(Protocol):
    name: str

    def consume(self, frame) -> DetectorVerdict | None: ...


@dataclass(frozen=True, eq=False)
class Subscription:
    consumer: FrameConsumer
    family: str | None = None


def _freeze(frame):
    """Mark the frame's arrays read-only so consumers cannot alter what others see."""
    if dataclasses.is_dataclass(frame):
        for f in dataclasses.fields(frame):
            value = getattr(frame, f.name)
            if isinstance(value, np.ndarray):
                value.setflags(write=False)
    return frame


class FrameBus:
    """Delivers every published frame to the subscribed consumers in subscription order."""

    def __init__(self):
        """Initialize the bus."""
        self._subscriptions: list[Subscription] = []

    def subscribe(self, consumer: FrameConsumer, family: str | None = None) -> None:
        """Register a consumer; ``family`` restricts it to frames published for that family."""
        self._subscriptions.append(Subscription(consumer, family))
        logger.debug(f"Detector {consumer.name} subscribed (family {family or 'any'})")

    def unsubscribe(self, name: str) -> None:
        self._subscriptions = [s for s in self._subscriptions if s.consumer.name != name]

    def consumers(self, family: str | None = None) -> list[FrameConsumer]:
        return [s.consumer for s in self._subscriptions if family is None or s.family == family]

    def publish(self, frame, families: set[str] | None = None) -> list[tuple[str | None, DetectorVerdict]]:
        """Fan ``frame`` out; returns (family, verdict) for every consumer that produced one.

        With ``families`` given, only consumers of those families (and
        family-less ones) receive the frame.
        """
        frame = _freeze(frame)
        out: list[tuple[str | None, DetectorVerdict]] = []
        for sub in self._subscriptions:
            if families is not None and sub.family is not None and sub.family not in families:
                continue
            try:
                verdict = sub.consumer.consume(frame)
            except Exception as e:
                logger.error(f"Detector {sub.consumer.name} failed on frame {getattr(frame, 'k', '?')}: {e}")
                raise
            if verdict is not None:
                out.append((sub.family, verdict))
        return out

    @property
    def subscriber_count(self) -> int:
        """Get the number of subscribed consumers."""
        return len(self._subscriptions)
