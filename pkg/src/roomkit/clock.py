"""Injectable time source.

Everything in roomkit that reads "now" takes a Clock so that session
timeouts and discovery expiry are deterministic under test. Production
code uses the default MonotonicClock; tests use ManualClock and advance
it explicitly.
"""

from __future__ import annotations

import time


class Clock:
    """Time source interface: now() in seconds, monotonic."""

    def now(self) -> float:
        raise NotImplementedError


class MonotonicClock(Clock):
    """Wall clock backed by time.monotonic()."""

    def now(self) -> float:
        return time.monotonic()


class ManualClock(Clock):
    """Clock that only moves when told to. For tests."""

    def __init__(self, start: float = 0.0):
        self._now = float(start)

    def now(self) -> float:
        return self._now

    def advance(self, seconds: float) -> None:
        if seconds < 0:
            raise ValueError("cannot rewind a ManualClock")
        self._now += seconds

    def set(self, value: float) -> None:
        if value < self._now:
            raise ValueError("cannot rewind a ManualClock")
        self._now = float(value)


MONOTONIC = MonotonicClock()
