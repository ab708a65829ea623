"""Room events and the observer subscription primitive.

Every state change in a room is published as a RoomEvent stamped with a
per-room monotonically increasing sequence number. Events reach
in-process observers through Subscription queues and remote
participants as `room_event` envelopes with payload
{seq, variant, body}.

A Subscription is an async iterator delivering every event from its
subscription point onward, in order, exactly once. Slow consumers queue
up to 1024 events; past that the subscription is closed with a final
`error` event (variant "error", body {"reason": "subscription_overflow"})
rather than reordering or silently dropping. The "error" variant exists
only for this local delivery path — rooms never emit it.
"""

from __future__ import annotations

import asyncio
from dataclasses import dataclass
from typing import Optional

ROOM_EVENT_VARIANTS = frozenset(
    {
        "room_opened",
        "room_closed",
        "participant_joined",
        "participant_rejoined",
        "participant_disconnected",
        "participant_left",
        "app_event",
        "anomaly_detected",
    }
)

SUBSCRIPTION_LIMIT = 1024


@dataclass(frozen=True)
class RoomEvent:
    seq: int
    variant: str
    body: dict

    def to_payload(self) -> dict:
        return {"seq": self.seq, "variant": self.variant, "body": self.body}

    @classmethod
    def from_payload(cls, obj: dict) -> "RoomEvent":
        seq = obj["seq"]
        variant = obj["variant"]
        body = obj.get("body", {})
        if not isinstance(seq, int) or not isinstance(variant, str) or not isinstance(body, dict):
            raise ValueError("room_event payload has wrong field types")
        return cls(seq=seq, variant=variant, body=body)


_END = object()


class Subscription:
    """Ordered, exactly-once event feed for one observer.

    Async-iterate to consume; iteration ends when the subscription is
    closed (room closed, channel gone, overflow, or explicit close()).
    """

    def __init__(self, limit: int = SUBSCRIPTION_LIMIT):
        self._limit = limit
        self._queue: asyncio.Queue = asyncio.Queue()
        self._open = True
        self._ended = False

    @property
    def is_open(self) -> bool:
        return self._open

    def deliver(self, event: RoomEvent) -> None:
        if not self._open:
            return
        if self._queue.qsize() >= self._limit:
            self._open = False
            self._queue.put_nowait(
                RoomEvent(seq=event.seq, variant="error", body={"reason": "subscription_overflow"})
            )
            self._queue.put_nowait(_END)
            return
        self._queue.put_nowait(event)

    def close(self) -> None:
        if self._open:
            self._open = False
            self._queue.put_nowait(_END)

    def __aiter__(self) -> "Subscription":
        return self

    async def __anext__(self) -> RoomEvent:
        item = await self._queue.get()
        if item is _END:
            self._mark_ended()
            raise StopAsyncIteration
        return item

    async def next_event(self, timeout: Optional[float] = None) -> Optional[RoomEvent]:
        """Next event, or None once the subscription has ended."""
        if timeout is None:
            item = await self._queue.get()
        else:
            item = await asyncio.wait_for(self._queue.get(), timeout)
        if item is _END:
            self._mark_ended()
            return None
        return item

    def drain_ready(self) -> tuple[list[RoomEvent], bool]:
        """Non-blocking sweep of everything already queued, in order, plus
        whether the stream has ended."""
        events: list[RoomEvent] = []
        while True:
            try:
                item = self._queue.get_nowait()
            except asyncio.QueueEmpty:
                return events, self._ended
            if item is _END:
                self._mark_ended()
                return events, True
            events.append(item)

    def _mark_ended(self) -> None:
        """The end is sticky: every later read sees it again instead of
        blocking on a queue that will never refill."""
        self._ended = True
        self._queue.put_nowait(_END)  # nothing is ever queued after it
