"""Player endpoints: the one surface the game coordinator talks to.

Every seat at the table is driven through the same three operations —
begin_move, deliver, participant_id — so the coordinator cannot tell a
remote human from an in-process bot. The difference is entirely inside
the endpoint: a remote endpoint turns begin_move into a room RPC and
deliver into a targeted send, while a bot endpoint resolves moves from
a local chooser and touches no wire at all. Swapping kinds while the
chosen moves stay the same leaves the emitted game-event stream
identical.

GAME_EVENT_KEY is the envelope key that marks an application payload
as a game event; other application traffic (chat, say) uses other keys
and is invisible to the game layer.
"""

from __future__ import annotations

import asyncio
import inspect
from typing import Any, Awaitable, Callable, Optional, Union

from ..room import ClientRoom, ServerRoom, UnknownParticipant

GAME_EVENT_KEY = "game"

Chooser = Callable[[dict], Union[Any, Awaitable[Any]]]


class PlayerEndpoint:
    """One seat's capability: start a move request, receive private events."""

    def __init__(self, participant_id: str):
        self.participant_id = participant_id

    def begin_move(self, view: dict) -> asyncio.Future:
        """Start asking this player for a move; the future resolves with the
        response payload ({"move": ...}). The coordinator owns timeouts."""
        raise NotImplementedError

    def deliver(self, event: dict) -> None:
        """Hand this player a private game event (their deal, their turn)."""
        raise NotImplementedError


class RemoteEndpoint(PlayerEndpoint):
    """A player connected through the room; moves travel as RPCs."""

    def __init__(self, room: ServerRoom, participant_id: str):
        super().__init__(participant_id)
        self._room = room

    def begin_move(self, view: dict) -> asyncio.Future:
        return self._room.call(self.participant_id, "request_move", {"view": view})

    def deliver(self, event: dict) -> None:
        try:
            self._room.send_to(self.participant_id, {GAME_EVENT_KEY: event})
        except UnknownParticipant:
            pass  # the player is gone; the coordinator aborts on the room event


class BotEndpoint(PlayerEndpoint):
    """An in-process player answering from a chooser; no wire traffic."""

    def __init__(self, participant_id: str, chooser: Chooser):
        super().__init__(participant_id)
        self._chooser = chooser

    def begin_move(self, view: dict) -> asyncio.Future:
        fut: asyncio.Future = asyncio.get_running_loop().create_future()
        fut.set_result({"move": self._chooser(view)})
        return fut

    def deliver(self, event: dict) -> None:
        pass  # a bot reads everything it needs from the move view


class LocalEndpoint(PlayerEndpoint):
    """An in-process player whose chooser may take real time (a human UI)."""

    def __init__(self, participant_id: str, chooser: Chooser):
        super().__init__(participant_id)
        self._chooser = chooser
        self.events: asyncio.Queue = asyncio.Queue()

    def begin_move(self, view: dict) -> asyncio.Future:
        async def ask() -> dict:
            chosen = self._chooser(view)
            if inspect.isawaitable(chosen):
                chosen = await chosen
            return {"move": chosen}

        return asyncio.ensure_future(ask())

    def deliver(self, event: dict) -> None:
        self.events.put_nowait(event)


def attach_player(client: ClientRoom, chooser: Chooser) -> None:
    """Wire a client-side player onto its room connection: answers
    request_move RPCs through the chooser. The view passed to the chooser
    is the coordinator's redacted state for this seat."""

    async def handler(method: str, params: dict) -> dict:
        if method != "request_move":
            raise ValueError(f"unsupported rpc method {method!r}")
        chosen = chooser(params.get("view", {}))
        if inspect.isawaitable(chosen):
            chosen = await chosen
        return {"move": chosen}

    client.set_rpc_handler(handler)


def game_event_of(payload: Optional[dict]) -> Optional[dict]:
    """Extract the game event from an application payload, or None if the
    payload is not game traffic."""
    if not isinstance(payload, dict):
        return None
    event = payload.get(GAME_EVENT_KEY)
    return event if isinstance(event, dict) else None
