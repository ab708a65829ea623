"""The game coordinator: one authoritative turn loop per game.

The coordinator owns three capability groups on a single entity:
registration (seats are claimed by registering endpoints before the
loop starts), elaboration (the turn loop queries the game hooks —
next_turn, legal_moves, apply_move, is_over — and validates every move
server-side before applying it), and communication (game events flow
out through the room as broadcasts or targeted sends, and move requests
flow to the acting player's endpoint).

The loop is strictly turn-based: one outstanding move request at a
time. While a move is pending the coordinator also consumes room events
from its subscription, so disconnects, rejoins, and leaves interleave
with RPC completion in one place. A disconnected actor pauses the move
clock — the session timeout, not the move timeout, bounds their
absence — and the held request is re-sent by the room on rejoin with
its original correlation id.

A move that is not among the legal plays, whatever its shape, ends the
game through the anomaly path: one anomaly_detected room event reaches
every participant (the offender included) and the result carries the
offender with no winner. Timeouts and departures likewise terminate
the game, with reasons "move_timeout", "player_gone", or "room_closed".

Games end normally when is_over() turns true; the game's own final
emissions are expected to carry its game_over event. The coordinator
emits a game_over event itself only for aborted games, with fields
{aborted, reason} instead of a winner.
"""

from __future__ import annotations

import asyncio
import logging
from dataclasses import dataclass, field
from typing import Callable, Optional, Protocol, Sequence

from ..clock import MONOTONIC, Clock
from ..room import (
    ParticipantGone,
    ParticipantState,
    RoomError,
    ServerRoom,
    Subscription,
    UnknownParticipant,
)
from .endpoints import GAME_EVENT_KEY, PlayerEndpoint

logger = logging.getLogger(__name__)

DEFAULT_MOVE_TIMEOUT = 30.0

# Real-time slice between clock samples while a move is pending. The move
# clock itself reads the injected Clock, so tests drive it manually.
_POLL = 0.02

# (seat or None for a broadcast, game event payload)
Emission = tuple[Optional[int], dict]


class Game(Protocol):
    """Hooks a concrete game implements. Seats are 0..seats-1; move and
    event payloads must be JSON-compatible values (moves are compared by
    equality against the legal list)."""

    seats: int

    def setup(self) -> list[Emission]: ...

    def next_turn(self) -> int: ...

    def legal_moves(self, seat: int) -> list: ...

    def view(self, seat: int) -> dict: ...

    def apply_move(self, seat: int, move) -> list[Emission]: ...

    def validate(self, seat: int, move) -> Optional[str]: ...

    def is_over(self) -> bool: ...

    def result(self) -> dict: ...


class GameError(Exception):
    pass


class MoveTimeout(GameError):
    def __init__(self, seat: int):
        super().__init__(f"seat {seat} did not move in time")
        self.seat = seat


class IllegalMove(GameError):
    def __init__(self, seat: int, description: str):
        super().__init__(f"seat {seat}: {description}")
        self.seat = seat
        self.description = description


class PlayerGone(GameError):
    def __init__(self, participant_id: str):
        super().__init__(f"participant {participant_id} left the game")
        self.participant_id = participant_id


@dataclass(frozen=True)
class GameResult:
    """Outcome of one game: either winners (participant ids) or an abort."""

    winners: Optional[tuple[str, ...]]
    aborted: Optional[str] = None  # "anomaly" | "move_timeout" | "player_gone" | "room_closed"
    offender: Optional[str] = None
    detail: dict = field(default_factory=dict)


class _Abort(Exception):
    def __init__(self, kind: str, *, reason: str, offender: Optional[str] = None):
        super().__init__(reason)
        self.kind = kind
        self.reason = reason
        self.offender = offender


def _discard_future(fut: asyncio.Future) -> None:
    """Drop a move future we no longer care about without leaving an
    unretrieved exception behind."""
    if fut.done():
        if not fut.cancelled():
            fut.exception()
    else:
        fut.cancel()


class GameComms:
    """Where outbound game events go; kind-blind like the endpoints."""

    def broadcast(self, event: dict) -> None:
        raise NotImplementedError

    def anomaly(self, participant_id: Optional[str], event: dict) -> None:
        raise NotImplementedError


class RoomComms(GameComms):
    def __init__(self, room: ServerRoom):
        self._room = room

    def broadcast(self, event: dict) -> None:
        try:
            self._room.broadcast({GAME_EVENT_KEY: event})
        except RoomError:
            logger.debug("dropping game event broadcast; room is closed")

    def anomaly(self, participant_id: Optional[str], event: dict) -> None:
        try:
            self._room.raise_anomaly(participant_id, event)
        except RoomError:
            logger.debug("dropping anomaly broadcast; room is closed")


class NullComms(GameComms):
    """For fully in-process games with no room attached."""

    def broadcast(self, event: dict) -> None:
        pass

    def anomaly(self, participant_id: Optional[str], event: dict) -> None:
        pass


class GameCoordinator:
    """Runs one game to completion over registered player endpoints."""

    def __init__(
        self,
        game: Game,
        *,
        room: Optional[ServerRoom] = None,
        clock: Clock = MONOTONIC,
        move_timeout: float = DEFAULT_MOVE_TIMEOUT,
    ):
        if move_timeout <= 0:
            raise ValueError("move_timeout must be positive")
        self._game = game
        self._room = room
        self._comms: GameComms = RoomComms(room) if room is not None else NullComms()
        self._clock = clock
        self._move_timeout = float(move_timeout)
        self._endpoints: list[PlayerEndpoint] = []
        self._seat_of: dict[str, int] = {}
        self._observers: list[Callable[[Optional[int], dict], None]] = []
        self._sub: Optional[Subscription] = None
        self._event_task: Optional[asyncio.Task] = None
        self._disconnected: set[str] = set()

    # ------------------------------------------------------------ registration

    def register(self, endpoint: PlayerEndpoint) -> int:
        """Claim the next free seat for this endpoint; returns the seat."""
        if len(self._endpoints) >= self._game.seats:
            raise GameError("all seats are taken")
        if endpoint.participant_id in self._seat_of:
            raise GameError(f"participant {endpoint.participant_id} already seated")
        seat = len(self._endpoints)
        self._endpoints.append(endpoint)
        self._seat_of[endpoint.participant_id] = seat
        return seat

    @property
    def registration_complete(self) -> bool:
        return len(self._endpoints) == self._game.seats

    def seat_of(self, participant_id: str) -> Optional[int]:
        return self._seat_of.get(participant_id)

    # ------------------------------------------------------------ observation

    def add_observer(self, observer: Callable[[Optional[int], dict], None]) -> None:
        """Observe every outbound game event, private sends included, as
        (to_seat or None, event) — the canonical game transcript."""
        self._observers.append(observer)

    # ------------------------------------------------------------ elaboration

    async def run(self) -> GameResult:
        if not self.registration_complete:
            raise GameError(
                f"registration incomplete: {len(self._endpoints)} of {self._game.seats} seats"
            )
        if self._room is not None:
            self._sub = self._room.subscribe()
            for rec in self._room.participants():
                if (
                    rec.participant_id in self._seat_of
                    and rec.state is ParticipantState.DISCONNECTED
                ):
                    self._disconnected.add(rec.participant_id)
        try:
            self._dispatch(self._game.setup())
            while not self._game.is_over():
                seat = self._game.next_turn()
                await self._play_turn(seat)
            detail = self._game.result()
            winners = tuple(
                self._endpoints[s].participant_id for s in detail.get("winner_seats", ())
            )
            return GameResult(winners=winners, detail=detail)
        except _Abort as abort:
            event = {"type": "game_over", "aborted": abort.kind, "reason": abort.reason}
            self._record(None, event)
            self._comms.broadcast(event)
            return GameResult(winners=None, aborted=abort.kind, offender=abort.offender)
        finally:
            if self._event_task is not None:
                self._event_task.cancel()
                self._event_task = None
            if self._sub is not None:
                self._sub.close()

    def raise_anomaly(self, offender: Optional[str], description: str) -> None:
        """Broadcast anomaly_detected to everyone (offender included) and
        terminate the game with no winner. Only meaningful from within the
        turn loop; the loop invokes it for every invalid move."""
        seat = self._seat_of.get(offender) if offender is not None else None
        event = {"type": "anomaly", "seat": seat, "description": description}
        self._record(None, event)
        self._comms.anomaly(offender, event)
        raise _Abort("anomaly", reason=description, offender=offender)

    # ------------------------------------------------------------ internals

    async def _play_turn(self, seat: int) -> None:
        endpoint = self._endpoints[seat]
        legal = self._game.legal_moves(seat)
        if not legal:
            raise GameError(f"game offered no legal moves for seat {seat}")
        public = {"type": "turn", "seat": seat, "deadline": self._move_timeout}
        self._record(None, public)
        self._comms.broadcast(public)
        private = {**public, "legal": legal}
        self._record(seat, private)
        endpoint.deliver(private)

        view = dict(self._game.view(seat))
        view["legal"] = legal
        view["deadline"] = self._move_timeout
        try:
            fut = endpoint.begin_move(view)
        except UnknownParticipant:
            raise _Abort(
                "player_gone", reason=f"participant {endpoint.participant_id} left the game"
            ) from None
        except RoomError:
            raise _Abort("room_closed", reason="room closed during the game") from None
        response = await self._await_move(seat, endpoint.participant_id, fut)

        move = response.get("move") if isinstance(response, dict) else None
        if move not in legal:
            description = self._game.validate(seat, move) or "move is not among the legal plays"
            self.raise_anomaly(endpoint.participant_id, description)
        assert move in legal  # every applied move was legal at application time
        self._dispatch(self._game.apply_move(seat, move))

    async def _await_move(self, seat: int, participant_id: str, fut: asyncio.Future) -> dict:
        """Wait for the move response while consuming room events. The move
        clock only runs while the actor is connected; their disconnection
        hands the bound over to the room's session timeout."""
        remaining = self._move_timeout
        last_sample = self._clock.now()
        while not fut.done():
            waiters: set = {fut}
            event_task = self._next_event_task()
            if event_task is not None:
                waiters.add(event_task)
            await asyncio.wait(waiters, timeout=_POLL, return_when=asyncio.FIRST_COMPLETED)
            now = self._clock.now()
            if participant_id not in self._disconnected:
                remaining -= now - last_sample
            last_sample = now
            if event_task is not None and event_task.done():
                self._event_task = None
                try:
                    self._consume_event(event_task)
                except _Abort:
                    _discard_future(fut)
                    raise
            if fut.done():
                break
            if remaining <= 0:
                _discard_future(fut)
                raise _Abort(
                    "move_timeout",
                    reason=f"seat {seat} did not move within {self._move_timeout:g} s",
                )
        try:
            return fut.result()
        except ParticipantGone as exc:
            # The room emits the explaining event (participant_left or
            # room_closed) before failing the rpc, so it is already in our
            # subscription and the drain below will surface it as the abort.
            if self._event_task is not None and self._event_task.done():
                event_task, self._event_task = self._event_task, None
                self._consume_event(event_task)
            self._drain_events()
            raise _Abort(
                "player_gone", reason=f"participant {exc.participant_id} left the game"
            ) from exc

    def _next_event_task(self) -> Optional[asyncio.Task]:
        if self._sub is None:
            return None
        if self._event_task is None:
            self._event_task = asyncio.ensure_future(self._sub.__anext__())
        return self._event_task

    def _consume_event(self, event_task: asyncio.Task) -> None:
        try:
            event = event_task.result()
        except StopAsyncIteration:
            self._sub = None
            raise _Abort("room_closed", reason="room event stream ended") from None
        self._apply_event(event)
        self._drain_events()

    def _drain_events(self) -> None:
        """Apply every room event already queued. The subscription also
        carries our own game broadcasts, so consuming in bulk is what keeps
        the queue from overflowing during long games."""
        if self._sub is None:
            return
        events, ended = self._sub.drain_ready()
        for event in events:
            self._apply_event(event)
        if ended:
            self._sub = None
            raise _Abort("room_closed", reason="room event stream ended")

    def _apply_event(self, event) -> None:
        participant_id = event.body.get("participant_id")
        seated = participant_id in self._seat_of
        if event.variant == "participant_disconnected" and seated:
            self._disconnected.add(participant_id)
        elif event.variant == "participant_rejoined" and seated:
            self._disconnected.discard(participant_id)
        elif event.variant == "participant_left" and seated:
            raise _Abort(
                "player_gone", reason=f"participant {participant_id} left the game"
            )
        elif event.variant == "room_closed":
            raise _Abort("room_closed", reason="room closed during the game")

    def _dispatch(self, emissions: Sequence[Emission]) -> None:
        for to_seat, event in emissions:
            self._record(to_seat, event)
            if to_seat is None:
                self._comms.broadcast(event)
            else:
                self._endpoints[to_seat].deliver(event)

    def _record(self, to_seat: Optional[int], event: dict) -> None:
        for observer in self._observers:
            observer(to_seat, event)


async def run_game(
    coordinator: GameCoordinator, players: Sequence[PlayerEndpoint] = ()
) -> GameResult:
    """Register any remaining players and run the game to completion."""
    for player in players:
        coordinator.register(player)
    return await coordinator.run()
