"""Server side of a room: registration, sessions, events, and RPC.

A ServerRoom accepts join/rejoin handshakes on any number of transport
listeners concurrently, keeps one ParticipantRecord per admitted
participant, and publishes every state change as a RoomEvent (see
events.py). Participant state moves only along:

    Joined -> Disconnected   (channel drop without a leave message)
    Joined -> Left           (leave message, kick, or room close)
    Disconnected -> Joined   (valid rejoin before the deadline)
    Disconnected -> Left     (deadline passes; sweep or rejoin attempt)

Left is terminal. Records are kept after Left so stale tokens resolve
to a precise rejection reason instead of a generic failure.

All state mutation happens in synchronous sections on the event loop —
connection readers and the sweeper call into them between awaits, which
serializes every transition without locks. Frames travel to each
participant through a per-connection outbox drained by a writer task,
so per-recipient delivery order always equals emission order.

Tokens are invalidated on graceful leave (rejoin exists for
disconnections, not for re-entry after quitting). A disconnected
participant misses live events and resynchronizes from the rejoin
snapshot, which carries an app-defined opaque digest supplied via
set_digest_source; the room itself never interprets it.

Client-to-room application messages arrive as `room_event` envelopes
with payload {"body": ...} and are rebroadcast to everyone as app_event
RoomEvents with body {"from": sender_id, "data": body}. Targeted
send_to deliveries use body {"to": recipient_id, "data": payload}; they
consume a sequence number like any event, so clients must treat seq as
monotonic, not contiguous.

The `deadline` field of participant_disconnected bodies is the number
of seconds the participant has to rejoin, not an absolute timestamp —
process clocks are not comparable across the wire.
"""

from __future__ import annotations

import asyncio
import itertools
import logging
import secrets
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Optional

from ..clock import MONOTONIC, Clock
from ..transport import Channel, ChannelClosed, Listener, TransportError
from ..wire import Envelope, WireError, envelope_of, frame_for
from .events import RoomEvent, Subscription
from .tokens import SessionToken, issue_token, verify_token

logger = logging.getLogger(__name__)

DEFAULT_SESSION_TIMEOUT = 60.0
SWEEP_PERIOD = 1.0
HANDSHAKE_TIMEOUT = 10.0
OUTBOX_LIMIT = 1024


class RoomError(Exception):
    pass


class UnknownParticipant(RoomError):
    pass


class ParticipantGone(RoomError):
    """A pending RPC failed because the participant left the room."""

    def __init__(self, participant_id: str):
        super().__init__(f"participant {participant_id} left the room")
        self.participant_id = participant_id


@dataclass
class RoomConfig:
    room_name: str
    capacity: int = 4
    session_timeout: float = DEFAULT_SESSION_TIMEOUT
    secret_key: bytes = field(default_factory=lambda: secrets.token_bytes(32), repr=False)
    app_tag: str = ""

    def __post_init__(self) -> None:
        if self.capacity < 1:
            raise ValueError("capacity must be >= 1")
        if self.session_timeout <= 0:
            raise ValueError("session_timeout must be positive")


class ParticipantState(Enum):
    JOINED = "joined"
    DISCONNECTED = "disconnected"
    LEFT = "left"


@dataclass
class ParticipantRecord:
    participant_id: str
    display_name: str
    state: ParticipantState
    token_id: Optional[str]  # None once the token is invalidated
    channel: Optional[Channel] = None
    disconnect_deadline: Optional[float] = None
    left_reason: Optional[str] = None  # "leave" | "kick" | "expired" | "room_closed"
    outbox: Optional[asyncio.Queue] = None


class ServerRoom:
    def __init__(
        self,
        config: RoomConfig,
        listeners: list[Listener],
        clock: Clock = MONOTONIC,
    ):
        if not listeners:
            raise ValueError("a room needs at least one listener")
        self.config = config
        self.room_id = secrets.token_hex(16)
        self._clock = clock
        self._listeners = list(listeners)
        self._records: dict[str, ParticipantRecord] = {}
        self._seq = 0
        self._subs: list[Subscription] = []
        self._pending: dict[str, dict[int, tuple[Envelope, asyncio.Future]]] = {}
        self._cids = itertools.count(1)
        self._digest_source: Optional[Callable[[str], object]] = None
        self._opened = False
        self._closed = False
        self._tasks: list[asyncio.Task] = []
        self._conn_tasks: set[asyncio.Task] = set()

    # ------------------------------------------------------------- lifecycle

    async def open(self) -> None:
        if self._opened:
            raise RoomError("room already opened")
        self._opened = True
        self._emit(
            "room_opened",
            {"room_id": self.room_id, "room_name": self.config.room_name},
        )
        for listener in self._listeners:
            self._tasks.append(asyncio.create_task(self._accept_loop(listener)))
        self._tasks.append(asyncio.create_task(self._sweep_loop()))

    async def close(self, reason: str = "host_shutdown") -> None:
        if self._closed or not self._opened:
            self._closed = True
            return
        self._closed = True
        self._emit("room_closed", {"reason": reason})
        for rec in self._records.values():
            if rec.outbox is not None:
                rec.outbox.put_nowait(None)  # writers flush then stop
            if rec.state is not ParticipantState.LEFT:
                rec.state = ParticipantState.LEFT
                rec.left_reason = "room_closed"
            self._fail_pending(rec.participant_id)
        for task in self._tasks:
            task.cancel()
        await asyncio.gather(*self._tasks, return_exceptions=True)
        for listener in self._listeners:
            await listener.close()
        for rec in self._records.values():
            if rec.channel is not None:
                await rec.channel.close()
        # Connection readers may be blocked on peers that never close their
        # side; they have nothing left to serve, so cancel rather than wait.
        for task in list(self._conn_tasks):
            task.cancel()
        await asyncio.gather(*list(self._conn_tasks), return_exceptions=True)
        for sub in self._subs:
            sub.close()
        self._subs.clear()

    @property
    def is_open(self) -> bool:
        return self._opened and not self._closed

    @property
    def room_name(self) -> str:
        return self.config.room_name

    def endpoints(self) -> list:
        return [listener.address for listener in self._listeners]

    def occupied_count(self) -> int:
        return sum(
            1 for r in self._records.values() if r.state is not ParticipantState.LEFT
        )

    def participants(self) -> list[ParticipantRecord]:
        return list(self._records.values())

    def record(self, participant_id: str) -> Optional[ParticipantRecord]:
        return self._records.get(participant_id)

    def set_digest_source(self, source: Optional[Callable[[str], object]]) -> None:
        """Install the app layer's per-participant snapshot digest builder."""
        self._digest_source = source

    # ------------------------------------------------------------ app surface

    def subscribe(self) -> Subscription:
        """In-process observer feed; sees every event emitted after this call,
        including targeted send_to events (server-side observers are trusted)."""
        sub = Subscription()
        self._subs.append(sub)
        return sub

    def broadcast(self, payload: dict) -> None:
        self._require_open()
        self._emit("app_event", {"data": payload})

    def send_to(self, participant_id: str, payload: dict) -> None:
        self._require_open()
        rec = self._records.get(participant_id)
        if rec is None or rec.state is ParticipantState.LEFT:
            raise UnknownParticipant(participant_id)
        self._seq += 1
        event = RoomEvent(self._seq, "app_event", {"to": participant_id, "data": payload})
        self._deliver_to_subs(event)
        if rec.state is ParticipantState.JOINED:
            self._enqueue(rec, Envelope(type="room_event", payload=event.to_payload()))
        # Disconnected: silently skipped; the rejoin snapshot resynchronizes.

    def call(self, participant_id: str, method: str, params: dict) -> asyncio.Future:
        """Start an RPC toward a participant; resolves with the rpc_response
        payload. Requests to a Disconnected participant are held and re-sent
        with the same cid on rejoin; they fail with ParticipantGone if the
        participant leaves instead."""
        self._require_open()
        rec = self._records.get(participant_id)
        if rec is None or rec.state is ParticipantState.LEFT:
            raise UnknownParticipant(participant_id)
        cid = next(self._cids)
        env = Envelope(type="rpc_request", cid=cid, payload={"method": method, "params": params})
        fut: asyncio.Future = asyncio.get_running_loop().create_future()
        self._pending[participant_id][cid] = (env, fut)
        fut.add_done_callback(
            lambda _: self._pending.get(participant_id, {}).pop(cid, None)
        )
        if rec.state is ParticipantState.JOINED:
            self._enqueue(rec, env)
        return fut

    def raise_anomaly(self, participant_id: Optional[str], body: dict) -> None:
        """Broadcast an anomaly_detected event to every participant, the
        offender included; the app layer decides what happens to the game."""
        self._require_open()
        self._emit("anomaly_detected", {**body, "participant_id": participant_id})

    def kick(self, participant_id: str) -> None:
        self._require_open()
        rec = self._records.get(participant_id)
        if rec is None or rec.state is ParticipantState.LEFT:
            raise UnknownParticipant(participant_id)
        channel = rec.channel
        self._mark_left(rec, "kick")
        if channel is not None:
            asyncio.create_task(channel.close())

    def sweep_sessions(self, now: float) -> list[str]:
        """Expire every Disconnected record past its deadline; returns their ids."""
        expired = [
            rec
            for rec in self._records.values()
            if rec.state is ParticipantState.DISCONNECTED
            and rec.disconnect_deadline is not None
            and now >= rec.disconnect_deadline
        ]
        for rec in expired:
            self._expire(rec)
        return [rec.participant_id for rec in expired]

    # --------------------------------------------------------------- internals

    def _require_open(self) -> None:
        if not self.is_open:
            raise RoomError("room is not open")

    def _deliver_to_subs(self, event: RoomEvent) -> None:
        for sub in list(self._subs):
            sub.deliver(event)
            if not sub.is_open:
                self._subs.remove(sub)

    def _emit(self, variant: str, body: dict, exclude: frozenset = frozenset()) -> None:
        self._seq += 1
        event = RoomEvent(self._seq, variant, body)
        self._deliver_to_subs(event)
        env = Envelope(type="room_event", payload=event.to_payload())
        for rec in self._records.values():
            if rec.state is ParticipantState.JOINED and rec.participant_id not in exclude:
                self._enqueue(rec, env)

    def _enqueue(self, rec: ParticipantRecord, env: Envelope) -> None:
        if rec.outbox is None:
            return
        if rec.outbox.qsize() >= OUTBOX_LIMIT:
            logger.warning(
                "outbox overflow for %s; dropping its connection", rec.participant_id
            )
            channel = rec.channel
            asyncio.get_running_loop().call_soon(self._handle_channel_drop, rec, channel)
            return
        rec.outbox.put_nowait(frame_for(env))

    def _snapshot(self, for_participant: str) -> dict:
        digest = None
        if self._digest_source is not None:
            try:
                digest = self._digest_source(for_participant)
            except Exception:
                logger.exception("digest source failed for %s", for_participant)
        return {
            "seq": self._seq,
            "room_id": self.room_id,
            "room_name": self.config.room_name,
            "app_tag": self.config.app_tag,
            "capacity": self.config.capacity,
            "participants": [
                {
                    "participant_id": rec.participant_id,
                    "display_name": rec.display_name,
                    "state": rec.state.value,
                }
                for rec in self._records.values()
                if rec.state is not ParticipantState.LEFT
            ],
            "digest": digest,
        }

    # ------------------------------------------------------------- transitions

    def _mark_left(self, rec: ParticipantRecord, reason: str) -> None:
        rec.state = ParticipantState.LEFT
        rec.left_reason = reason
        rec.disconnect_deadline = None
        if reason in ("leave", "kick"):
            rec.token_id = None  # rejoin is for disconnections, not re-entry
        self._emit(
            "participant_left",
            {"participant_id": rec.participant_id},
            exclude=frozenset({rec.participant_id}),
        )
        self._fail_pending(rec.participant_id)

    def _expire(self, rec: ParticipantRecord) -> None:
        # token_id is kept so a late rejoin maps to `expired`, not `bad_token`
        rec.state = ParticipantState.LEFT
        rec.left_reason = "expired"
        rec.disconnect_deadline = None
        self._emit("participant_left", {"participant_id": rec.participant_id})
        self._fail_pending(rec.participant_id)

    def _fail_pending(self, participant_id: str) -> None:
        for _cid, (_env, fut) in list(self._pending.get(participant_id, {}).items()):
            if not fut.done():
                fut.set_exception(ParticipantGone(participant_id))

    def _handle_channel_drop(self, rec: ParticipantRecord, channel: Optional[Channel]) -> None:
        if rec.channel is not channel or channel is None:
            return  # a newer connection owns this record, or already detached
        rec.channel = None
        rec.outbox = None
        if self._closed or rec.state is not ParticipantState.JOINED:
            return
        rec.state = ParticipantState.DISCONNECTED
        rec.disconnect_deadline = self._clock.now() + self.config.session_timeout
        self._emit(
            "participant_disconnected",
            {
                "participant_id": rec.participant_id,
                "deadline": self.config.session_timeout,
            },
        )

    # -------------------------------------------------------------- admission

    def _admit_join(
        self, env: Envelope, channel: Channel
    ) -> tuple[Optional[Envelope], Optional[ParticipantRecord]]:
        def reject(reason: str):
            return Envelope(type="join_rejected", payload={"reason": reason}), None

        if self._closed:
            return reject("closed")
        display_name = env.payload.get("display_name")
        if not isinstance(display_name, str) or not display_name.strip():
            return reject("bad_request")
        display_name = display_name.strip()
        live = [r for r in self._records.values() if r.state is not ParticipantState.LEFT]
        if len(live) >= self.config.capacity:
            return reject("room_full")
        if any(r.display_name == display_name for r in live):
            return reject("name_taken")

        participant_id = secrets.token_hex(8)
        token = issue_token(self.config.secret_key, participant_id, self.room_id)
        rec = ParticipantRecord(
            participant_id=participant_id,
            display_name=display_name,
            state=ParticipantState.JOINED,
            token_id=token.token_id,
            channel=channel,
            outbox=asyncio.Queue(),
        )
        self._records[participant_id] = rec
        self._pending[participant_id] = {}
        # The joiner learns of itself from the snapshot, not from this event.
        self._emit(
            "participant_joined",
            {"participant_id": participant_id, "display_name": display_name},
            exclude=frozenset({participant_id}),
        )
        self._enqueue(
            rec,
            Envelope(
                type="join_accepted",
                payload={
                    "participant_id": participant_id,
                    "token": str(token),
                    "snapshot": self._snapshot(participant_id),
                },
            ),
        )
        return None, rec

    def _admit_rejoin(
        self, env: Envelope, channel: Channel
    ) -> tuple[Optional[Envelope], Optional[ParticipantRecord]]:
        def reject(reason: str):
            return Envelope(type="rejoin_rejected", payload={"reason": reason}), None

        text = env.payload.get("token")
        if not isinstance(text, str):
            return reject("bad_token")
        try:
            token = SessionToken.parse(text)
        except ValueError:
            return reject("bad_token")
        # MAC first: any tampered field fails here, before state is consulted.
        if not verify_token(self.config.secret_key, self.room_id, token):
            return reject("bad_token")
        rec = self._records.get(token.participant_id)
        if rec is None:
            return reject("unknown_participant")
        if rec.token_id != token.token_id:
            return reject("bad_token")  # invalidated (leave/kick) or superseded
        if rec.state is ParticipantState.LEFT:
            return reject("expired" if rec.left_reason == "expired" else "bad_token")
        if rec.state is ParticipantState.JOINED:
            return reject("not_disconnected")
        assert rec.disconnect_deadline is not None
        if self._clock.now() >= rec.disconnect_deadline:
            self._expire(rec)
            return reject("expired")

        rec.state = ParticipantState.JOINED
        rec.channel = channel
        rec.disconnect_deadline = None
        rec.outbox = asyncio.Queue()
        self._emit(
            "participant_rejoined",
            {"participant_id": rec.participant_id},
            exclude=frozenset({rec.participant_id}),
        )
        self._enqueue(
            rec,
            Envelope(
                type="rejoin_accepted",
                payload={"snapshot": self._snapshot(rec.participant_id)},
            ),
        )
        # Held RPCs go out again on the fresh channel, same cid each.
        for cid in sorted(self._pending.get(rec.participant_id, {})):
            request_env, fut = self._pending[rec.participant_id][cid]
            if not fut.done():
                self._enqueue(rec, request_env)
        return None, rec

    # ------------------------------------------------------------- connections

    async def _accept_loop(self, listener: Listener) -> None:
        while True:
            try:
                channel = await listener.accept()
            except (ChannelClosed, TransportError, OSError):
                return
            task = asyncio.create_task(self._handshake(channel))
            self._conn_tasks.add(task)
            task.add_done_callback(self._conn_tasks.discard)

    async def _handshake(self, channel: Channel) -> None:
        try:
            frame = await asyncio.wait_for(channel.recv(), HANDSHAKE_TIMEOUT)
        except (asyncio.TimeoutError, ChannelClosed, TransportError):
            await channel.close()
            return
        if frame is None:
            await channel.close()
            return
        try:
            env = envelope_of(frame)
        except WireError:
            await channel.close()
            return
        if env.type == "join_request":
            reply, rec = self._admit_join(env, channel)
        elif env.type == "rejoin_request":
            reply, rec = self._admit_rejoin(env, channel)
        else:
            reply, rec = Envelope(type="error", payload={"reason": "expected_join"}), None
        if rec is None:
            try:
                await channel.send(frame_for(reply))
            except (ChannelClosed, WireError, TransportError):
                pass
            await channel.close()
            return
        await self._serve(rec, channel)

    async def _serve(self, rec: ParticipantRecord, channel: Channel) -> None:
        writer = asyncio.create_task(self._writer_loop(rec, channel, rec.outbox))
        try:
            while True:
                try:
                    frame = await channel.recv()
                except ChannelClosed:
                    break
                if frame is None:
                    break
                try:
                    env = envelope_of(frame)
                except WireError:
                    logger.warning("malformed frame from %s", rec.participant_id)
                    break
                if not self._dispatch(rec, env):
                    break
        finally:
            writer.cancel()
            await asyncio.gather(writer, return_exceptions=True)
            await channel.close()
            self._handle_channel_drop(rec, channel)

    async def _writer_loop(
        self, rec: ParticipantRecord, channel: Channel, outbox: asyncio.Queue
    ) -> None:
        try:
            while True:
                frame = await outbox.get()
                if frame is None:
                    return
                await channel.send(frame)
        except (ChannelClosed, TransportError, WireError, OSError):
            self._handle_channel_drop(rec, channel)

    def _dispatch(self, rec: ParticipantRecord, env: Envelope) -> bool:
        """Handle one client envelope; False ends the connection."""
        if env.type == "leave":
            self._mark_left(rec, "leave")
            return False
        if env.type == "room_event":
            body = env.payload.get("body")
            if rec.state is not ParticipantState.JOINED or not isinstance(body, dict):
                self._enqueue(rec, Envelope(type="error", payload={"reason": "bad_app_event"}))
                return True
            self._emit("app_event", {"from": rec.participant_id, "data": body})
            return True
        if env.type == "rpc_response":
            pending = self._pending.get(rec.participant_id, {})
            entry = pending.get(env.cid) if env.cid is not None else None
            if entry is None:
                logger.info(
                    "rpc_response with unknown cid %r from %s ignored",
                    env.cid,
                    rec.participant_id,
                )
                return True
            _request, fut = entry
            if not fut.done():
                fut.set_result(env.payload)
            return True
        if env.type in ("join_request", "rejoin_request"):
            self._enqueue(rec, Envelope(type="error", payload={"reason": "already_joined"}))
            return True
        if env.type == "error":
            logger.info("error envelope from %s: %s", rec.participant_id, env.payload)
            return True
        self._enqueue(
            rec,
            Envelope(type="error", payload={"reason": "unsupported_type", "type": env.type}),
        )
        return True

    async def _sweep_loop(self) -> None:
        while True:
            await asyncio.sleep(SWEEP_PERIOD)
            self.sweep_sessions(self._clock.now())


async def open_room(
    config: RoomConfig,
    listeners: list[Listener],
    *,
    clock: Clock = MONOTONIC,
) -> ServerRoom:
    """Construct a room over `listeners` and open it immediately.

    To observe the room_opened event itself, construct ServerRoom
    directly, subscribe, then await room.open().
    """
    room = ServerRoom(config, listeners, clock=clock)
    await room.open()
    return room
