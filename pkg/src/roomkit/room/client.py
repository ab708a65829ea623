"""Client side of a room: the proxy that hides all wire detail.

client_join / client_rejoin perform the handshake on an open channel
and hand back a ClientRoom. The proxy offers exactly what application
code needs — send application payloads, answer RPCs, subscribe to the
event stream, leave — and nothing transport-shaped: code written
against ClientRoom behaves identically on mem, tcp, and ws channels.

Incoming rpc_request envelopes are answered by the registered handler
(set_rpc_handler); requests arriving before a handler is installed are
buffered and replayed, so a caller may join first and wire up its move
logic a tick later without losing the first request. One writer task
serializes all outgoing frames, making ClientRoom safe to share between
a sending task and the observer dispatch.

Subscribe immediately after join (before the next await) to observe
every post-snapshot event; the snapshot's `seq` is the subscription
point and events always arrive in ascending seq order.
"""

from __future__ import annotations

import asyncio
import logging
from typing import Awaitable, Callable, Optional

from ..transport import Channel, ChannelClosed, TransportError
from ..wire import Envelope, WireError, envelope_of, frame_for
from .events import RoomEvent, Subscription
from .server import RoomError

logger = logging.getLogger(__name__)

RpcHandler = Callable[[str, dict], Awaitable[dict]]


class JoinRejected(RoomError):
    def __init__(self, reason: str):
        super().__init__(f"join rejected: {reason}")
        self.reason = reason


class RejoinRejected(RoomError):
    def __init__(self, reason: str):
        super().__init__(f"rejoin rejected: {reason}")
        self.reason = reason


class ClientRoom:
    def __init__(self, channel: Channel, participant_id: str, token: str, snapshot: dict):
        self.participant_id = participant_id
        self.token = token
        self.snapshot = snapshot
        self.last_seq = int(snapshot.get("seq", 0))
        self._channel = channel
        self._subs: list[Subscription] = []
        self._rpc_handler: Optional[RpcHandler] = None
        self._queued_requests: list[Envelope] = []
        self._handler_tasks: set[asyncio.Task] = set()
        self._outbox: asyncio.Queue = asyncio.Queue()
        self._closed = asyncio.Event()
        self._leaving = False
        self._reader = asyncio.create_task(self._read_loop())
        self._writer = asyncio.create_task(self._write_loop())

    # ---------------------------------------------------------------- surface

    @property
    def room_id(self) -> str:
        return self.snapshot.get("room_id", "")

    @property
    def room_name(self) -> str:
        return self.snapshot.get("room_name", "")

    @property
    def is_open(self) -> bool:
        return not self._closed.is_set()

    def subscribe(self) -> Subscription:
        sub = Subscription()
        if not self.is_open:
            sub.close()
        else:
            self._subs.append(sub)
        return sub

    def set_rpc_handler(self, handler: RpcHandler) -> None:
        self._rpc_handler = handler
        queued, self._queued_requests = self._queued_requests, []
        for env in queued:
            self._spawn_rpc(env)

    async def send(self, payload: dict) -> None:
        """Publish an application payload to the whole room (echoed back too)."""
        self._require_open()
        self._outbox.put_nowait(
            Envelope(type="room_event", sender=self.participant_id, payload={"body": payload})
        )

    async def respond(self, cid: int, result: dict) -> None:
        self._require_open()
        self._outbox.put_nowait(
            Envelope(type="rpc_response", cid=cid, sender=self.participant_id, payload=result)
        )

    async def leave(self) -> None:
        """Graceful exit: tells the room, which invalidates the token."""
        if not self.is_open:
            return
        self._leaving = True
        self._outbox.put_nowait(Envelope(type="leave", sender=self.participant_id))
        self._outbox.put_nowait(None)  # writer flushes then stops
        await self._writer
        await self._channel.close()
        await self.wait_closed()

    async def close(self) -> None:
        """Drop the connection without leaving; the room marks us Disconnected."""
        await self._channel.close()
        await self.wait_closed()

    async def wait_closed(self) -> None:
        await self._closed.wait()

    # --------------------------------------------------------------- plumbing

    def _require_open(self) -> None:
        if not self.is_open or self._leaving:
            raise RoomError("room connection is closed")

    async def _write_loop(self) -> None:
        try:
            while True:
                env = await self._outbox.get()
                if env is None:
                    return
                await self._channel.send(frame_for(env))
        except (ChannelClosed, TransportError, WireError, OSError):
            pass

    async def _read_loop(self) -> None:
        try:
            while True:
                try:
                    frame = await self._channel.recv()
                except ChannelClosed:
                    break
                if frame is None:
                    break
                try:
                    env = envelope_of(frame)
                except WireError:
                    logger.warning("malformed frame from room; closing")
                    break
                self._dispatch(env)
        finally:
            self._finish()

    def _dispatch(self, env: Envelope) -> None:
        if env.type == "room_event":
            try:
                event = RoomEvent.from_payload(env.payload)
            except (KeyError, ValueError):
                logger.warning("bad room_event payload ignored: %r", env.payload)
                return
            if event.seq <= self.last_seq:
                logger.warning(
                    "non-monotonic event seq %d (last %d) ignored", event.seq, self.last_seq
                )
                return
            self.last_seq = event.seq
            for sub in list(self._subs):
                sub.deliver(event)
                if not sub.is_open:
                    self._subs.remove(sub)
        elif env.type == "rpc_request":
            if self._rpc_handler is None:
                self._queued_requests.append(env)
            else:
                self._spawn_rpc(env)
        elif env.type == "error":
            logger.info("error from room: %s", env.payload)
            for sub in list(self._subs):
                sub.deliver(RoomEvent(seq=self.last_seq, variant="error", body=env.payload))
        else:
            logger.info("unexpected envelope type %r ignored", env.type)

    def _spawn_rpc(self, env: Envelope) -> None:
        async def run() -> None:
            method = env.payload.get("method", "")
            params = env.payload.get("params", {})
            try:
                result = await self._rpc_handler(method, params)
            except Exception:
                logger.exception("rpc handler failed for method %r", method)
                return
            try:
                await self.respond(env.cid, result)
            except RoomError:
                pass  # connection died; the room will re-send after rejoin

        task = asyncio.create_task(run())
        self._handler_tasks.add(task)
        task.add_done_callback(self._handler_tasks.discard)

    def _finish(self) -> None:
        if self._closed.is_set():
            return
        self._closed.set()
        self._outbox.put_nowait(None)
        # Release the server's reader too: without this our send side would
        # stay open and the room would not observe the disconnect.
        asyncio.create_task(self._channel.close())
        for sub in self._subs:
            sub.close()
        self._subs.clear()


async def _handshake(channel: Channel, request: Envelope) -> Envelope:
    try:
        await channel.send(frame_for(request))
        frame = await channel.recv()
    except (ChannelClosed, TransportError) as exc:
        await channel.close()
        raise RoomError(f"connection failed during handshake: {exc}") from exc
    if frame is None:
        await channel.close()
        raise RoomError("connection closed during handshake")
    try:
        return envelope_of(frame)
    except WireError as exc:
        await channel.close()
        raise RoomError(f"bad handshake reply: {exc}") from exc


async def client_join(channel: Channel, display_name: str) -> ClientRoom:
    reply = await _handshake(
        channel, Envelope(type="join_request", payload={"display_name": display_name})
    )
    if reply.type == "join_rejected":
        await channel.close()
        raise JoinRejected(reply.payload.get("reason", "unknown"))
    if reply.type != "join_accepted":
        await channel.close()
        raise RoomError(f"unexpected handshake reply {reply.type!r}")
    payload = reply.payload
    return ClientRoom(
        channel,
        participant_id=payload["participant_id"],
        token=payload["token"],
        snapshot=payload["snapshot"],
    )


async def client_rejoin(channel: Channel, token: str) -> ClientRoom:
    reply = await _handshake(
        channel, Envelope(type="rejoin_request", payload={"token": token})
    )
    if reply.type == "rejoin_rejected":
        await channel.close()
        raise RejoinRejected(reply.payload.get("reason", "unknown"))
    if reply.type != "rejoin_accepted":
        await channel.close()
        raise RoomError(f"unexpected handshake reply {reply.type!r}")
    participant_id = token.split(".")[1] if token.count(".") == 2 else ""
    return ClientRoom(
        channel,
        participant_id=participant_id,
        token=token,
        snapshot=reply.payload["snapshot"],
    )
