"""Shared room-test fixtures: an in-memory room with join helpers."""

import asyncio
import itertools
from contextlib import asynccontextmanager

from roomkit.cardgame import game_event_of
from roomkit.room import ClientRoom, RoomConfig, ServerRoom, client_join, client_rejoin
from roomkit.transport import EndpointAddress, MemNamespace, connect, listen
from roomkit.wire import envelope_of

_ids = itertools.count()


class RoomCtx:
    def __init__(self, room, address, namespace):
        self.room = room
        self.address = address
        self.namespace = namespace

    async def channel(self):
        return await connect(self.address, namespace=self.namespace)

    async def join(self, name: str) -> ClientRoom:
        return await client_join(await self.channel(), name)

    async def rejoin(self, token: str) -> ClientRoom:
        return await client_rejoin(await self.channel(), token)


@asynccontextmanager
async def mem_room(clock=None, *, capacity=4, session_timeout=60.0, room_name="sala"):
    namespace = MemNamespace()
    address = EndpointAddress("mem", f"room{next(_ids)}")
    listener = await listen(address, namespace=namespace)
    config = RoomConfig(
        room_name=room_name, capacity=capacity, session_timeout=session_timeout
    )
    kwargs = {} if clock is None else {"clock": clock}
    room = ServerRoom(config, [listener], **kwargs)
    await room.open()
    try:
        yield RoomCtx(room, address, namespace)
    finally:
        await room.close()


async def wait_variant(sub, variant, timeout=5.0):
    while True:
        event = await sub.next_event(timeout)
        assert event is not None, f"stream ended while waiting for {variant}"
        if event.variant == variant:
            return event


async def next_of_type(channel, env_type, timeout=5.0):
    while True:
        frame = await asyncio.wait_for(channel.recv(), timeout)
        assert frame is not None, f"channel closed while waiting for {env_type}"
        env = envelope_of(frame)
        if env.type == env_type:
            return env


async def game_stream(sub, timeout=5.0):
    """Collect (variant, to, event) game traffic up to and including game_over."""
    seen = []
    while True:
        event = await sub.next_event(timeout)
        assert event is not None, "room stream ended before game_over"
        if event.variant == "anomaly_detected":
            seen.append(("anomaly_detected", None, event.body))
            continue
        if event.variant != "app_event":
            continue
        game = game_event_of(event.body.get("data"))
        if game is None:
            continue
        seen.append(("app_event", event.body.get("to"), game))
        if game.get("type") == "game_over":
            return seen
