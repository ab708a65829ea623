"""In-process transport: deterministic, no sockets, fault-injectable.

Architecturally this plays the role of a second incompatible medium next
to TCP/WebSocket; being in-memory makes disconnect scenarios and contract
tests fully deterministic. Registries are namespace objects so parallel
tests never collide; a process-wide default namespace backs mem://
addresses used by the CLI.
"""

from __future__ import annotations

import asyncio
from typing import Optional

from ..wire import Frame
from .base import (
    SEND_QUEUE_LIMIT,
    AddressInUse,
    Channel,
    ChannelClosed,
    ConnectionRefused,
    EndpointAddress,
    Listener,
    TransportError,
)

_CLOSE = object()  # graceful-close sentinel inside frame queues


class MemNamespace:
    """Registry of live mem listeners, keyed by name."""

    def __init__(self) -> None:
        self._listeners: dict[str, "MemListener"] = {}

    def bind(self, name: str, listener: "MemListener") -> None:
        if name in self._listeners:
            raise AddressInUse(f"mem://{name} is already bound")
        self._listeners[name] = listener

    def unbind(self, name: str) -> None:
        self._listeners.pop(name, None)

    def lookup(self, name: str) -> "MemListener":
        try:
            return self._listeners[name]
        except KeyError:
            raise ConnectionRefused(f"no listener at mem://{name}") from None


DEFAULT_NAMESPACE = MemNamespace()


class MemChannel(Channel):
    def __init__(self, peer: EndpointAddress):
        self.peer = peer
        self._inbox: asyncio.Queue = asyncio.Queue(maxsize=SEND_QUEUE_LIMIT)
        self._other: Optional["MemChannel"] = None
        self._send_closed = False
        self._recv_done = False
        self._faulted = False

    @property
    def is_open(self) -> bool:
        return not self._send_closed

    async def send(self, frame: Frame) -> None:
        if self._send_closed or self._faulted:
            raise ChannelClosed(f"send on closed channel to {self.peer}")
        assert self._other is not None
        await self._other._inbox.put(frame)

    async def recv(self) -> Optional[Frame]:
        if self._recv_done:
            raise ChannelClosed("recv after channel already reported Closed")
        if self._faulted and self._inbox.empty():
            self._recv_done = True
            return None
        item = await self._inbox.get()
        if item is _CLOSE:
            self._recv_done = True
            return None
        return item

    async def close(self) -> None:
        if self._send_closed:
            return
        self._send_closed = True
        assert self._other is not None
        # Peer drains pending frames, then sees Closed.
        await self._other._inbox.put(_CLOSE)

    def _inject_fault(self) -> None:
        """Drop the link: in-flight frames are lost, both ends see Closed."""
        for ch in (self, self._other):
            assert ch is not None
            ch._faulted = True
            ch._send_closed = True
            while not ch._inbox.empty():
                ch._inbox.get_nowait()
            ch._inbox.put_nowait(_CLOSE)


def simulate_fault(channel: Channel) -> None:
    """Abrupt-disconnect injection; only the mem transport supports it."""
    if not isinstance(channel, MemChannel):
        raise TransportError(
            f"fault injection is only supported on mem channels, not {channel.peer.scheme}"
        )
    channel._inject_fault()


class MemListener(Listener):
    def __init__(self, address: EndpointAddress, namespace: MemNamespace):
        self.address = address
        self._namespace = namespace
        self._pending: asyncio.Queue = asyncio.Queue()
        self._closed = False

    async def accept(self) -> Channel:
        if self._closed:
            raise TransportError(f"listener {self.address} is closed")
        ch = await self._pending.get()
        if ch is _CLOSE:
            raise TransportError(f"listener {self.address} is closed")
        return ch

    async def close(self) -> None:
        if self._closed:
            return
        self._closed = True
        self._namespace.unbind(self.address.target)
        self._pending.put_nowait(_CLOSE)

    def _offer(self, server_side: MemChannel) -> None:
        if self._closed:
            raise ConnectionRefused(f"listener at {self.address} is closed")
        self._pending.put_nowait(server_side)


def listen(addr: EndpointAddress, namespace: MemNamespace) -> MemListener:
    listener = MemListener(addr, namespace)
    namespace.bind(addr.target, listener)
    return listener


def connect(addr: EndpointAddress, namespace: MemNamespace) -> MemChannel:
    listener = namespace.lookup(addr.target)
    client_side = MemChannel(peer=addr)
    server_side = MemChannel(peer=EndpointAddress("mem", f"{addr.target}#client"))
    client_side._other = server_side
    server_side._other = client_side
    listener._offer(server_side)
    return client_side
