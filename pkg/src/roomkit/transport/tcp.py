"""TCP transport: length-prefixed frames over asyncio streams."""

from __future__ import annotations

import asyncio
import struct
from typing import Optional

from ..wire import MAX_PAYLOAD, Frame, OversizeFrame
from .base import (
    AddressInUse,
    Channel,
    ChannelClosed,
    ConnectionRefused,
    EndpointAddress,
    Listener,
    TransportError,
)

_LEN = struct.Struct(">I")


class TcpChannel(Channel):
    def __init__(
        self,
        reader: asyncio.StreamReader,
        writer: asyncio.StreamWriter,
        peer: EndpointAddress,
    ):
        self._reader = reader
        self._writer = writer
        self.peer = peer
        self._send_closed = False
        self._recv_done = False

    @property
    def is_open(self) -> bool:
        return not self._send_closed

    async def send(self, frame: Frame) -> None:
        if self._send_closed:
            raise ChannelClosed(f"send on closed channel to {self.peer}")
        try:
            self._writer.write(_LEN.pack(frame.length) + frame.payload)
            await self._writer.drain()
        except (ConnectionError, OSError) as exc:
            self._send_closed = True
            raise ChannelClosed(f"peer at {self.peer} went away: {exc}") from exc

    async def recv(self) -> Optional[Frame]:
        if self._recv_done:
            raise ChannelClosed("recv after channel already reported Closed")
        try:
            prefix = await self._reader.readexactly(_LEN.size)
        except asyncio.IncompleteReadError:
            self._recv_done = True
            return None
        except (ConnectionError, OSError):
            self._recv_done = True
            return None
        (length,) = _LEN.unpack(prefix)
        if length > MAX_PAYLOAD:
            await self.close()
            self._recv_done = True
            raise OversizeFrame(f"peer declared {length}-byte payload, cap is {MAX_PAYLOAD}")
        try:
            payload = await self._reader.readexactly(length)
        except (asyncio.IncompleteReadError, ConnectionError, OSError):
            self._recv_done = True
            return None
        return Frame(payload)

    async def close(self) -> None:
        if self._send_closed:
            return
        self._send_closed = True
        try:
            self._writer.close()
            await self._writer.wait_closed()
        except (ConnectionError, OSError):
            pass


class TcpListener(Listener):
    def __init__(self, server: asyncio.base_events.Server, address: EndpointAddress):
        self._server = server
        self.address = address
        self._pending: asyncio.Queue = asyncio.Queue()
        self._closed = False

    def _on_connection(self, reader: asyncio.StreamReader, writer: asyncio.StreamWriter) -> None:
        peername = writer.get_extra_info("peername") or ("?", 0)
        peer = EndpointAddress("tcp", f"{peername[0]}:{peername[1]}")
        self._pending.put_nowait(TcpChannel(reader, writer, peer))

    async def accept(self) -> Channel:
        if self._closed:
            raise TransportError(f"listener {self.address} is closed")
        ch = await self._pending.get()
        if ch is None:
            raise TransportError(f"listener {self.address} is closed")
        return ch

    async def close(self) -> None:
        if self._closed:
            return
        self._closed = True
        self._server.close()
        await self._server.wait_closed()
        self._pending.put_nowait(None)


async def listen(addr: EndpointAddress) -> TcpListener:
    host, port = addr.host_port()
    listener_box: list[TcpListener] = []

    def on_conn(reader: asyncio.StreamReader, writer: asyncio.StreamWriter) -> None:
        listener_box[0]._on_connection(reader, writer)

    try:
        server = await asyncio.start_server(on_conn, host, port)
    except OSError as exc:
        if exc.errno in (98, 48):  # EADDRINUSE linux/mac
            raise AddressInUse(f"{addr} is already bound") from exc
        raise TransportError(f"cannot bind {addr}: {exc}") from exc
    real_port = server.sockets[0].getsockname()[1]
    listener = TcpListener(server, addr.with_port(real_port))
    listener_box.append(listener)
    return listener


async def connect(addr: EndpointAddress, timeout: float) -> TcpChannel:
    host, port = addr.host_port()
    try:
        reader, writer = await asyncio.wait_for(
            asyncio.open_connection(host, port), timeout
        )
    except asyncio.TimeoutError:
        raise ConnectionRefused(f"connect to {addr} timed out after {timeout}s") from None
    except ConnectionRefusedError as exc:
        raise ConnectionRefused(f"{addr} refused the connection") from exc
    except OSError as exc:
        raise ConnectionRefused(f"cannot reach {addr}: {exc}") from exc
    return TcpChannel(reader, writer, addr)
