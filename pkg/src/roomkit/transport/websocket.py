"""WebSocket transport (RFC 6455 via the websockets library).

One envelope per text message: the message body is exactly the frame's
JSON payload, with no 4-byte length prefix — the socket's own message
boundaries replace it. Subprotocol `roomkit.v1` is offered and required
on both sides. This is the normative bridge browser clients rely on.
"""

from __future__ import annotations

import asyncio
from typing import Optional

from websockets.asyncio.client import connect as ws_connect
from websockets.asyncio.server import serve as ws_serve
from websockets.exceptions import ConnectionClosed, InvalidHandshake

from ..wire import MAX_PAYLOAD, Frame, OversizeFrame
from .base import (
    AddressInUse,
    Channel,
    ChannelClosed,
    ConnectionRefused,
    ConnectTimeout,
    EndpointAddress,
    Listener,
    TransportError,
)

SUBPROTOCOL = "roomkit.v1"

# Library limit is kept above our cap so the 1 MiB boundary frame passes
# and cap enforcement stays in our code (uniform OversizeFrame behavior).
_LIB_MAX_SIZE = MAX_PAYLOAD + 16384

_CODE_MESSAGE_TOO_BIG = 1009


class WsChannel(Channel):
    def __init__(self, proto, peer: EndpointAddress):
        self._proto = proto
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
            await self._proto.send(frame.payload.decode("utf-8"))
        except ConnectionClosed as exc:
            self._send_closed = True
            raise ChannelClosed(f"peer at {self.peer} went away: {exc}") from exc

    async def recv(self) -> Optional[Frame]:
        if self._recv_done:
            raise ChannelClosed("recv after channel already reported Closed")
        try:
            message = await self._proto.recv()
        except ConnectionClosed as exc:
            self._recv_done = True
            if exc.rcvd is not None and exc.rcvd.code == _CODE_MESSAGE_TOO_BIG:
                raise OversizeFrame("peer sent a message beyond the frame cap") from exc
            return None
        if isinstance(message, str):
            payload = message.encode("utf-8")
        else:
            payload = bytes(message)
        if len(payload) > MAX_PAYLOAD:
            await self.close()
            self._recv_done = True
            raise OversizeFrame(f"peer sent {len(payload)} bytes, cap is {MAX_PAYLOAD}")
        return Frame(payload)

    async def close(self) -> None:
        if self._send_closed:
            return
        self._send_closed = True
        await self._proto.close()


class WsListener(Listener):
    def __init__(self, address: EndpointAddress):
        self.address = address
        self._pending: asyncio.Queue = asyncio.Queue()
        self._server = None
        self._closed = False

    async def _handler(self, proto) -> None:
        remote = proto.remote_address or ("?", 0)
        peer = EndpointAddress("ws", f"{remote[0]}:{remote[1]}")
        channel = WsChannel(proto, peer)
        self._pending.put_nowait(channel)
        # Returning closes the socket, so hold the handler open until the
        # connection actually dies.
        try:
            await proto.wait_closed()
        except ConnectionClosed:
            pass

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
        if self._server is not None:
            self._server.close()
            await self._server.wait_closed()
        self._pending.put_nowait(None)


async def listen(addr: EndpointAddress) -> WsListener:
    host, port = addr.host_port()
    listener = WsListener(addr)
    try:
        server = await ws_serve(
            listener._handler,
            host,
            port,
            subprotocols=[SUBPROTOCOL],
            max_size=_LIB_MAX_SIZE,
        )
    except OSError as exc:
        if exc.errno in (98, 48):
            raise AddressInUse(f"{addr} is already bound") from exc
        raise TransportError(f"cannot bind {addr}: {exc}") from exc
    real_port = next(iter(server.sockets)).getsockname()[1]
    listener._server = server
    listener.address = addr.with_port(real_port)
    return listener


async def connect(addr: EndpointAddress, timeout: float) -> WsChannel:
    host, port = addr.host_port()
    uri = f"ws://{host}:{port}"
    try:
        proto = await asyncio.wait_for(
            ws_connect(uri, subprotocols=[SUBPROTOCOL], max_size=_LIB_MAX_SIZE),
            timeout,
        )
    except asyncio.TimeoutError:
        raise ConnectTimeout(f"connect to {addr} timed out after {timeout}s") from None
    except ConnectionRefusedError as exc:
        raise ConnectionRefused(f"{addr} refused the connection") from exc
    except InvalidHandshake as exc:
        raise ConnectionRefused(f"{addr} rejected the WebSocket handshake: {exc}") from exc
    except OSError as exc:
        raise ConnectionRefused(f"cannot reach {addr}: {exc}") from exc
    return WsChannel(proto, addr)
