"""Transport factory: pick the concrete transport by address scheme.

listen()/connect() accept `mem://name`, `tcp://host:port`, or
`ws://host:port` (string or EndpointAddress) and return scheme-agnostic
Listener/Channel values. Port 0 asks the OS for a port; the listener's
address reports the real one.
"""

from __future__ import annotations

from typing import Optional, Union

from .base import (
    CONNECT_TIMEOUT,
    SCHEMES,
    AddressInUse,
    Channel,
    ChannelClosed,
    ConnectionRefused,
    ConnectTimeout,
    EndpointAddress,
    Listener,
    TransportError,
    UnsupportedScheme,
)
from .memory import DEFAULT_NAMESPACE, MemNamespace, simulate_fault
from . import memory, tcp, websocket

__all__ = [
    "AddressInUse",
    "Channel",
    "ChannelClosed",
    "ConnectionRefused",
    "ConnectTimeout",
    "CONNECT_TIMEOUT",
    "EndpointAddress",
    "Listener",
    "MemNamespace",
    "SCHEMES",
    "TransportError",
    "UnsupportedScheme",
    "connect",
    "listen",
    "simulate_fault",
]


def _as_address(addr: Union[str, EndpointAddress]) -> EndpointAddress:
    if isinstance(addr, EndpointAddress):
        return addr
    return EndpointAddress.parse(addr)


async def listen(
    addr: Union[str, EndpointAddress],
    *,
    namespace: Optional[MemNamespace] = None,
) -> Listener:
    address = _as_address(addr)
    if address.scheme == "mem":
        return memory.listen(address, namespace or DEFAULT_NAMESPACE)
    if address.scheme == "tcp":
        return await tcp.listen(address)
    if address.scheme == "ws":
        return await websocket.listen(address)
    raise UnsupportedScheme(f"no transport for scheme {address.scheme!r}")


async def connect(
    addr: Union[str, EndpointAddress],
    *,
    timeout: float = CONNECT_TIMEOUT,
    namespace: Optional[MemNamespace] = None,
) -> Channel:
    address = _as_address(addr)
    if address.scheme == "mem":
        return memory.connect(address, namespace or DEFAULT_NAMESPACE)
    if address.scheme == "tcp":
        return await tcp.connect(address, timeout)
    if address.scheme == "ws":
        return await websocket.connect(address, timeout)
    raise UnsupportedScheme(f"no transport for scheme {address.scheme!r}")
