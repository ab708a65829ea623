"""Transport-neutral addresses, channels, and listeners.

A Channel is a reliable, ordered, duplex pipe for whole frames: no
duplication, no reordering, no silent loss while open, and close is a
distinct terminal event observable by both ends. Code above this layer
cannot tell which scheme it is running on except by reading the
EndpointAddress.

Concurrency: one task may drive a channel's send side while another
drives its recv side; a single side must not be driven by two tasks.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Optional

from ..wire import Frame

SCHEMES = ("mem", "tcp", "ws")

CONNECT_TIMEOUT = 5.0
SEND_QUEUE_LIMIT = 256  # mem per-channel bound; tcp/ws bound via socket backpressure


class TransportError(Exception):
    pass


class UnsupportedScheme(TransportError):
    pass


class AddressInUse(TransportError):
    pass


class ConnectionRefused(TransportError):
    pass


class ConnectTimeout(TransportError):
    pass


class ChannelClosed(TransportError):
    """Send after close, or recv after Closed was already delivered."""


_ADDR_RE = re.compile(r"^([a-z][a-z0-9+.-]*)://(.+)$")


@dataclass(frozen=True)
class EndpointAddress:
    """scheme://target. target is host:port for tcp/ws, a registry name for mem."""

    scheme: str
    target: str

    def __str__(self) -> str:
        return f"{self.scheme}://{self.target}"

    @classmethod
    def parse(cls, text: str) -> "EndpointAddress":
        m = _ADDR_RE.match(text.strip())
        if not m:
            raise ValueError(f"not an endpoint address: {text!r}")
        return cls(scheme=m.group(1), target=m.group(2))

    def host_port(self) -> tuple[str, int]:
        host, sep, port = self.target.rpartition(":")
        if not sep:
            raise ValueError(f"address {self} has no port")
        return host, int(port)

    def with_port(self, port: int) -> "EndpointAddress":
        host, _ = self.host_port()
        return EndpointAddress(self.scheme, f"{host}:{port}")


class Channel:
    """Abstract duplex frame pipe. Concrete transports subclass this."""

    peer: EndpointAddress

    @property
    def is_open(self) -> bool:
        raise NotImplementedError

    async def send(self, frame: Frame) -> None:
        """Queue one frame for in-order delivery. ChannelClosed after close."""
        raise NotImplementedError

    async def recv(self) -> Optional[Frame]:
        """Next frame, or None exactly once when the channel is closed.

        Raises ChannelClosed if called again after None was returned.
        """
        raise NotImplementedError

    async def close(self) -> None:
        """Graceful close; already-sent frames still drain to the peer."""
        raise NotImplementedError


class Listener:
    """Bound acceptor; accept() yields channels in connection-arrival order."""

    address: EndpointAddress

    async def accept(self) -> Channel:
        raise NotImplementedError

    async def close(self) -> None:
        raise NotImplementedError
