"""Room advertising and scanning over independent media.

A room announces itself by emitting a beacon on every configured medium
once per interval; a scanner listens on one medium for a window and
returns the live advertisements it heard, deduplicated by room_id
(newest beacon wins) and sorted by room_name. Media are fully
independent: a scanner on medium M sees a room iff the room advertises
on M.

UDP beacons are datagrams of 5 ASCII magic bytes `CVEB1` followed by the
advertisement as JSON (which carries the beacon interval so scanners can
age entries out at 3x interval). Datagrams are capped at 1200 bytes —
exceeding it is a hard error at advertise time. Beacons go to the
broadcast address and to 127.0.0.1 (broadcast loopback delivery is not
guaranteed on all stacks; scanners dedupe, so the extra copy is
invisible).

The mem medium is a registry bus mirroring the mem transport's
namespacing, for deterministic tests and in-process discovery.
"""

from __future__ import annotations

import asyncio
import json
import logging
import socket
from dataclasses import dataclass, field, replace
from typing import Callable, Optional, Union

from .clock import MONOTONIC, Clock
from .transport import EndpointAddress

logger = logging.getLogger(__name__)

MAGIC = b"CVEB1"
DEFAULT_UDP_PORT = 45454
MAX_DATAGRAM = 1200
MIN_INTERVAL = 0.1
DEFAULT_INTERVAL = 1.0
DEFAULT_WINDOW = 3.0
EXPIRY_FACTOR = 3.0


class DiscoveryError(Exception):
    pass


class MediumUnavailable(DiscoveryError):
    pass


class AdvertisementTooLarge(DiscoveryError):
    pass


@dataclass(frozen=True)
class RoomAdvertisement:
    room_id: str
    room_name: str
    app_tag: str
    endpoints: tuple[EndpointAddress, ...]
    protocol_version: int
    capacity: int
    occupied: int

    def __post_init__(self) -> None:
        if not self.endpoints:
            raise ValueError("advertisement needs at least one endpoint")
        if len(self.room_name.encode("utf-8")) > 64:
            raise ValueError("room_name exceeds 64 UTF-8 bytes")
        if self.occupied > self.capacity:
            raise ValueError("occupied exceeds capacity")

    def to_json(self, interval: float) -> dict:
        return {
            "room_id": self.room_id,
            "room_name": self.room_name,
            "app_tag": self.app_tag,
            "endpoints": [str(e) for e in self.endpoints],
            "protocol_version": self.protocol_version,
            "capacity": self.capacity,
            "occupied": self.occupied,
            "interval": interval,
        }

    @classmethod
    def from_json(cls, obj: dict) -> tuple["RoomAdvertisement", float]:
        ad = cls(
            room_id=obj["room_id"],
            room_name=obj["room_name"],
            app_tag=obj["app_tag"],
            endpoints=tuple(EndpointAddress.parse(e) for e in obj["endpoints"]),
            protocol_version=int(obj["protocol_version"]),
            capacity=int(obj["capacity"]),
            occupied=int(obj["occupied"]),
        )
        return ad, float(obj.get("interval", DEFAULT_INTERVAL))


def encode_beacon(ad: RoomAdvertisement, interval: float) -> bytes:
    data = MAGIC + json.dumps(ad.to_json(interval), separators=(",", ":")).encode("utf-8")
    if len(data) > MAX_DATAGRAM:
        raise AdvertisementTooLarge(
            f"beacon is {len(data)} bytes, datagram cap is {MAX_DATAGRAM}"
        )
    return data


def decode_beacon(data: bytes) -> Optional[tuple[RoomAdvertisement, float]]:
    """None for foreign traffic (bad magic) or malformed beacons."""
    if not data.startswith(MAGIC):
        return None
    try:
        return RoomAdvertisement.from_json(json.loads(data[len(MAGIC):].decode("utf-8")))
    except (ValueError, KeyError, TypeError):
        return None


class MemDiscoveryBus:
    """In-process beacon registry: room_id -> (ad, interval, stamp)."""

    def __init__(self, clock: Clock = MONOTONIC):
        self.clock = clock
        self._entries: dict[str, tuple[RoomAdvertisement, float, float]] = {}

    def emit(self, ad: RoomAdvertisement, interval: float) -> None:
        self._entries[ad.room_id] = (ad, interval, self.clock.now())

    def live(self) -> list[RoomAdvertisement]:
        now = self.clock.now()
        out = []
        for ad, interval, stamp in self._entries.values():
            if now - stamp <= EXPIRY_FACTOR * interval:
                out.append(ad)
        return out


DEFAULT_BUS = MemDiscoveryBus()


@dataclass
class MemMedium:
    bus: MemDiscoveryBus = field(default_factory=lambda: DEFAULT_BUS)

    name = "mem"


@dataclass
class UdpMedium:
    port: int = DEFAULT_UDP_PORT
    clock: Clock = field(default_factory=lambda: MONOTONIC)

    name = "udp"


AdvertiseMedium = Union[MemMedium, UdpMedium]


def parse_medium(text: str) -> AdvertiseMedium:
    if text == "mem":
        return MemMedium()
    if text == "udp":
        return UdpMedium()
    if text.startswith("udp:"):
        return UdpMedium(port=int(text.split(":", 1)[1]))
    raise ValueError(f"unknown discovery medium {text!r}")


class _UdpSender:
    def __init__(self, port: int):
        self.port = port
        sock = socket.socket(socket.AF_INET, socket.SOCK_DGRAM)
        sock.setsockopt(socket.SOL_SOCKET, socket.SO_BROADCAST, 1)
        sock.setblocking(False)
        self._sock = sock

    def emit(self, data: bytes) -> None:
        for target in ("255.255.255.255", "127.0.0.1"):
            try:
                self._sock.sendto(data, (target, self.port))
            except OSError as exc:
                logger.warning("udp beacon to %s:%d failed: %s", target, self.port, exc)

    def close(self) -> None:
        self._sock.close()


class AdvertiserHandle:
    """Periodic beacon emitter; stop() ends it within one interval."""

    def __init__(self, ad, media, interval, occupied_source):
        self._ad = ad
        self._interval = interval
        self._occupied_source = occupied_source
        self.errors: list[str] = []
        self._senders: list[tuple[AdvertiseMedium, Optional[_UdpSender]]] = []
        for medium in media:
            if isinstance(medium, UdpMedium):
                try:
                    self._senders.append((medium, _UdpSender(medium.port)))
                except OSError as exc:
                    self.errors.append(f"udp medium unavailable: {exc}")
                    logger.warning("udp medium unavailable: %s", exc)
            else:
                self._senders.append((medium, None))
        self._task: Optional[asyncio.Task] = None
        self._stopped = asyncio.Event()

    def start(self) -> None:
        self._emit_once()  # first beacon lands before advertise() returns
        self._task = asyncio.create_task(self._run())

    def _current_ad(self) -> RoomAdvertisement:
        if self._occupied_source is not None:
            occ = min(self._occupied_source(), self._ad.capacity)
            self._ad = replace(self._ad, occupied=occ)
        return self._ad

    def _emit_once(self) -> None:
        ad = self._current_ad()
        for medium, sender in self._senders:
            if isinstance(medium, MemMedium):
                medium.bus.emit(ad, self._interval)
            elif sender is not None:
                sender.emit(encode_beacon(ad, self._interval))

    async def _run(self) -> None:
        try:
            while True:
                try:
                    await asyncio.wait_for(self._stopped.wait(), self._interval)
                    return
                except asyncio.TimeoutError:
                    self._emit_once()
        finally:
            for _, sender in self._senders:
                if sender is not None:
                    sender.close()

    async def stop(self) -> None:
        self._stopped.set()
        if self._task is not None:
            await self._task


async def advertise(
    ad: RoomAdvertisement,
    media: list[AdvertiseMedium],
    interval: float = DEFAULT_INTERVAL,
    *,
    occupied_source: Optional[Callable[[], int]] = None,
) -> AdvertiserHandle:
    """Start beaconing `ad` on every medium, refreshing occupancy each emission."""
    if not media:
        raise ValueError("need at least one advertise medium")
    if interval < MIN_INTERVAL:
        raise ValueError(f"interval {interval}s below minimum {MIN_INTERVAL}s")
    encode_beacon(ad, interval)  # size check is a hard error up front
    handle = AdvertiserHandle(ad, media, interval, occupied_source)
    handle.start()
    return handle


class _ScanProtocol(asyncio.DatagramProtocol):
    def __init__(self, sink):
        self._sink = sink

    def datagram_received(self, data: bytes, addr) -> None:
        decoded = decode_beacon(data)
        if decoded is not None:
            self._sink(decoded)


async def scan(
    medium: AdvertiseMedium, window: float = DEFAULT_WINDOW
) -> list[RoomAdvertisement]:
    """Listen on one medium for `window` seconds; return live ads by room_name."""
    if isinstance(medium, MemMedium):
        return await _scan_mem(medium, window)
    return await _scan_udp(medium, window)


async def _scan_mem(medium: MemMedium, window: float) -> list[RoomAdvertisement]:
    found: dict[str, RoomAdvertisement] = {}
    deadline = asyncio.get_running_loop().time() + window
    while True:
        for ad in medium.bus.live():
            found[ad.room_id] = ad
        remaining = deadline - asyncio.get_running_loop().time()
        if remaining <= 0:
            break
        await asyncio.sleep(min(0.05, remaining))
    return sorted(found.values(), key=lambda a: a.room_name)


async def _scan_udp(medium: UdpMedium, window: float) -> list[RoomAdvertisement]:
    loop = asyncio.get_running_loop()
    heard: dict[str, tuple[RoomAdvertisement, float, float]] = {}

    def sink(decoded: tuple[RoomAdvertisement, float]) -> None:
        ad, interval = decoded
        heard[ad.room_id] = (ad, interval, medium.clock.now())

    sock = socket.socket(socket.AF_INET, socket.SOCK_DGRAM)
    sock.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
    if hasattr(socket, "SO_REUSEPORT"):
        sock.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEPORT, 1)
    try:
        sock.bind(("", medium.port))
    except OSError as exc:
        sock.close()
        raise MediumUnavailable(f"cannot bind udp port {medium.port}: {exc}") from exc
    transport, _ = await loop.create_datagram_endpoint(
        lambda: _ScanProtocol(sink), sock=sock
    )
    try:
        await asyncio.sleep(window)
    finally:
        transport.close()
    now = medium.clock.now()
    live = [
        ad
        for ad, interval, stamp in heard.values()
        if now - stamp <= EXPIRY_FACTOR * interval
    ]
    return sorted(live, key=lambda a: a.room_name)
