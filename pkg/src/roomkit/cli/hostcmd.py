"""The `host` command: bind transports, advertise, seat four players,
run one Tressette match, report, exit.

Seating is registration order: the hosting player (when `--play` asks
for hosting-player mode) takes seat 0, in-process bots come next, and
remote joiners fill the rest in join order. Bots are not special on
the wire — each one joins the room as a real client over an internal
mem listener and answers move requests like any remote player, so the
room's occupancy, advertisements, and event traffic stay truthful.

The HTTP bridge starts before the room opens (answering 503 until it
is open) and aggregates /rooms from this room's own advertisement plus
whatever other hosts' beacons were heard on the advertise media within
the last HEARD_TTL seconds — that is how two hosts on one segment list
each other.

Exit code contract: 0 clean match, 1 bind/environment failure, 2
aborted match.
"""

from __future__ import annotations

import asyncio
import secrets
import sys
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional, TextIO

from ..cardgame import DEFAULT_MOVE_TIMEOUT, RemoteEndpoint, attach_player
from ..discovery import (
    DEFAULT_INTERVAL,
    AdvertisementTooLarge,
    MediumUnavailable,
    MemMedium,
    RoomAdvertisement,
    UdpMedium,
    advertise,
    parse_medium,
    scan,
)
from ..room import DEFAULT_SESSION_TIMEOUT, RoomConfig, ServerRoom, client_join
from ..transport import EndpointAddress, TransportError, connect, listen
from ..tressette import SEATS, bot_choose, run_match
from .httpd import HttpBridge
from .terminal import TerminalPlayer, pump_stdin

HEARD_TTL = 3.0
PROTOCOL_VERSION = 1


@dataclass
class HostOptions:
    room_name: str = "tressette"
    transports: tuple[str, ...] = ("tcp://0.0.0.0:4700", "ws://0.0.0.0:4701")
    advertise_media: tuple[str, ...] = ("udp",)
    session_timeout: float = DEFAULT_SESSION_TIMEOUT
    seed: Optional[int] = None
    coordinator_mode: str = "standalone"  # "standalone" | "hosting-player"
    http_port: Optional[int] = 4702  # None disables the HTTP bridge
    bots: int = 0
    web_root: Optional[str] = None
    move_timeout: float = DEFAULT_MOVE_TIMEOUT

    def __post_init__(self) -> None:
        if not self.transports:
            raise ValueError("need at least one transport to host on")
        local = self.bots + (1 if self.coordinator_mode == "hosting-player" else 0)
        if local > SEATS:
            raise ValueError(f"{local} local seats exceed the {SEATS}-seat table")


@dataclass
class _Heard:
    """Advertisements overheard from other hosts, aged out after HEARD_TTL."""

    entries: dict = field(default_factory=dict)  # room_id -> (ad, stamp)

    def note(self, ad: RoomAdvertisement, now: float) -> None:
        self.entries[ad.room_id] = (ad, now)

    def live(self, now: float) -> list[RoomAdvertisement]:
        return [ad for ad, stamp in self.entries.values() if now - stamp <= HEARD_TTL]


async def _heard_loop(media: list, heard: _Heard) -> None:
    loop = asyncio.get_running_loop()
    while True:
        for medium in media:
            try:
                for ad in await scan(medium, window=1.0):
                    heard.note(ad, loop.time())
            except MediumUnavailable:
                await asyncio.sleep(1.0)


async def cmd_host(
    opts: HostOptions,
    *,
    stdin: Optional[TextIO] = None,
    out: Optional[TextIO] = None,
) -> int:
    out = out if out is not None else sys.stdout

    def say(text: str) -> None:
        out.write(text + "\n")
        out.flush()

    hosting_player = opts.coordinator_mode == "hosting-player"
    local_seats = opts.bots + (1 if hosting_player else 0)

    # ---- bind every requested transport, plus an internal one for bots
    listeners = []
    try:
        for spec in opts.transports:
            listeners.append(await listen(spec))
    except (OSError, TransportError, ValueError) as exc:
        say(f"cannot bind {spec}: {exc}")
        for listener in listeners:
            await listener.close()
        return 1
    public_endpoints = tuple(listener.address for listener in listeners)
    internal = None
    if local_seats:
        internal = await listen(
            EndpointAddress("mem", f"host-internal-{secrets.token_hex(4)}")
        )
        listeners.append(internal)

    config = RoomConfig(
        room_name=opts.room_name,
        capacity=SEATS,
        session_timeout=opts.session_timeout,
        app_tag="tressette",
    )
    room = ServerRoom(config, listeners)

    base_ad = RoomAdvertisement(
        room_id=room.room_id,
        room_name=opts.room_name,
        app_tag="tressette",
        endpoints=public_endpoints,
        protocol_version=PROTOCOL_VERSION,
        capacity=SEATS,
        occupied=0,
    )
    heard = _Heard()
    loop = asyncio.get_running_loop()
    media = [parse_medium(m) for m in opts.advertise_media if m]
    mem_buses = [m.bus for m in media if isinstance(m, MemMedium)]

    def ads_source() -> Optional[list[dict]]:
        if not room.is_open:
            return None
        own = replace(base_ad, occupied=min(room.occupied_count(), SEATS))
        ads = {own.room_id: own}
        for ad in heard.live(loop.time()):
            ads.setdefault(ad.room_id, ad)
        for bus in mem_buses:
            for ad in bus.live():
                ads.setdefault(ad.room_id, ad)
        return [ad.to_json(DEFAULT_INTERVAL) for ad in ads.values()]

    bridge = None
    advertiser = None
    heard_task = None
    aux_tasks: list[asyncio.Task] = []
    exit_code = 2
    try:
        if opts.http_port is not None:
            bridge = HttpBridge(
                ads_source,
                port=opts.http_port,
                web_root=Path(opts.web_root) if opts.web_root else None,
            )
            try:
                await bridge.start()
            except OSError as exc:
                say(f"cannot bind http port {opts.http_port}: {exc}")
                return 1

        sub = room.subscribe()
        await room.open()
        say(f"room '{opts.room_name}' open ({room.room_id})")
        for address in public_endpoints:
            say(f"listening on {address}")
        if bridge is not None:
            say(f"http on port {bridge.port}")

        # ---- local seats join first so their seat numbers are stable
        seated: list[str] = []
        local_clients = []
        if hosting_player:
            client = await client_join(await connect(internal.address), "host")
            player = TerminalPlayer(
                pump_stdin(stdin if stdin is not None else sys.stdin, loop), out
            )
            attach_player(client, player.choose)
            watcher = asyncio.ensure_future(player.watch(client))
            aux_tasks.append(watcher)
            local_clients.append(client)
            seated.append(client.participant_id)
        for n in range(opts.bots):
            client = await client_join(await connect(internal.address), f"bot-{n + 1}")
            attach_player(client, bot_choose)
            local_clients.append(client)
            seated.append(client.participant_id)

        # ---- advertise and wait for the remaining seats
        if media:
            try:
                advertiser = await advertise(
                    base_ad, media, occupied_source=room.occupied_count
                )
            except AdvertisementTooLarge as exc:
                say(f"advertisement too large: {exc}")
                return 1
            for error in advertiser.errors:
                say(f"warning: {error}")
            udp_media = [m for m in media if isinstance(m, UdpMedium)]
            if udp_media:
                heard_task = asyncio.ensure_future(_heard_loop(udp_media, heard))

        names = {pid: room.record(pid).display_name for pid in seated}
        if len(seated) < SEATS:
            say(f"waiting for {SEATS - len(seated)} more player(s)...")
        while len(seated) < SEATS:
            event = await sub.next_event(None)
            if event is None:
                say("room closed while waiting for players")
                return 2
            if event.variant == "participant_joined":
                pid = event.body["participant_id"]
                if pid not in seated:
                    seated.append(pid)
                    names[pid] = event.body.get("display_name", pid)
                    say(f"* {names[pid]} joined ({len(seated)}/{SEATS})")
            elif event.variant == "participant_left":
                pid = event.body["participant_id"]
                if pid in seated and pid not in {c.participant_id for c in local_clients}:
                    seated.remove(pid)
                    say(f"* {names.pop(pid, pid)} left ({len(seated)}/{SEATS})")
        sub.close()

        seed = opts.seed if opts.seed is not None else secrets.randbits(63)
        say(f"all seats filled — starting match (seed {seed})")
        for seat, pid in enumerate(seated):
            say(f"seat {seat}: {names[pid]}")

        endpoints = [RemoteEndpoint(room, pid) for pid in seated]
        result = await run_match(
            seed, endpoints, room=room, move_timeout=opts.move_timeout
        )

        if result.aborted is None:
            detail = result.detail or {}
            say(
                f"result: team {detail.get('winner_team')} wins "
                f"{detail.get('match_points')} after {detail.get('deals_played')} deal(s)"
            )
            exit_code = 0
        else:
            say(f"result: aborted ({result.aborted})")
            exit_code = 2
        return exit_code
    finally:
        if heard_task is not None:
            heard_task.cancel()
        if advertiser is not None:
            await advertiser.stop()
        await room.close()
        for task in aux_tasks:
            task.cancel()
        await asyncio.gather(*aux_tasks, return_exceptions=True)
        if bridge is not None:
            await bridge.stop()
