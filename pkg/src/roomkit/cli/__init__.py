"""Operator entry points: host, scan, join, simulate.

Exit codes are a contract shared by every subcommand: 0 clean, 1
environment/usage error (bad bind, unreachable medium, rejected join),
2 aborted game (including operator interrupt), 3 invariant violation
(simulate's audit failed).
"""

from __future__ import annotations

import argparse
import asyncio
import logging
import secrets
import sys
from typing import Optional, Sequence, TextIO

from ..discovery import DEFAULT_WINDOW, MediumUnavailable, parse_medium, scan
from ..room import DEFAULT_SESSION_TIMEOUT
from .hostcmd import HostOptions, cmd_host
from .simulate import cmd_simulate
from .terminal import cmd_join
from .tokenstore import ENV_VAR as TOKEN_ENV_VAR

__all__ = ["build_parser", "main", "cmd_host", "cmd_join", "cmd_scan", "cmd_simulate", "HostOptions"]


async def cmd_scan(
    medium_text: str, window: float, *, out: Optional[TextIO] = None
) -> int:
    out = out if out is not None else sys.stdout
    try:
        medium = parse_medium(medium_text)
        ads = await scan(medium, window)
    except (ValueError, MediumUnavailable) as exc:
        out.write(f"scan failed: {exc}\n")
        return 1
    if not ads:
        out.write("no rooms found\n")
        return 0
    for ad in ads:
        endpoints = " ".join(str(e) for e in ad.endpoints)
        out.write(f"{ad.room_id}  {ad.room_name}  {ad.occupied}/{ad.capacity}  {endpoints}\n")
    out.flush()
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="roomkit",
        description="Host, discover, join, and simulate networked Tressette rooms.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    host = sub.add_parser("host", help="host a room and run one match")
    host.add_argument("--name", default="tressette", help="room name to advertise")
    host.add_argument(
        "--tcp", action="append", default=[], metavar="HOST:PORT",
        help="bind a tcp transport (repeatable; port 0 for ephemeral)",
    )
    host.add_argument(
        "--ws", action="append", default=[], metavar="HOST:PORT",
        help="bind a websocket transport (repeatable)",
    )
    host.add_argument(
        "--mem", action="append", default=[], metavar="NAME",
        help="bind an in-process mem transport (for tests)",
    )
    host.add_argument("--bots", type=int, default=0, help="fill N seats with bots")
    host.add_argument("--seed", type=int, default=None, help="deterministic deal seed")
    mode = host.add_mutually_exclusive_group()
    mode.add_argument(
        "--standalone", action="store_true",
        help="coordinate without playing (the default)",
    )
    mode.add_argument(
        "--play", action="store_true", help="take seat 0 and play from this terminal"
    )
    host.add_argument(
        "--timeout", type=float, default=DEFAULT_SESSION_TIMEOUT, metavar="SECONDS",
        help="how long a disconnected player may rejoin",
    )
    host.add_argument(
        "--http-port", type=int, default=4702,
        help="port for GET /rooms and the web client (0 for ephemeral)",
    )
    host.add_argument("--no-http", action="store_true", help="disable the http bridge")
    host.add_argument(
        "--advertise", default="udp", metavar="MEDIA",
        help="comma-separated beacon media: udp, udp:PORT, mem ('' disables)",
    )
    host.add_argument("--web-root", default=None, help="directory of web client files")

    scan_p = sub.add_parser("scan", help="list advertised rooms")
    scan_p.add_argument("--medium", default="udp", help="udp, udp:PORT, or mem")
    scan_p.add_argument("--window", type=float, default=DEFAULT_WINDOW)

    join = sub.add_parser("join", help="join a room and play from this terminal")
    join.add_argument("--endpoint", required=True, help="room address, e.g. tcp://host:4700")
    join.add_argument("--name", default=None, help="display name (required unless --rejoin)")
    join.add_argument(
        "--rejoin", action="store_true", help="resume the seat saved in the token file"
    )
    join.add_argument(
        "--token-file", default=None,
        help=f"session token location (default ~/.roomkit/token, or ${TOKEN_ENV_VAR})",
    )

    sim = sub.add_parser("simulate", help="run one audited bot match")
    sim.add_argument("--seed", type=int, default=None, help="match seed (random if omitted)")
    sim.add_argument(
        "--mix", default="mem", metavar="SCHEMES",
        help="comma-separated transport per seat, cycled to 4 (e.g. mem,tcp,ws,mem)",
    )
    sim.add_argument(
        "--hostile", choices=("revoke", "foreign", "foreign-card"), default=None,
        help="replace one bot with a rule-breaking script (expected-anomaly mode)",
    )
    sim.add_argument(
        "--out", default="roomkit-transcript.jsonl", help="transcript file path"
    )
    return parser


def _host_options(args: argparse.Namespace) -> HostOptions:
    transports = tuple(
        [f"tcp://{a}" for a in args.tcp]
        + [f"ws://{a}" for a in args.ws]
        + [f"mem://{a}" for a in args.mem]
    ) or ("tcp://0.0.0.0:4700", "ws://0.0.0.0:4701")
    media = tuple(m.strip() for m in args.advertise.split(",") if m.strip())
    return HostOptions(
        room_name=args.name,
        transports=transports,
        advertise_media=media,
        session_timeout=args.timeout,
        seed=args.seed,
        coordinator_mode="hosting-player" if args.play else "standalone",
        http_port=None if args.no_http else args.http_port,
        bots=args.bots,
        web_root=args.web_root,
    )


def main(argv: Optional[Sequence[str]] = None) -> int:
    if not logging.getLogger().handlers:
        logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        if args.command == "host":
            try:
                opts = _host_options(args)
            except ValueError as exc:
                sys.stdout.write(f"{exc}\n")
                return 1
            return asyncio.run(cmd_host(opts))
        if args.command == "scan":
            return asyncio.run(cmd_scan(args.medium, args.window))
        if args.command == "join":
            if not args.rejoin and not args.name:
                sys.stdout.write("--name is required unless --rejoin is given\n")
                return 1
            return asyncio.run(
                cmd_join(
                    args.endpoint,
                    args.name or "player",
                    rejoin=args.rejoin,
                    token_file=args.token_file,
                )
            )
        if args.command == "simulate":
            seed = args.seed
            if seed is None:
                seed = secrets.randbits(63)
                sys.stdout.write(f"seed: {seed}\n")
            mix = [m.strip() for m in args.mix.split(",") if m.strip()]
            return asyncio.run(
                cmd_simulate(seed, mix or ["mem"], hostile=args.hostile, out_path=args.out)
            )
        raise AssertionError(f"unhandled command {args.command!r}")
    except KeyboardInterrupt:
        sys.stdout.write("interrupted\n")
        return 2
