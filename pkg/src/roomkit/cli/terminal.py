"""Line-oriented terminal play: the `join` command and its renderer.

The client is deliberately plain — one status line per event, a
`play>` prompt on the player's turn — so a pipe can drive it in tests
and scripts exactly like a human would. Cards print as rank + suit
initial (`3d` is the 3 of denari, `Ac` the ace of coppe, `Ks` the king
of spade, `Fb` the fante of bastoni).

Move selection is index-based: the prompt lists the legal cards as
`1:3d 2:Ac ...` and accepts `play 2` or bare `2`. Anything else —
unknown words, indexes off the list — re-prompts locally; nothing is
sent until the input names a legal card, though the room would reject
an illegal move anyway.

The session token is persisted after every successful (re)join, so
`join --rejoin` after a crash reclaims the same seat while the room
still holds it. A rejoin that races the server's notice of the dead
connection (`not_disconnected`) is retried briefly on a fresh channel.
"""

from __future__ import annotations

import asyncio
import logging
import sys
from pathlib import Path
from typing import Optional, TextIO

from ..cardgame import attach_player, game_event_of
from ..room import (
    ClientRoom,
    JoinRejected,
    RejoinRejected,
    client_join,
    client_rejoin,
)
from ..transport import EndpointAddress, connect
from .tokenstore import load_token, save_token, token_path

logger = logging.getLogger(__name__)

REJOIN_RETRIES = 10
REJOIN_RETRY_DELAY = 0.2


def format_card(wire: dict) -> str:
    return f"{wire.get('r', '?')}{str(wire.get('s', '?'))[:1]}"


def format_cards(wires: list) -> str:
    return " ".join(format_card(w) for w in wires)


def _numbered(wires: list) -> str:
    return " ".join(f"{i}:{format_card(w)}" for i, w in enumerate(wires, start=1))


class TerminalPlayer:
    """Renders room/game traffic to `out` and answers move requests from
    `lines` (a queue fed by stdin or by a test)."""

    def __init__(self, lines: "asyncio.Queue[str]", out: TextIO):
        self._lines = lines
        self._out = out
        self.outcome: Optional[dict] = None  # the game_over event, once seen

    # ------------------------------------------------------------- output

    def _say(self, text: str) -> None:
        self._out.write(text + "\n")
        self._out.flush()

    def render_room_event(self, variant: str, body: dict) -> None:
        name = body.get("display_name") or body.get("participant_id", "?")
        if variant == "participant_joined":
            self._say(f"* {name} joined")
        elif variant == "participant_disconnected":
            self._say(f"* {name} disconnected (may rejoin within {body.get('deadline')}s)")
        elif variant == "participant_rejoined":
            self._say(f"* {name} rejoined")
        elif variant == "participant_left":
            self._say(f"* {name} left ({body.get('reason')})")
        elif variant == "anomaly_detected":
            self._say(f"* anomaly at seat {body.get('seat')}: {body.get('description')}")
        elif variant == "room_closed":
            self._say(f"* room closed ({body.get('reason')})")

    def render_game_event(self, event: dict) -> None:
        etype = event.get("type")
        if etype == "score":
            teams = event.get("teams", [])
            parts = [
                f"team{idx}(seats {','.join(map(str, t.get('seats', [])))})={t.get('match_points')}"
                for idx, t in enumerate(teams)
            ]
            self._say("score: " + " ".join(parts))
        elif etype == "deal":
            self._say(
                f"new deal (dealer seat {event.get('dealer')}) — "
                f"your hand: {format_cards(event.get('hand', []))}"
            )
        elif etype == "turn":
            # the private copy (with the legal list) accompanies the prompt
            if "legal" not in event:
                self._say(f"seat {event.get('seat')} to play (within {event.get('deadline')}s)")
        elif etype == "played":
            self._say(f"seat {event.get('seat')} played {format_card(event.get('card', {}))}")
        elif etype == "trick_result":
            self._say(
                f"trick: seat {event.get('winner_seat')} takes "
                f"(+{event.get('thirds')} thirds)"
            )
        elif etype == "game_over":
            self.outcome = event
            if event.get("aborted"):
                self._say(f"game aborted ({event['aborted']}): {event.get('reason')}")
            else:
                self._say(f"game over — team {event.get('winner_team')} wins")

    # ------------------------------------------------------------- input

    async def choose(self, view: dict) -> dict:
        """The chooser handed to attach_player: prompt until a legal pick."""
        legal = list(view.get("legal", []))
        trick = view.get("trick", [])
        if trick:
            played = " ".join(
                f"seat{p.get('seat')}:{format_card(p.get('card', {}))}" for p in trick
            )
            self._say(f"your turn — on the table: {played}")
        else:
            self._say("your turn — you lead")
        self._say(f"hand: {format_cards(view.get('hand', []))}")
        self._say(f"legal: {_numbered(legal)}")
        while True:
            self._out.write("play> ")
            self._out.flush()
            line = (await self._lines.get()).strip()
            if line.lower().startswith("play"):
                line = line[4:].strip()
            if line.isdigit() and 1 <= int(line) <= len(legal):
                return legal[int(line) - 1]
            self._say(f"invalid choice — enter 1..{len(legal)}")

    # ------------------------------------------------------------- driving

    async def watch(self, client: ClientRoom) -> Optional[dict]:
        """Consume the client's event stream until game_over or stream end;
        returns the game_over event, or None if the stream died first."""
        sub = client.subscribe()
        try:
            while True:
                event = await sub.next_event(None)
                if event is None:
                    return self.outcome
                if event.variant == "app_event":
                    game = game_event_of(event.body.get("data"))
                    if game is not None:
                        self.render_game_event(game)
                        if game.get("type") == "game_over":
                            return self.outcome
                else:
                    self.render_room_event(event.variant, event.body)
                    if event.variant == "room_closed":
                        return self.outcome
        finally:
            sub.close()


def pump_stdin(stream: TextIO, loop: asyncio.AbstractEventLoop) -> "asyncio.Queue[str]":
    """Feed lines from a blocking stream into a queue without blocking the
    loop. Stops at EOF; a stuck queue just means prompts wait forever,
    bounded by the room's move timeout."""
    queue: asyncio.Queue[str] = asyncio.Queue()

    def reader() -> None:
        while True:
            line = stream.readline()
            if line == "":
                return
            loop.call_soon_threadsafe(queue.put_nowait, line)

    loop.run_in_executor(None, reader)
    return queue


async def _connect_and_join(
    address: EndpointAddress, name: str, rejoin: bool, path: Path, out: TextIO
) -> Optional[ClientRoom]:
    if rejoin:
        token = load_token(path)
        if token is None:
            out.write(f"no saved token at {path}\n")
            return None
        for attempt in range(REJOIN_RETRIES):
            channel = await connect(address)
            try:
                return await client_rejoin(channel, token)
            except RejoinRejected as exc:
                if exc.reason == "not_disconnected" and attempt < REJOIN_RETRIES - 1:
                    # the room has not yet noticed the old connection died
                    await asyncio.sleep(REJOIN_RETRY_DELAY)
                    continue
                out.write(f"rejoin rejected: {exc.reason}\n")
                return None
    channel = await connect(address)
    try:
        return await client_join(channel, name)
    except JoinRejected as exc:
        out.write(f"join rejected: {exc.reason}\n")
        return None


async def cmd_join(
    endpoint: str,
    name: str,
    *,
    rejoin: bool = False,
    token_file: Optional[str] = None,
    stdin: Optional[TextIO] = None,
    out: Optional[TextIO] = None,
) -> int:
    out = out if out is not None else sys.stdout
    stdin = stdin if stdin is not None else sys.stdin
    address = EndpointAddress.parse(endpoint)
    path = token_path(token_file)

    client = await _connect_and_join(address, name, rejoin, path, out)
    if client is None:
        return 1
    save_token(path, client.token)
    out.write(
        f"joined room '{client.room_name}' as {client.participant_id} "
        f"(token saved to {path})\n"
    )
    out.flush()

    player = TerminalPlayer(pump_stdin(stdin, asyncio.get_running_loop()), out)
    attach_player(client, player.choose)
    outcome = await player.watch(client)
    await client.close()
    if outcome is None:
        out.write("connection lost before the game ended\n")
        return 2
    return 0 if not outcome.get("aborted") else 2
