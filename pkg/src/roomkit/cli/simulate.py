"""The `simulate` command: one scripted match, audited end to end.

Spins up a host room and four bot clients in-process, spread across
the requested transport mix (`--mix mem,tcp,ws,mem` gives seat i the
i-th scheme, cycling if fewer than four are named), plays one match,
then audits the observer transcript against the game's own rules:

- every `played` event must validate on an independent replay of the
  same seed;
- each completed deal's ten trick results must sum to 35 thirds, its
  forty played cards must be exactly the deck, and its score delta
  must award 11 match points;
- a clean run must contain zero anomalies and a decisive game_over; a
  `--hostile` run must contain exactly one anomaly and an aborted
  game_over (expected-anomaly mode — still exit 0).

Any failed expectation prints `invariant violated: ...` and exits 3.

The transcript lands as JSON lines — a meta line {seed, seats,
version} then one `{"to": seat|null, "event": ...}` line per game
event — written with sorted keys and compact separators so runs with
equal seeds produce byte-identical files.
"""

from __future__ import annotations

import asyncio
import json
import sys
from collections import Counter
from pathlib import Path
from typing import Optional, Sequence, TextIO

from ..cardgame import RemoteEndpoint, attach_player
from ..room import RoomConfig, ServerRoom, client_join
from ..transport import EndpointAddress, MemNamespace, connect, listen
from ..tressette import (
    DEAL_THIRDS,
    MATCH_TARGET,
    SEATS,
    TressetteGame,
    bot_choose,
    card_from_wire,
    hostile_foreign_choose,
    hostile_revoke_choose,
    new_deck,
    run_match,
)

TRANSCRIPT_VERSION = 1
HOSTILE_SEAT = 3
HOSTILE_CHOOSERS = {
    "revoke": hostile_revoke_choose,
    "foreign": hostile_foreign_choose,
    "foreign-card": hostile_foreign_choose,
}


def transcript_lines(seed: int, records: Sequence[tuple]) -> list[str]:
    meta = {"seed": seed, "seats": SEATS, "version": TRANSCRIPT_VERSION}
    lines = [json.dumps(meta, sort_keys=True, separators=(",", ":"))]
    for to, event in records:
        lines.append(
            json.dumps({"to": to, "event": event}, sort_keys=True, separators=(",", ":"))
        )
    return lines


def check_invariants(
    seed: int, records: Sequence[tuple], hostile: Optional[str]
) -> tuple[dict, list[str]]:
    """Audit one match transcript; returns (report, violations)."""
    violations: list[str] = []
    events = [event for _, event in records]
    played = [e for e in events if e.get("type") == "played"]
    tricks = [e for e in events if e.get("type") == "trick_result"]
    scores = [e for e in events if e.get("type") == "score"]
    anomalies = [e for e in events if e.get("type") == "anomaly"]
    finals = [e for e in events if e.get("type") == "game_over"]

    # ---- replay every recorded move against a fresh engine
    replay = TressetteGame(seed)
    replay.setup()
    for event in played:
        verdict = replay.validate(event["seat"], event["card"])
        if verdict is not None:
            violations.append(
                f"replay rejects seat {event['seat']} playing {event['card']}: {verdict}"
            )
            break
        replay.apply_move(event["seat"], event["card"])

    # ---- per-deal conservation: thirds, cards, and match points
    deals_complete = len(tricks) // 10
    for d in range(deals_complete):
        chunk = tricks[d * 10 : (d + 1) * 10]
        total = sum(t["thirds"] for t in chunk)
        if total != DEAL_THIRDS:
            violations.append(f"deal {d} trick thirds sum to {total}, not {DEAL_THIRDS}")
        cards = played[d * 40 : (d + 1) * 40]
        census = Counter(card_from_wire(e["card"]) for e in cards)
        if census != Counter(new_deck().cards):
            violations.append(f"deal {d} does not play out exactly one full deck")

    floor_sums = []
    for before, after in zip(scores, scores[1:]):
        gained = sum(
            after["teams"][t]["match_points"] - before["teams"][t]["match_points"]
            for t in (0, 1)
        )
        floor_sums.append(gained)
    if any(g != 11 for g in floor_sums):
        violations.append(f"per-deal match points {floor_sums} are not all 11")

    # ---- outcome expectations
    final = finals[-1] if finals else None
    winner = final.get("winner_team") if final else None
    if final is None:
        violations.append("transcript has no game_over event")
    elif hostile is None:
        if anomalies:
            violations.append(f"clean run raised {len(anomalies)} anomaly event(s)")
        if final.get("aborted"):
            violations.append(f"clean run aborted: {final}")
        elif winner not in (0, 1):
            violations.append(f"game_over names no winner: {final}")
        elif scores and scores[-1]["teams"][winner]["match_points"] < MATCH_TARGET:
            violations.append(f"winner finished under {MATCH_TARGET} match points")
    else:
        if len(anomalies) != 1:
            violations.append(
                f"hostile run raised {len(anomalies)} anomaly event(s), expected 1"
            )
        if not final or final.get("aborted") != "anomaly":
            violations.append(f"hostile run did not abort on the anomaly: {final}")

    report = {
        "winner": winner,
        "deals": deals_complete,
        "anomalies": len(anomalies),
        "floor_sums": floor_sums,
    }
    if final and final.get("aborted"):
        report["aborted"] = final["aborted"]
    return report, violations


async def cmd_simulate(
    seed: int,
    mix: Sequence[str],
    *,
    hostile: Optional[str] = None,
    out_path: Optional[str] = None,
    out: Optional[TextIO] = None,
) -> int:
    out = out if out is not None else sys.stdout
    schemes = [mix[i % len(mix)] for i in range(SEATS)]
    unknown = sorted(set(schemes) - {"mem", "tcp", "ws"})
    if unknown:
        out.write(f"unknown transport(s) in mix: {', '.join(unknown)}\n")
        return 1
    if hostile is not None and hostile not in HOSTILE_CHOOSERS:
        out.write(f"unknown hostile script {hostile!r}\n")
        return 1

    namespace = MemNamespace()
    addresses = {}
    listeners = []
    for scheme in dict.fromkeys(schemes):
        spec = "mem://simulate" if scheme == "mem" else f"{scheme}://127.0.0.1:0"
        listener = await listen(EndpointAddress.parse(spec), namespace=namespace)
        listeners.append(listener)
        addresses[scheme] = listener.address

    room = ServerRoom(
        RoomConfig(room_name="simulate", capacity=SEATS, app_tag="tressette"),
        listeners,
    )
    await room.open()
    records: list[tuple] = []
    try:
        clients = []
        for i, scheme in enumerate(schemes):
            channel = await connect(addresses[scheme], namespace=namespace)
            client = await client_join(channel, f"sim-{i}")
            chooser = bot_choose
            if hostile is not None and i == HOSTILE_SEAT:
                chooser = HOSTILE_CHOOSERS[hostile]
            attach_player(client, chooser)
            clients.append(client)
        endpoints = [RemoteEndpoint(room, c.participant_id) for c in clients]
        await run_match(
            seed,
            endpoints,
            room=room,
            observer=lambda to, event: records.append((to, event)),
        )
    finally:
        await room.close()

    report, violations = check_invariants(seed, records, hostile)
    if out_path:
        lines = transcript_lines(seed, records)
        Path(out_path).write_text("\n".join(lines) + "\n", encoding="utf-8")
    out.write(json.dumps(report, sort_keys=True) + "\n")
    for violation in violations:
        out.write(f"invariant violated: {violation}\n")
    out.flush()
    return 3 if violations else 0
