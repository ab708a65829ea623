"""End-to-end acceptance gate: one test — and one PASS/FAIL verdict line — per
release criterion.

Every criterion is verified at its stated tolerance (exact where exactness is
stated) over fixed seeds, so the whole gate is deterministic. Each test funnels
its measurements into a single `check(...)` call that prints the verdict line
(visible under `pytest -s`) and carries the same text in the assertion message
on failure.
"""

import asyncio
import hashlib
import json
import random
import socket
import struct
import time

from roomkit.cardgame import BotEndpoint, Hand, RemoteEndpoint, attach_player
from roomkit.cli import main
from roomkit.clock import ManualClock
from roomkit.discovery import (
    MemDiscoveryBus,
    MemMedium,
    RoomAdvertisement,
    UdpMedium,
    advertise,
    scan,
)
from roomkit.room import RejoinRejected
from roomkit.transport import ChannelClosed, EndpointAddress
from roomkit.tressette import (
    MATCH_TARGET,
    Suit,
    apply_play,
    bot_choose,
    hostile_foreign_choose,
    hostile_revoke_choose,
    legal_moves,
    new_deck,
    run_match,
    score_deal,
    start_deal,
    trick_winner,
)
from roomkit.wire import (
    MAX_PAYLOAD,
    Envelope,
    Frame,
    MalformedFrame,
    OversizeFrame,
    TruncatedFrame,
    decode_frame,
    decode_payload,
    encode_frame,
    frame_for,
)

from conftest import TransportHarness, run
from support import game_stream, mem_room, next_of_type, wait_variant
from test_transport_contract import frame_of, random_frame

SCHEMES = ("mem", "tcp", "ws")
HEX_DIGITS = "0123456789abcdef"


def check(criterion: str, ok: bool, detail: str) -> None:
    line = f"{'PASS' if ok else 'FAIL'} {criterion}: {detail}"
    print(line)
    assert ok, line


def free_udp_port() -> int:
    with socket.socket(socket.AF_INET, socket.SOCK_DGRAM) as s:
        s.bind(("127.0.0.1", 0))
        return s.getsockname()[1]


# --------------------------------------------------------------- criterion 1


def test_c1_mixed_transport_match(tmp_path):
    paths = [tmp_path / f"run{i}.jsonl" for i in (1, 2)]
    elapsed = []
    for path in paths:
        t0 = time.monotonic()
        code = main(
            ["simulate", "--seed", "7", "--mix", "mem,tcp,ws,mem", "--out", str(path)]
        )
        elapsed.append(time.monotonic() - t0)
        assert code == 0, f"simulate exited {code}"
    blobs = [p.read_bytes() for p in paths]
    lines = blobs[0].decode().splitlines()
    meta = json.loads(lines[0])
    events = [json.loads(line)["event"] for line in lines[1:]]
    finals = [e for e in events if e.get("type") == "game_over"]
    scores = [e for e in events if e.get("type") == "score"]
    winner = finals[-1].get("winner_team") if finals else None
    points = scores[-1]["teams"][winner]["match_points"] if winner in (0, 1) else -1
    check(
        "C1 mixed-transport match",
        blobs[0] == blobs[1]
        and meta == {"seed": 7, "seats": 4, "version": 1}
        and winner in (0, 1)
        and not finals[-1].get("aborted")
        and points >= MATCH_TARGET
        and max(elapsed) < 10.0,
        f"seed 7 over mem,tcp,ws,mem: team {winner} won at {points} points "
        f"(target {MATCH_TARGET}), transcripts byte-identical ({len(blobs[0])} bytes), "
        f"runs took {elapsed[0]:.2f}s and {elapsed[1]:.2f}s (limit 10s)",
    )


# --------------------------------------------------------------- criterion 2


async def transport_observations(harness: TransportHarness) -> list[bytes]:
    """One contract body; every scheme must produce identical observations."""
    obs: list[bytes] = []

    # in-order delivery
    listener, client, server = await harness.open_pair()
    for i in range(50):
        await client.send(frame_of({"i": i}))
    for _ in range(50):
        obs.append((await server.recv()).payload)

    # close semantics: queued frames drain, then end-of-stream, then errors
    await client.send(frame_of({"last": True}))
    await client.close()
    obs.append((await server.recv()).payload)
    obs.append(b"<eos>" if await server.recv() is None else b"<frame-after-eos>")
    try:
        await server.recv()
        obs.append(b"<recv-after-eos-returned>")
    except ChannelClosed:
        obs.append(b"<recv-after-eos-raises>")
    try:
        await client.send(frame_of({"x": 1}))
        obs.append(b"<send-after-close-returned>")
    except ChannelClosed:
        obs.append(b"<send-after-close-raises>")
    await listener.close()

    # the 1 MiB boundary frame passes; one byte past the cap is unbuildable
    listener, client, server = await harness.open_pair()
    skeleton = json.dumps({"blob": ""}, separators=(",", ":"))
    boundary = frame_of({"blob": "x" * (MAX_PAYLOAD - len(skeleton))})
    assert boundary.length == MAX_PAYLOAD
    await client.send(boundary)
    echo = await server.recv()
    obs.append(f"<cap-{echo.length}>".encode())
    obs.append(hashlib.sha256(echo.payload).digest())
    try:
        Frame(b"x" * (MAX_PAYLOAD + 1))
        obs.append(b"<oversize-built>")
    except OversizeFrame:
        obs.append(b"<oversize-rejected>")
    await client.close()
    await listener.close()

    # 1000 seeded random frames; the stream is one fixed sequence for all schemes
    listener, client, server = await harness.open_pair()
    rng = random.Random(20260819)
    frames = [random_frame(rng) for _ in range(1000)]

    async def pump():
        for f in frames:
            await client.send(f)
        await client.close()

    sender = asyncio.ensure_future(pump())
    while True:
        got = await server.recv()
        if got is None:
            break
        obs.append(got.payload)
    await sender
    await listener.close()
    assert obs[-1000:] == [f.payload for f in frames]
    return obs


def test_c2_transport_interchangeability():
    results = {
        scheme: run(transport_observations(TransportHarness(scheme)), timeout=120.0)
        for scheme in SCHEMES
    }
    count = len(results["mem"])
    check(
        "C2 transport interchangeability",
        results["mem"] == results["tcp"] == results["ws"],
        f"one shared contract body (ordering, close semantics, 1 MiB boundary, "
        f"1000 seeded frames): {count} observations per scheme, "
        f"mem == tcp == ws byte-for-byte",
    )


# --------------------------------------------------------------- criterion 3


def test_c3_scoring_invariant():
    deals = 120
    exact = 0
    rng = random.Random(433494437)
    for index in range(deals):
        state = start_deal(rng.getrandbits(32), dealer=index % 4)
        while not state.complete:
            seat = state.turn
            card = rng.choice(legal_moves(state.hands[seat], state.led_suit))
            apply_play(state, seat, card)
        a, b = score_deal(state)
        if a + b == 35 and a // 3 + b // 3 == 11:
            exact += 1
    check(
        "C3 scoring invariant",
        deals >= 100 and exact == deals,
        f"{exact}/{deals} seeded deals had thirds A+B == 35 and "
        f"floor(A/3)+floor(B/3) == 11 (tolerance 0)",
    )


# --------------------------------------------------------------- criterion 4


def test_c4_legality_oracle():
    rng = random.Random(514229)
    deck = new_deck().cards
    pairs = 12_000
    agree = 0
    led_mix = [None, *Suit]

    def key(card):
        return (card.seed.value, card.value.symbol)

    for _ in range(pairs):
        cards = rng.sample(deck, rng.randint(1, 10))
        led = rng.choice(led_mix)
        # brute force: judge every card on its own, no early exits
        holds_led = any(c.seed is led for c in cards)
        oracle = [c for c in cards if led is None or c.seed is led or not holds_led]
        if sorted(legal_moves(Hand(cards), led), key=key) == sorted(oracle, key=key):
            agree += 1
    check(
        "C4 legality oracle",
        pairs >= 10_000 and agree == pairs,
        f"legal_moves matched the brute-force suit filter on {agree}/{pairs} "
        f"random (hand, led_suit) pairs (100% required)",
    )


# --------------------------------------------------------------- criterion 5


def test_c5_trick_winner_oracle():
    rng = random.Random(28657)
    deck = new_deck().cards
    tricks = 12_000
    agree = 0
    for _ in range(tricks):
        leader = rng.randrange(4)
        cards = rng.sample(deck, 4)
        plays = [((leader + i) % 4, card) for i, card in enumerate(cards)]
        # linear scan: strongest card on the led suit wins
        led = plays[0][1].seed
        best_seat, best_card = plays[0]
        for seat, card in plays[1:]:
            if card.seed is led and card.strength > best_card.strength:
                best_seat, best_card = seat, card
        if trick_winner(plays) == best_seat:
            agree += 1
    check(
        "C5 trick-winner oracle",
        tricks >= 10_000 and agree == tricks,
        f"trick_winner matched the linear-scan oracle on {agree}/{tricks} "
        f"sampled tricks (100% required)",
    )


# --------------------------------------------------------------- criterion 6


def test_c6_session_handling():
    eps = 0.001
    timeout = 60.0

    # (a) rejoin just under the deadline: seat restored, pending RPC re-sent
    async def just_in_time():
        clock = ManualClock()
        async with mem_room(clock, session_timeout=timeout) as ctx:
            server_sub = ctx.room.subscribe()
            channel = await ctx.channel()
            await channel.send(
                frame_for(Envelope(type="join_request", payload={"display_name": "ada"}))
            )
            accepted = await next_of_type(channel, "join_accepted")
            pid = accepted.payload["participant_id"]
            token = accepted.payload["token"]
            fut = ctx.room.call(pid, "request_move", {"view": {}})
            first = await next_of_type(channel, "rpc_request")
            await channel.close()
            await wait_variant(server_sub, "participant_disconnected")
            clock.advance(timeout - eps)
            channel2 = await ctx.channel()
            await channel2.send(
                frame_for(Envelope(type="rejoin_request", payload={"token": token}))
            )
            accepted2 = await next_of_type(channel2, "rejoin_accepted")
            second = await next_of_type(channel2, "rpc_request")
            await channel2.send(
                frame_for(Envelope(type="rpc_response", cid=second.cid, payload={"move": 1}))
            )
            await asyncio.wait_for(fut, 5.0)
            await channel2.close()
            states = {
                p["participant_id"]: p["state"]
                for p in accepted2.payload["snapshot"]["participants"]
            }
            return states.get(pid), first.cid, second.cid

    state_a, cid1, cid2 = run(just_in_time())

    # (b) rejoin just past the deadline: `expired`, and the match loses the seat
    async def too_late():
        clock = ManualClock()
        async with mem_room(clock, session_timeout=timeout) as ctx:
            clients = [await ctx.join(f"p{i}") for i in range(3)]
            for c in clients:
                attach_player(c, bot_choose)
            channel = await ctx.channel()
            await channel.send(
                frame_for(Envelope(type="join_request", payload={"display_name": "late"}))
            )
            accepted = await next_of_type(channel, "join_accepted")
            pid = accepted.payload["participant_id"]
            token = accepted.payload["token"]
            server_sub = ctx.room.subscribe()
            endpoints = [RemoteEndpoint(ctx.room, c.participant_id) for c in clients]
            endpoints.append(RemoteEndpoint(ctx.room, pid))
            task = asyncio.ensure_future(run_match(3, endpoints, room=ctx.room, clock=clock))
            await next_of_type(channel, "rpc_request")  # seat 3's move is now pending
            await channel.close()
            await wait_variant(server_sub, "participant_disconnected")
            clock.advance(timeout + eps)
            reason = None
            try:
                await ctx.rejoin(token)
            except RejoinRejected as exc:
                reason = exc.reason
            result = await asyncio.wait_for(task, 10.0)
            for c in clients:
                await c.leave()
            return reason, result

    reason_b, result_b = run(too_late())

    # (c) every single flipped hex character in a live token is bad_token
    async def flipped():
        async with mem_room(session_timeout=timeout) as ctx:
            server_sub = ctx.room.subscribe()
            ada = await ctx.join("ada")
            token = ada.token
            await ada.close()
            await wait_variant(server_sub, "participant_disconnected")
            reasons = []
            for i, ch in enumerate(token):
                if ch not in HEX_DIGITS:
                    continue  # the two field separators
                flip = "f" if ch != "f" else "0"
                mutated = token[:i] + flip + token[i + 1 :]
                try:
                    await ctx.rejoin(mutated)
                    reasons.append("accepted")
                except RejoinRejected as exc:
                    reasons.append(exc.reason)
            revived = await ctx.rejoin(token)  # the untouched token still works
            restored = revived.participant_id == ada.participant_id
            await revived.leave()
            return reasons, restored

    reasons_c, restored_c = run(flipped(), timeout=60.0)

    ok_a = state_a == "joined" and cid1 is not None and cid1 == cid2
    ok_b = (
        reason_b == "expired"
        and result_b.aborted == "player_gone"
        and result_b.winners is None
    )
    ok_c = len(reasons_c) == 80 and set(reasons_c) == {"bad_token"} and restored_c
    check(
        "C6 session handling",
        ok_a and ok_b and ok_c,
        f"(a) rejoin at timeout-{eps}s restored the seat and re-sent cid {cid1}; "
        f"(b) rejoin at timeout+{eps}s -> {reason_b!r}, match -> {result_b.aborted!r}; "
        f"(c) {len(reasons_c)}/80 single-hex-character flips -> bad_token, "
        f"intact token still rejoined",
    )


# --------------------------------------------------------------- criterion 7


def test_c7_anomaly_detection(tmp_path):
    # both hostile scripts, end to end through the CLI surface
    cli = {}
    for script in ("revoke", "foreign-card"):
        path = tmp_path / f"{script}.jsonl"
        code = main(["simulate", "--seed", "11", "--hostile", script, "--out", str(path)])
        events = [json.loads(line)["event"] for line in path.read_text().splitlines()[1:]]
        anomalies = [e for e in events if e.get("type") == "anomaly"]
        final = events[-1]
        cli[script] = (code, len(anomalies), final.get("aborted"), final.get("winner_team"))

    # the anomaly broadcast reaches every participant exactly once
    async def fan_out(chooser):
        async with mem_room() as ctx:
            clients = [await ctx.join(f"p{i}") for i in range(4)]
            subs = [c.subscribe() for c in clients]
            for i, c in enumerate(clients):
                attach_player(c, chooser if i == 3 else bot_choose)
            endpoints = [RemoteEndpoint(ctx.room, c.participant_id) for c in clients]
            result = await asyncio.wait_for(run_match(11, endpoints, room=ctx.room), 60.0)
            streams = [await game_stream(sub, timeout=10.0) for sub in subs]
            for c in clients:
                await c.leave()
            counts = [
                sum(1 for kind, _, _ in stream if kind == "anomaly_detected")
                for stream in streams
            ]
            return result, counts

    rooms = {
        "revoke": run(fan_out(hostile_revoke_choose), timeout=90.0),
        "foreign-card": run(fan_out(hostile_foreign_choose), timeout=90.0),
    }

    # honest soak: at least 100 deals of clean bot play, zero anomalies
    async def soak():
        deals = anomalies = matches = 0
        aborted = []
        while deals < 100:
            observed = []
            endpoints = [BotEndpoint(f"bot-{i}", bot_choose) for i in range(4)]
            result = await run_match(
                1000 + matches, endpoints, observer=lambda to, e: observed.append(e)
            )
            anomalies += sum(1 for e in observed if e.get("type") == "anomaly")
            deals += result.detail["deals_played"]
            if result.aborted is not None:
                aborted.append(result.aborted)
            matches += 1
        return deals, anomalies, aborted, matches

    soak_deals, soak_anomalies, soak_aborted, matches = run(soak(), timeout=120.0)

    ok_cli = all(v == (0, 1, "anomaly", None) for v in cli.values())
    ok_rooms = all(
        result.aborted == "anomaly" and result.winners is None and counts == [1, 1, 1, 1]
        for result, counts in rooms.values()
    )
    ok_soak = soak_deals >= 100 and soak_anomalies == 0 and not soak_aborted
    check(
        "C7 anomaly detection",
        ok_cli and ok_rooms and ok_soak,
        f"--hostile revoke and --hostile foreign-card each raised exactly one "
        f"anomaly, delivered to all 4 participants, match aborted with no winner; "
        f"honest soak: {soak_deals} deals over {matches} matches, "
        f"{soak_anomalies} anomalies",
    )


# --------------------------------------------------------------- criterion 8


def test_c8_discovery():
    udp_port = free_udp_port()
    bus_clock = ManualClock()
    bus = MemDiscoveryBus(bus_clock)
    interval = 0.5
    ad = RoomAdvertisement(
        room_id="acceptance-room",
        room_name="acceptance",
        app_tag="tressette",
        endpoints=(
            EndpointAddress("tcp", "127.0.0.1:4700"),
            EndpointAddress("ws", "127.0.0.1:4701"),
        ),
        protocol_version=1,
        capacity=4,
        occupied=1,
    )

    async def flow():
        handle = await advertise(ad, [UdpMedium(port=udp_port), MemMedium(bus)], interval)
        t0 = time.monotonic()
        found_udp, found_mem = await asyncio.gather(
            scan(UdpMedium(port=udp_port), window=3.0),
            scan(MemMedium(bus), window=3.0),
        )
        find_elapsed = time.monotonic() - t0
        await handle.stop()
        # past the beacon expiry horizon in real time, and 10 s on the bus clock
        await asyncio.sleep(3 * interval + 0.2)
        bus_clock.advance(10.0)
        late_udp, late_mem = await asyncio.gather(
            scan(UdpMedium(port=udp_port), window=1.0),
            scan(MemMedium(bus), window=0.2),
        )
        return found_udp, found_mem, find_elapsed, late_udp, late_mem

    found_udp, found_mem, find_elapsed, late_udp, late_mem = run(flow(), timeout=30.0)
    ok_found = (
        [a.room_id for a in found_udp] == ["acceptance-room"]
        and [a.room_id for a in found_mem] == ["acceptance-room"]
    )
    check(
        "C8 discovery",
        ok_found and find_elapsed <= 3.5 and late_udp == [] and late_mem == [],
        f"udp-only and mem-only scans (3.0s window) both found the advertised room "
        f"on loopback in {find_elapsed:.2f}s; after stop, a udp rescan past the "
        f"beacon expiry horizon and a mem scan at +10.0s both returned empty",
    )


# --------------------------------------------------------------- criterion 9


def test_c9_wire_codec():
    rng = random.Random(75025)
    types = ["room_event", "rpc_request", "rpc_response", "leave", "join_request", "error"]
    trips = 10_000
    agree = 0
    for _ in range(trips):
        payload = {
            f"k{j}": rng.choice(
                [rng.randint(-(10**6), 10**6), "s" * rng.randint(0, 12), None, True, [1, [2]], {"d": 1}]
            )
            for j in range(rng.randint(0, 6))
        }
        env = Envelope(
            type=rng.choice(types),
            cid=rng.randint(0, 2**64 - 1) if rng.random() < 0.5 else None,
            sender=f"p{rng.randint(0, 15):x}" if rng.random() < 0.5 else None,
            payload=payload,
        )
        raw = encode_frame(env)
        decoded, consumed = decode_frame(raw)
        if decoded == env and consumed == len(raw):
            agree += 1

    rejected = {}

    def expect(name, fn):
        try:
            fn()
            rejected[name] = "accepted"
        except (OversizeFrame, MalformedFrame, TruncatedFrame) as exc:
            rejected[name] = type(exc).__name__

    expect("oversize-build", lambda: Frame(b"x" * (MAX_PAYLOAD + 1)))
    expect(
        "oversize-encode",
        lambda: encode_frame(Envelope(type="room_event", payload={"b": "x" * MAX_PAYLOAD})),
    )
    expect(
        "oversize-declared",
        lambda: decode_frame(struct.pack(">I", MAX_PAYLOAD + 1) + b"x" * 64),
    )
    expect("malformed-utf8", lambda: decode_payload(b"\xff\xfe not utf8 \x80"))
    expect("malformed-json", lambda: decode_payload(b"not json at all"))
    expect("malformed-shape", lambda: decode_payload(b'{"v":1}'))
    expect("truncated-prefix", lambda: decode_frame(b"\x00\x00"))
    expect(
        "truncated-body",
        lambda: decode_frame(struct.pack(">I", 50) + b'{"v":1,"type":"leave"}'),
    )
    expected = {
        "oversize-build": "OversizeFrame",
        "oversize-encode": "OversizeFrame",
        "oversize-declared": "OversizeFrame",
        "malformed-utf8": "MalformedFrame",
        "malformed-json": "MalformedFrame",
        "malformed-shape": "MalformedFrame",
        "truncated-prefix": "TruncatedFrame",
        "truncated-body": "TruncatedFrame",
    }
    check(
        "C9 wire codec",
        trips >= 10_000 and agree == trips and rejected == expected,
        f"{agree}/{trips} randomized envelope round-trips were exact; "
        f"oversize, malformed, and truncated frames rejected with "
        f"OversizeFrame/MalformedFrame/TruncatedFrame as specified",
    )
