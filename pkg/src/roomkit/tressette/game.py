"""The Tressette match engine plugged into the generic coordinator.

TressetteGame implements the coordinator's game hooks for a full match:
deals repeat — each shuffled with the next derived seed from the match
seed's splitmix64 stream — until a team stands at 21 or more match
points at a deal boundary (dead heats past the post force another
deal). The first dealer is seat 0 and the deal rotates by ascending
seat per deal; partnerships are fixed by seat parity.

Event flow (the normative transcript): setup emits one score broadcast
with both teams at zero, then each deal contributes four private deal
events, one per seat. Every play emits a played broadcast; a completed
trick adds trick_result; a finished deal adds an updated score and
either game_over {winner_team} or the next deal's private deal events.
Turn events come from the coordinator, not from this engine. Moves on
the wire are cards in the {"s", "r"} encoding; all deadlines are
durations in seconds, which keeps equal-seed transcripts byte-equal.

Also here: the deterministic baseline bot (lowest-strength legal card,
suit declaration order breaking ties) and two scripted hostile choosers
used to exercise the anomaly path end to end.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

from ..cardgame import (
    DEFAULT_MOVE_TIMEOUT,
    Emission,
    GameCoordinator,
    GameResult,
    PlayerEndpoint,
)
from ..clock import MONOTONIC, Clock
from ..rng import seed_stream
from ..room import ServerRoom
from .rules import (
    MATCH_TARGET,
    SEATS,
    Suit,
    apply_play,
    card_from_wire,
    card_to_wire,
    legal_moves,
    match_winner,
    new_deck,
    score_deal,
    start_deal,
    validate_play,
)

MatchResult = GameResult

_SUIT_ORDER = {suit: index for index, suit in enumerate(Suit)}


@dataclass
class MatchState:
    """Standings across deals; only whole match points persist."""

    match_points: list[int] = field(default_factory=lambda: [0, 0])
    dealer: int = 0
    deal_index: int = 0
    target: int = MATCH_TARGET


class TressetteGame:
    """Game hooks for one Tressette match (pass to a GameCoordinator)."""

    seats = SEATS

    def __init__(self, seed: int, *, target: int = MATCH_TARGET):
        self._seeds = seed_stream(seed)
        self.match = MatchState(target=target)
        self._deal = None
        self._winner_team: Optional[int] = None

    # ------------------------------------------------------------ hooks

    def setup(self) -> list[Emission]:
        return [(None, self._score_event())] + self._begin_deal()

    def next_turn(self) -> int:
        return self._deal.turn

    def legal_moves(self, seat: int) -> list:
        cards = legal_moves(self._deal.hands[seat], self._deal.led_suit)
        return [card_to_wire(card) for card in cards]

    def view(self, seat: int) -> dict:
        led = self._deal.led_suit
        return {
            "your_seat": seat,
            "hand": [card_to_wire(card) for card in self._deal.hands[seat]],
            "trick": [
                {"seat": s, "card": card_to_wire(card)} for s, card in self._deal.trick
            ],
            "led": led.value if led is not None else None,
            "match_points": list(self.match.match_points),
        }

    def validate(self, seat: int, move) -> Optional[str]:
        try:
            card = card_from_wire(move)
        except ValueError:
            return f"unreadable card {move!r}"
        return validate_play(self._deal, seat, card)

    def apply_move(self, seat: int, move) -> list[Emission]:
        card = card_from_wire(move)
        outcome = apply_play(self._deal, seat, card)
        emissions: list[Emission] = [
            (None, {"type": "played", "seat": seat, "card": card_to_wire(card)})
        ]
        if outcome is None:
            return emissions
        emissions.append(
            (
                None,
                {
                    "type": "trick_result",
                    "winner_seat": outcome.winner_seat,
                    "cards": [card_to_wire(card) for _, card in outcome.cards],
                    "thirds": outcome.thirds,
                },
            )
        )
        if not outcome.is_last:
            return emissions
        self._score_finished_deal()
        emissions.append((None, self._score_event()))
        winner = match_winner(tuple(self.match.match_points), self.match.target)
        if winner is None:
            self.match.dealer = (self.match.dealer + 1) % SEATS
            self.match.deal_index += 1
            emissions.extend(self._begin_deal())
        else:
            self._winner_team = winner
            emissions.append((None, {"type": "game_over", "winner_team": winner}))
        return emissions

    def is_over(self) -> bool:
        return self._winner_team is not None

    def result(self) -> dict:
        return {
            "winner_team": self._winner_team,
            "winner_seats": [self._winner_team, self._winner_team + 2],
            "match_points": list(self.match.match_points),
            "deals_played": self.match.deal_index + 1,
        }

    # ------------------------------------------------------------ internals

    def _begin_deal(self) -> list[Emission]:
        self._deal = start_deal(next(self._seeds), self.match.dealer)
        return [
            (
                seat,
                {
                    "type": "deal",
                    "hand": [card_to_wire(card) for card in self._deal.hands[seat]],
                    "dealer": self.match.dealer,
                    "your_seat": seat,
                },
            )
            for seat in range(SEATS)
        ]

    def _score_finished_deal(self) -> tuple[int, int]:
        thirds = score_deal(self._deal)
        for team in (0, 1):
            self.match.match_points[team] += thirds[team] // 3
        return thirds

    def _score_event(self) -> dict:
        return {
            "type": "score",
            "teams": [
                {"seats": [0, 2], "match_points": self.match.match_points[0]},
                {"seats": [1, 3], "match_points": self.match.match_points[1]},
            ],
        }


# ------------------------------------------------------------ player policies


def bot_choose(view: dict) -> dict:
    """Baseline bot: weakest legal card, suit declaration order on ties."""
    cards = [card_from_wire(wire) for wire in view["legal"]]
    card = min(cards, key=lambda c: (c.value.strength, _SUIT_ORDER[c.seed]))
    return card_to_wire(card)


def hostile_foreign_choose(view: dict) -> dict:
    """Hostile script: plays a card it was never dealt."""
    for card in new_deck().cards:
        wire = card_to_wire(card)
        if wire not in view["hand"]:
            return wire
    return view["legal"][0]  # unreachable: a hand never covers the deck


def hostile_revoke_choose(view: dict) -> dict:
    """Hostile script: breaks follow-suit the first time it can."""
    led = view.get("led")
    if led is not None:
        holds_led = any(wire["s"] == led for wire in view["hand"])
        off_suit = [wire for wire in view["hand"] if wire["s"] != led]
        if holds_led and off_suit:
            return off_suit[0]
    return bot_choose(view)


async def run_match(
    seed: int,
    endpoints: Sequence[PlayerEndpoint],
    *,
    room: Optional[ServerRoom] = None,
    clock: Clock = MONOTONIC,
    move_timeout: float = DEFAULT_MOVE_TIMEOUT,
    target: int = MATCH_TARGET,
    observer: Optional[Callable[[Optional[int], dict], None]] = None,
) -> MatchResult:
    """Play one match over the given four endpoints (seats in order;
    partnerships are seats (0, 2) against (1, 3))."""
    game = TressetteGame(seed, target=target)
    coordinator = GameCoordinator(game, room=room, clock=clock, move_timeout=move_timeout)
    if observer is not None:
        coordinator.add_observer(observer)
    for endpoint in endpoints:
        coordinator.register(endpoint)
    return await coordinator.run()
