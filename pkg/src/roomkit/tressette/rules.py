"""Tressette rules: deck, strength order, legality, tricks, scoring.

Everything here is a pure function over explicit state; the game engine
in game.py owns sequencing and events. Conventions, documented
normatively so independent implementations agree:

* The deck is the Italian 40-card deck: four suits (denari, coppe,
  spade, bastoni — declaration order) of ten ranks. Within a suit the
  ranks beat each other in the order 3, 2, Ace, King, Knight, Knave,
  7, 6, 5, 4 (strength 10 down to 1). There are no trumps.
* Card points are kept in integer thirds: the Ace is worth 3 thirds,
  the 3, 2, King, Knight, and Knave 1 third each, everything else 0.
  The deck therefore holds 32 thirds; the team taking the last trick
  gets 3 extra thirds, for exactly 35 per deal. At a deal boundary a
  team scores floor(thirds / 3) match points and the remainder is
  discarded — so every deal awards exactly 11 match points in total.
* Seats are 0..3; team 0 is seats (0, 2), team 1 is seats (1, 3). Turn
  order is ascending seat index modulo 4. The deal's first leader is
  the seat after the dealer; each trick's winner leads the next.
* A player must follow the led suit when able; leading or holding no
  card of the led suit frees the whole hand.
* A match runs to 21 match points, checked only at deal boundaries; if
  both teams cross 21 with equal scores, another deal is played.

Wire encoding for a card: {"s": "<suit>", "r": "<rank symbol>"} with
rank symbols 3 2 A K C F 7 6 5 4 (C = cavallo/Knight, F =
fante/Knave).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

from ..cardgame import Card, Deck, Hand, deal, shuffle

MATCH_TARGET = 21
LAST_TRICK_THIRDS = 3
DEAL_THIRDS = 35  # 32 in the cards plus the last-trick bonus
CARDS_PER_HAND = 10
SEATS = 4


class Suit(Enum):
    DENARI = "denari"
    COPPE = "coppe"
    SPADE = "spade"
    BASTONI = "bastoni"


class Rank(Enum):
    """Rank with wire symbol, in-suit strength, and point thirds."""

    THREE = ("3", 10, 1)
    TWO = ("2", 9, 1)
    ACE = ("A", 8, 3)
    KING = ("K", 7, 1)
    KNIGHT = ("C", 6, 1)
    KNAVE = ("F", 5, 1)
    SEVEN = ("7", 4, 0)
    SIX = ("6", 3, 0)
    FIVE = ("5", 2, 0)
    FOUR = ("4", 1, 0)

    def __init__(self, symbol: str, strength: int, thirds: int):
        self.symbol = symbol
        self.strength = strength
        self.thirds = thirds


_SUIT_BY_WIRE = {suit.value: suit for suit in Suit}
_RANK_BY_WIRE = {rank.symbol: rank for rank in Rank}


class IncompleteTrick(Exception):
    pass


class IncompleteDeal(Exception):
    pass


def new_deck() -> Deck:
    """The full deck in canonical order: suits as declared, ranks
    strength-descending within each suit."""
    return Deck([Card(suit, rank) for suit in Suit for rank in Rank])


def card_to_wire(card: Card) -> dict:
    return {"s": card.seed.value, "r": card.value.symbol}


def card_from_wire(obj: object) -> Card:
    if not isinstance(obj, dict):
        raise ValueError(f"card must be an object, got {type(obj).__name__}")
    suit = _SUIT_BY_WIRE.get(obj.get("s"))
    rank = _RANK_BY_WIRE.get(obj.get("r"))
    if suit is None or rank is None:
        raise ValueError(f"unknown card {obj!r}")
    return Card(suit, rank)


def card_thirds(card: Card) -> int:
    return card.value.thirds


def legal_moves(hand: Hand, led_suit: Optional[Suit]) -> list[Card]:
    """Cards the hand may play: the led suit when held, else everything."""
    cards = list(hand)
    if led_suit is None:
        return cards
    matching = [c for c in cards if c.seed is led_suit]
    return matching if matching else cards


def trick_winner(plays: list[tuple[int, Card]]) -> int:
    """Seat that takes a complete trick: strongest card of the led suit."""
    if len(plays) != SEATS:
        raise IncompleteTrick(f"trick has {len(plays)} of {SEATS} plays")
    led = plays[0][1].seed
    winner, _ = max(
        ((seat, card) for seat, card in plays if card.seed is led),
        key=lambda play: play[1].strength,
    )
    return winner


@dataclass
class DealState:
    """One deal in progress: hands, the open trick, and captures by team."""

    hands: list[Hand]
    dealer: int
    leader: int
    trick: list[tuple[int, Card]] = field(default_factory=list)
    captured: tuple[list[Card], list[Card]] = field(default_factory=lambda: ([], []))
    last_trick_winner: Optional[int] = None
    tricks_done: int = 0

    @property
    def led_suit(self) -> Optional[Suit]:
        return self.trick[0][1].seed if self.trick else None

    @property
    def turn(self) -> int:
        return (self.leader + len(self.trick)) % SEATS

    @property
    def complete(self) -> bool:
        return self.tricks_done == CARDS_PER_HAND


@dataclass(frozen=True)
class TrickOutcome:
    winner_seat: int
    cards: tuple[tuple[int, Card], ...]  # in play order
    thirds: int  # thirds this trick banked, last-trick bonus included
    is_last: bool


def start_deal(seed: int, dealer: int) -> DealState:
    """Shuffle under the deal seed and serve ten cards to each seat."""
    deck = shuffle(new_deck(), seed)
    hands = deal(deck, list(range(SEATS)), CARDS_PER_HAND)
    return DealState(hands=hands, dealer=dealer, leader=(dealer + 1) % SEATS)


def validate_play(state: DealState, seat: int, card: Card) -> Optional[str]:
    """None when the play is clean, else a human-readable anomaly reason.

    This is the server-side gate: it must give a verdict for any input,
    including cards the player was never dealt."""
    if state.complete:
        return "deal is already complete"
    if seat != state.turn:
        return "played out of turn"
    if card not in state.hands[seat]:
        return "card not in hand"
    led = state.led_suit
    if led is not None and card.seed is not led:
        if any(c.seed is led for c in state.hands[seat]):
            return f"revoke: must follow {led.value}"
    return None


def apply_play(state: DealState, seat: int, card: Card) -> Optional[TrickOutcome]:
    """Commit a validated play; returns the outcome when a trick closes."""
    verdict = validate_play(state, seat, card)
    if verdict is not None:
        raise ValueError(verdict)
    state.hands[seat].remove(card)
    state.trick.append((seat, card))
    if len(state.trick) < SEATS:
        return None
    plays = tuple(state.trick)
    winner = trick_winner(state.trick)
    state.captured[winner % 2].extend(card for _, card in plays)
    state.trick.clear()
    state.tricks_done += 1
    state.leader = winner
    state.last_trick_winner = winner
    is_last = state.complete
    thirds = sum(card_thirds(card) for _, card in plays)
    if is_last:
        thirds += LAST_TRICK_THIRDS
    return TrickOutcome(winner_seat=winner, cards=plays, thirds=thirds, is_last=is_last)


def score_deal(state: DealState) -> tuple[int, int]:
    """Thirds per team for a finished deal, last-trick bonus included."""
    if not state.complete:
        raise IncompleteDeal(f"{state.tricks_done} of {CARDS_PER_HAND} tricks played")
    thirds = [
        sum(card_thirds(card) for card in pile) for pile in state.captured
    ]
    thirds[state.last_trick_winner % 2] += LAST_TRICK_THIRDS
    return (thirds[0], thirds[1])


def match_winner(points: tuple[int, int], target: int = MATCH_TARGET) -> Optional[int]:
    """Winning team at a deal boundary, or None to play another deal.

    None either while nobody has reached the target or when both teams
    crossed it dead even — the match continues in both cases."""
    a, b = points
    if a < target and b < target:
        return None
    if a == b:
        return None
    return 0 if a > b else 1
