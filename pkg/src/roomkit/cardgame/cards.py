"""Generic card, deck, hand, and team abstractions.

A game supplies its own seed (suit) and value enumerations; the only
contract is that a value exposes an integer `strength` that is distinct
within the game, higher meaning stronger. Card equality is (seed,
value) equality; ordering compares strength, which is meaningful within
one seed — comparing across seeds is a game-level decision.

Decks hold an ordered card list whose index 0 is the top. shuffle() is
a pure function — the permutation is fully determined by the 64-bit
seed (see rng.py for the normative generator) — while deal() consumes
cards from the deck it is given, handing them out round-robin one at a
time so that the distribution order is itself reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Iterable, Iterator, Sequence

from ..rng import fisher_yates


class CardError(Exception):
    pass


class InsufficientCards(CardError):
    pass


class CardNotInHand(CardError):
    pass


@dataclass(frozen=True)
class Card:
    seed: Any
    value: Any

    @property
    def strength(self) -> int:
        return self.value.strength

    def __lt__(self, other: "Card") -> bool:
        return self.strength < other.strength

    def __le__(self, other: "Card") -> bool:
        return self.strength <= other.strength


@dataclass
class Deck:
    cards: list[Card]

    def __len__(self) -> int:
        return len(self.cards)

    def draw(self, count: int) -> list[Card]:
        if count > len(self.cards):
            raise InsufficientCards(f"asked for {count}, deck holds {len(self.cards)}")
        taken, self.cards = self.cards[:count], self.cards[count:]
        return taken


class Hand:
    """Card multiset owned by one player; removal of an absent card is an error."""

    def __init__(self, cards: Iterable[Card] = ()):
        self._cards: list[Card] = list(cards)

    @property
    def cards(self) -> tuple[Card, ...]:
        return tuple(self._cards)

    def add(self, card: Card) -> None:
        self._cards.append(card)

    def remove(self, card: Card) -> None:
        try:
            self._cards.remove(card)
        except ValueError:
            raise CardNotInHand(f"{card} is not in this hand") from None

    def __len__(self) -> int:
        return len(self._cards)

    def __contains__(self, card: Card) -> bool:
        return card in self._cards

    def __iter__(self) -> Iterator[Card]:
        return iter(self._cards)


@dataclass
class Team:
    team_id: int
    members: tuple[str, ...]
    score: int = 0


def validate_teams(teams: Sequence[Team]) -> None:
    seen: set[str] = set()
    for team in teams:
        for member in team.members:
            if member in seen:
                raise ValueError(f"participant {member} is on two teams")
            seen.add(member)


def shuffle(deck: Deck, seed: int) -> Deck:
    """Deterministic permutation of the deck under the documented PRNG."""
    return Deck(fisher_yates(deck.cards, seed))


def deal(deck: Deck, players: Sequence[Any], cards_each: int) -> list[Hand]:
    """Round-robin one card at a time from the top; the deck shrinks."""
    needed = len(players) * cards_each
    if needed > len(deck):
        raise InsufficientCards(
            f"{len(players)} players x {cards_each} cards needs {needed}, deck holds {len(deck)}"
        )
    hands = [Hand() for _ in players]
    for _ in range(cards_each):
        for hand in hands:
            hand.add(deck.draw(1)[0])
    return hands
