"""Tressette: the concrete four-player partnership game."""

from .game import (
    MatchResult,
    MatchState,
    TressetteGame,
    bot_choose,
    hostile_foreign_choose,
    hostile_revoke_choose,
    run_match,
)
from .rules import (
    CARDS_PER_HAND,
    DEAL_THIRDS,
    LAST_TRICK_THIRDS,
    MATCH_TARGET,
    SEATS,
    DealState,
    IncompleteDeal,
    IncompleteTrick,
    Rank,
    Suit,
    TrickOutcome,
    apply_play,
    card_from_wire,
    card_thirds,
    card_to_wire,
    legal_moves,
    match_winner,
    new_deck,
    score_deal,
    start_deal,
    trick_winner,
    validate_play,
)

__all__ = [
    "MatchResult",
    "MatchState",
    "TressetteGame",
    "bot_choose",
    "hostile_foreign_choose",
    "hostile_revoke_choose",
    "run_match",
    "CARDS_PER_HAND",
    "DEAL_THIRDS",
    "LAST_TRICK_THIRDS",
    "MATCH_TARGET",
    "SEATS",
    "DealState",
    "IncompleteDeal",
    "IncompleteTrick",
    "Rank",
    "Suit",
    "TrickOutcome",
    "apply_play",
    "card_from_wire",
    "card_thirds",
    "card_to_wire",
    "legal_moves",
    "match_winner",
    "new_deck",
    "score_deal",
    "start_deal",
    "trick_winner",
    "validate_play",
]
