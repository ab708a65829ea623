"""Generic distributed card-game layer on top of the room protocol."""

from .cards import (
    Card,
    CardError,
    CardNotInHand,
    Deck,
    Hand,
    InsufficientCards,
    Team,
    deal,
    shuffle,
    validate_teams,
)
from .coordinator import (
    DEFAULT_MOVE_TIMEOUT,
    Emission,
    Game,
    GameComms,
    GameCoordinator,
    GameError,
    GameResult,
    IllegalMove,
    MoveTimeout,
    NullComms,
    PlayerGone,
    RoomComms,
    run_game,
)
from .endpoints import (
    GAME_EVENT_KEY,
    BotEndpoint,
    LocalEndpoint,
    PlayerEndpoint,
    RemoteEndpoint,
    attach_player,
    game_event_of,
)

__all__ = [
    "Card",
    "CardError",
    "CardNotInHand",
    "Deck",
    "Hand",
    "InsufficientCards",
    "Team",
    "deal",
    "shuffle",
    "validate_teams",
    "DEFAULT_MOVE_TIMEOUT",
    "Emission",
    "Game",
    "GameComms",
    "GameCoordinator",
    "GameError",
    "GameResult",
    "IllegalMove",
    "MoveTimeout",
    "NullComms",
    "PlayerGone",
    "RoomComms",
    "run_game",
    "GAME_EVENT_KEY",
    "BotEndpoint",
    "LocalEndpoint",
    "PlayerEndpoint",
    "RemoteEndpoint",
    "attach_player",
    "game_event_of",
]
