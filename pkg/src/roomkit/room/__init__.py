"""Rooms: registration, signed session tokens, rejoin, events, and RPC."""

from .client import ClientRoom, JoinRejected, RejoinRejected, client_join, client_rejoin
from .events import ROOM_EVENT_VARIANTS, SUBSCRIPTION_LIMIT, RoomEvent, Subscription
from .server import (
    DEFAULT_SESSION_TIMEOUT,
    ParticipantGone,
    ParticipantRecord,
    ParticipantState,
    RoomConfig,
    RoomError,
    ServerRoom,
    UnknownParticipant,
    open_room,
)
from .tokens import SessionToken, compute_mac, issue_token, verify_token

__all__ = [
    "ClientRoom",
    "JoinRejected",
    "RejoinRejected",
    "client_join",
    "client_rejoin",
    "ROOM_EVENT_VARIANTS",
    "SUBSCRIPTION_LIMIT",
    "RoomEvent",
    "Subscription",
    "DEFAULT_SESSION_TIMEOUT",
    "ParticipantGone",
    "ParticipantRecord",
    "ParticipantState",
    "RoomConfig",
    "RoomError",
    "ServerRoom",
    "UnknownParticipant",
    "open_room",
    "SessionToken",
    "compute_mac",
    "issue_token",
    "verify_token",
]
