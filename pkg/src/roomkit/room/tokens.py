"""Session tokens: the rejoin credential.

A token binds (token_id, participant_id, room_id) under the room's
secret key: mac = first 16 bytes of HMAC-SHA256(secret_key,
token_id || participant_id || room_id), hex-encoded. Textual form is
`token_id.participant_id.mac`. The server never stores tokens — it
recomputes the MAC on every rejoin, so any tampered field fails
verification. Forgery odds are bounded by the 128-bit truncation.

The secret key never leaves the server process; clients hold only the
token text.
"""

from __future__ import annotations

import hashlib
import hmac
import secrets
from dataclasses import dataclass

TOKEN_ID_BYTES = 16
MAC_HEX_CHARS = 32  # first 16 bytes of the HMAC, hex-encoded


@dataclass(frozen=True)
class SessionToken:
    token_id: str
    participant_id: str
    mac: str

    def __str__(self) -> str:
        return f"{self.token_id}.{self.participant_id}.{self.mac}"

    @classmethod
    def parse(cls, text: str) -> "SessionToken":
        parts = text.split(".")
        if len(parts) != 3 or not all(parts):
            raise ValueError("token is not token_id.participant_id.mac")
        return cls(token_id=parts[0], participant_id=parts[1], mac=parts[2])


def compute_mac(secret_key: bytes, token_id: str, participant_id: str, room_id: str) -> str:
    message = (token_id + participant_id + room_id).encode("utf-8")
    return hmac.new(secret_key, message, hashlib.sha256).hexdigest()[:MAC_HEX_CHARS]


def issue_token(secret_key: bytes, participant_id: str, room_id: str) -> SessionToken:
    token_id = secrets.token_hex(TOKEN_ID_BYTES)
    return SessionToken(
        token_id=token_id,
        participant_id=participant_id,
        mac=compute_mac(secret_key, token_id, participant_id, room_id),
    )


def verify_token(secret_key: bytes, room_id: str, token: SessionToken) -> bool:
    expected = compute_mac(secret_key, token.token_id, token.participant_id, room_id)
    return hmac.compare_digest(expected, token.mac)
