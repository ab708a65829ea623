"""Session-token persistence for the terminal client.

The token is the only thing a player needs to reclaim a seat after a
crash, so the client writes it to a well-known per-user file on every
successful join. Resolution order for the location: the --token-file
flag, the ROOMKIT_TOKEN_PATH environment variable, then
~/.roomkit/token. The file is plaintext; the token is worthless once
the room closes, so there is nothing durable to protect.
"""

from __future__ import annotations

import os
from pathlib import Path
from typing import Optional

ENV_VAR = "ROOMKIT_TOKEN_PATH"
DEFAULT_PATH = Path.home() / ".roomkit" / "token"


def token_path(flag_value: Optional[str] = None) -> Path:
    if flag_value:
        return Path(flag_value)
    env = os.environ.get(ENV_VAR)
    if env:
        return Path(env)
    return DEFAULT_PATH


def save_token(path: Path, token: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(token + "\n", encoding="utf-8")


def load_token(path: Path) -> Optional[str]:
    try:
        text = path.read_text(encoding="utf-8").strip()
    except OSError:
        return None
    return text or None
