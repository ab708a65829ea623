"""The host's HTTP side door: GET /rooms plus the static web client.

Browsers cannot hear UDP beacons, so the host exposes the same
advertisements over plain HTTP for the web client to poll. The server
is a deliberately small GET/HEAD-only responder on asyncio streams —
no routing table, no keep-alive, one request per connection — because
its entire job is two endpoints on a LAN.

Responses always carry `Access-Control-Allow-Origin: *` so a web
client served from any origin (including a file:// dev build) can call
/rooms. While the room is not open yet /rooms answers 503, which the
web client treats as "keep polling".

Static files are served from an optional web root; the path is
resolved and must stay inside the root, so traversal attempts 404.
"""

from __future__ import annotations

import asyncio
import json
import logging
import mimetypes
from pathlib import Path
from typing import Callable, Optional

logger = logging.getLogger(__name__)

MAX_REQUEST_BYTES = 8192

_PLACEHOLDER = b"""<!doctype html>
<title>roomkit host</title>
<p>This host serves room advertisements at <a href="/rooms">/rooms</a>.
No web client is installed (start the host with --web-root).</p>
"""


class HttpBridge:
    """Serves /rooms from `ads_source` and files from `web_root`.

    `ads_source` returns the current advertisement list as JSON-ready
    dicts, or None while the room is not open yet (mapped to 503).
    """

    def __init__(
        self,
        ads_source: Callable[[], Optional[list[dict]]],
        *,
        host: str = "0.0.0.0",
        port: int = 4702,
        web_root: Optional[Path] = None,
    ):
        self._ads_source = ads_source
        self._host = host
        self._requested_port = port
        self._web_root = web_root.resolve() if web_root is not None else None
        self._server: Optional[asyncio.base_events.Server] = None

    @property
    def port(self) -> int:
        """The bound port (useful when constructed with port 0)."""
        if self._server is None:
            return self._requested_port
        return self._server.sockets[0].getsockname()[1]

    async def start(self) -> None:
        self._server = await asyncio.start_server(
            self._serve, self._host, self._requested_port
        )

    async def stop(self) -> None:
        if self._server is not None:
            self._server.close()
            await self._server.wait_closed()
            self._server = None

    async def _serve(self, reader: asyncio.StreamReader, writer: asyncio.StreamWriter):
        try:
            request = await asyncio.wait_for(
                reader.readuntil(b"\r\n\r\n"), timeout=10.0
            )
        except (asyncio.TimeoutError, asyncio.IncompleteReadError, asyncio.LimitOverrunError):
            writer.close()
            return
        try:
            method, target = self._parse_request_line(request)
            if method not in ("GET", "HEAD"):
                self._respond(writer, 405, b"method not allowed\n", "text/plain")
            else:
                self._route(writer, method, target)
        except Exception:
            logger.exception("http request handling failed")
            try:
                self._respond(writer, 500, b"internal error\n", "text/plain")
            except Exception:
                pass
        try:
            await writer.drain()
        except ConnectionError:
            pass
        writer.close()

    @staticmethod
    def _parse_request_line(request: bytes) -> tuple[str, str]:
        line = request.split(b"\r\n", 1)[0].decode("latin-1")
        parts = line.split(" ")
        if len(parts) != 3:
            raise ValueError(f"malformed request line: {line!r}")
        return parts[0], parts[1]

    def _route(self, writer: asyncio.StreamWriter, method: str, target: str) -> None:
        path = target.split("?", 1)[0]
        if path == "/rooms":
            ads = self._ads_source()
            if ads is None:
                body = json.dumps({"error": "room not open"}).encode("utf-8")
                self._respond(writer, 503, body, "application/json", method)
            else:
                body = json.dumps(ads).encode("utf-8")
                self._respond(writer, 200, body, "application/json", method)
            return
        self._serve_static(writer, method, path)

    def _serve_static(self, writer: asyncio.StreamWriter, method: str, path: str) -> None:
        if self._web_root is None:
            if path == "/":
                self._respond(writer, 200, _PLACEHOLDER, "text/html", method)
            else:
                self._respond(writer, 404, b"not found\n", "text/plain", method)
            return
        relative = path.lstrip("/") or "index.html"
        candidate = (self._web_root / relative).resolve()
        if not candidate.is_relative_to(self._web_root) or not candidate.is_file():
            self._respond(writer, 404, b"not found\n", "text/plain", method)
            return
        ctype = mimetypes.guess_type(candidate.name)[0] or "application/octet-stream"
        self._respond(writer, 200, candidate.read_bytes(), ctype, method)

    @staticmethod
    def _respond(
        writer: asyncio.StreamWriter,
        status: int,
        body: bytes,
        content_type: str,
        method: str = "GET",
    ) -> None:
        reasons = {200: "OK", 404: "Not Found", 405: "Method Not Allowed",
                   500: "Internal Server Error", 503: "Service Unavailable"}
        head = (
            f"HTTP/1.1 {status} {reasons.get(status, 'Unknown')}\r\n"
            f"Content-Type: {content_type}\r\n"
            f"Content-Length: {len(body)}\r\n"
            "Access-Control-Allow-Origin: *\r\n"
            "Connection: close\r\n"
            "\r\n"
        ).encode("latin-1")
        writer.write(head if method == "HEAD" else head + body)
