// The room connection: one WebSocket, one envelope per text message,
// subprotocol roomkit.v1 required on both ends. join/rejoin perform the
// handshake and hand back a RoomClient; everything after that is a
// dispatch loop from envelopes to the handler set. The WebSocket
// constructor is injected so tests (and non-browser hosts) can supply
// their own implementation.

import {
  Card,
  Envelope,
  ProtocolError,
  SUBPROTOCOL,
  decodeEnvelope,
  encodeEnvelope,
} from "./protocol.js";

export interface WebSocketLike {
  readonly protocol: string;
  onopen: ((event: unknown) => void) | null;
  onmessage: ((event: { data: unknown }) => void) | null;
  onclose: ((event: unknown) => void) | null;
  onerror: ((event: unknown) => void) | null;
  send(data: string): void;
  close(code?: number, reason?: string): void;
}

export type WebSocketFactory = (url: string, protocols: string[]) => WebSocketLike;

export class RoomSocketError extends Error {}

export class HandshakeRejected extends Error {
  constructor(
    public readonly kind: "join" | "rejoin",
    public readonly reason: string,
  ) {
    super(`${kind} rejected: ${reason}`);
  }
}

export interface Snapshot {
  seq: number;
  room_id: string;
  room_name: string;
  app_tag: string;
  capacity: number;
  participants: { participant_id: string; display_name: string; state: string }[];
  digest: unknown;
}

function isRecord(x: unknown): x is Record<string, unknown> {
  return typeof x === "object" && x !== null && !Array.isArray(x);
}

function snapshotOf(x: unknown): Snapshot {
  if (!isRecord(x) || typeof x.seq !== "number" || typeof x.room_id !== "string") {
    throw new RoomSocketError("handshake reply carries no usable snapshot");
  }
  const participants: Snapshot["participants"] = [];
  if (Array.isArray(x.participants)) {
    for (const entry of x.participants) {
      if (
        isRecord(entry) &&
        typeof entry.participant_id === "string" &&
        typeof entry.display_name === "string" &&
        typeof entry.state === "string"
      ) {
        participants.push({
          participant_id: entry.participant_id,
          display_name: entry.display_name,
          state: entry.state,
        });
      }
    }
  }
  return {
    seq: x.seq,
    room_id: x.room_id,
    room_name: typeof x.room_name === "string" ? x.room_name : "",
    app_tag: typeof x.app_tag === "string" ? x.app_tag : "",
    capacity: typeof x.capacity === "number" ? x.capacity : 0,
    participants,
    digest: x.digest,
  };
}

function messageText(data: unknown): string {
  if (typeof data === "string") return data;
  if (data instanceof ArrayBuffer) return new TextDecoder().decode(data);
  if (ArrayBuffer.isView(data)) return new TextDecoder().decode(data as Uint8Array);
  return String(data);
}

interface HandshakeResult {
  ws: WebSocketLike;
  reply: Envelope;
}

function handshake(
  url: string,
  factory: WebSocketFactory,
  request: string,
  timeoutMs: number,
): Promise<HandshakeResult> {
  return new Promise((resolve, reject) => {
    let ws: WebSocketLike;
    try {
      ws = factory(url, [SUBPROTOCOL]);
    } catch (err) {
      reject(new RoomSocketError(`cannot open ${url}: ${String(err)}`));
      return;
    }
    let settled = false;
    const timer = setTimeout(() => {
      fail(new RoomSocketError(`handshake with ${url} timed out`));
    }, timeoutMs);
    function fail(err: Error): void {
      if (settled) return;
      settled = true;
      clearTimeout(timer);
      try {
        ws.close();
      } catch {
        // already gone
      }
      reject(err);
    }
    ws.onerror = () => fail(new RoomSocketError(`connection to ${url} failed`));
    ws.onclose = () => fail(new RoomSocketError(`connection to ${url} closed during handshake`));
    ws.onopen = () => {
      if (ws.protocol !== SUBPROTOCOL) {
        fail(new RoomSocketError(`server did not accept subprotocol ${SUBPROTOCOL}`));
        return;
      }
      ws.send(request);
    };
    ws.onmessage = (event) => {
      if (settled) return;
      settled = true;
      clearTimeout(timer);
      let reply: Envelope;
      try {
        reply = decodeEnvelope(messageText(event.data));
      } catch (err) {
        try {
          ws.close();
        } catch {
          // already gone
        }
        reject(new RoomSocketError(`bad handshake reply: ${String(err)}`));
        return;
      }
      resolve({ ws, reply });
    };
  });
}

export interface RoomHandlers {
  onRoomEvent(seq: number, variant: string, body: Record<string, unknown>): void;
  onRpcRequest(cid: number, method: string, params: Record<string, unknown>): void;
  onServerError(payload: Record<string, unknown>): void;
  onClose(): void;
}

const HANDSHAKE_TIMEOUT_MS = 10_000;

export class RoomClient {
  readonly participantId: string;
  readonly token: string;
  readonly snapshot: Snapshot;

  private handlers: RoomHandlers | null = null;
  private backlog: Envelope[] = [];
  private closed = false;
  private leaving = false;

  private constructor(
    private readonly ws: WebSocketLike,
    participantId: string,
    token: string,
    snapshot: Snapshot,
  ) {
    this.participantId = participantId;
    this.token = token;
    this.snapshot = snapshot;
    ws.onmessage = (event) => this.receive(event.data);
    ws.onclose = () => this.finish();
    ws.onerror = () => this.finish();
  }

  static async join(
    url: string,
    displayName: string,
    factory: WebSocketFactory,
    timeoutMs: number = HANDSHAKE_TIMEOUT_MS,
  ): Promise<RoomClient> {
    const request = encodeEnvelope("join_request", { display_name: displayName });
    const { ws, reply } = await handshake(url, factory, request, timeoutMs);
    if (reply.type === "join_rejected") {
      ws.close();
      const reason = typeof reply.payload.reason === "string" ? reply.payload.reason : "unknown";
      throw new HandshakeRejected("join", reason);
    }
    if (reply.type !== "join_accepted") {
      ws.close();
      throw new RoomSocketError(`unexpected handshake reply ${reply.type}`);
    }
    const pid = reply.payload.participant_id;
    const token = reply.payload.token;
    if (typeof pid !== "string" || typeof token !== "string") {
      ws.close();
      throw new RoomSocketError("join accepted without credentials");
    }
    return new RoomClient(ws, pid, token, snapshotOf(reply.payload.snapshot));
  }

  static async rejoin(
    url: string,
    token: string,
    factory: WebSocketFactory,
    timeoutMs: number = HANDSHAKE_TIMEOUT_MS,
  ): Promise<RoomClient> {
    const request = encodeEnvelope("rejoin_request", { token });
    const { ws, reply } = await handshake(url, factory, request, timeoutMs);
    if (reply.type === "rejoin_rejected") {
      ws.close();
      const reason = typeof reply.payload.reason === "string" ? reply.payload.reason : "unknown";
      throw new HandshakeRejected("rejoin", reason);
    }
    if (reply.type !== "rejoin_accepted") {
      ws.close();
      throw new RoomSocketError(`unexpected handshake reply ${reply.type}`);
    }
    const dots = token.split(".");
    const pid = dots.length === 3 ? (dots[1] as string) : "";
    return new RoomClient(ws, pid, token, snapshotOf(reply.payload.snapshot));
  }

  get isOpen(): boolean {
    return !this.closed;
  }

  /** Install the handler set and flush anything that arrived before it. */
  attach(handlers: RoomHandlers): void {
    this.handlers = handlers;
    const queued = this.backlog;
    this.backlog = [];
    for (const env of queued) this.dispatch(env);
    if (this.closed) handlers.onClose();
  }

  respondMove(cid: number, card: Card): void {
    this.sendEnvelope(encodeEnvelope("rpc_response", { move: card }, { cid, from: this.participantId }));
  }

  respond(cid: number, result: Record<string, unknown>): void {
    this.sendEnvelope(encodeEnvelope("rpc_response", result, { cid, from: this.participantId }));
  }

  /** Graceful exit; the room invalidates our token. */
  leave(): void {
    if (this.closed || this.leaving) return;
    this.leaving = true;
    this.sendEnvelope(encodeEnvelope("leave", {}, { from: this.participantId }));
    this.ws.close(1000, "leaving");
  }

  /** Drop the connection without leaving; the room parks our seat. */
  close(): void {
    if (this.closed) return;
    try {
      this.ws.close();
    } catch {
      // already gone
    }
    this.finish();
  }

  private sendEnvelope(text: string): void {
    if (this.closed) throw new RoomSocketError("room connection is closed");
    this.ws.send(text);
  }

  private receive(data: unknown): void {
    let env: Envelope;
    try {
      env = decodeEnvelope(messageText(data));
    } catch (err) {
      if (err instanceof ProtocolError) {
        this.close();
        return;
      }
      throw err;
    }
    if (this.handlers === null) {
      this.backlog.push(env);
      return;
    }
    this.dispatch(env);
  }

  private dispatch(env: Envelope): void {
    const handlers = this.handlers;
    if (handlers === null) return;
    switch (env.type) {
      case "room_event": {
        const { seq, variant, body } = env.payload;
        if (typeof seq === "number" && typeof variant === "string" && isRecord(body)) {
          handlers.onRoomEvent(seq, variant, body);
        }
        return;
      }
      case "rpc_request": {
        const method = env.payload.method;
        const params = env.payload.params;
        if (env.cid !== undefined && typeof method === "string") {
          handlers.onRpcRequest(env.cid, method, isRecord(params) ? params : {});
        }
        return;
      }
      case "error": {
        handlers.onServerError(env.payload);
        return;
      }
      default:
        // Unknown envelope types are surfaced, not silently eaten.
        handlers.onServerError({ reason: `unexpected envelope type ${env.type}` });
    }
  }

  private finish(): void {
    if (this.closed) return;
    this.closed = true;
    if (this.handlers !== null) this.handlers.onClose();
  }
}
