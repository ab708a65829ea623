// The controller: wires discovery, the room socket, the state reducers,
// and the renderer together. Every environment touchpoint (WebSocket
// constructor, fetch, storage) is injected, so the same App drives a
// real browser page and a simulated one in tests.
//
// Reconnection contract: the session token is persisted per room id the
// moment a join is accepted. A page load that finds a stored token sends
// rejoin_request instead of join_request; if the room answers expired or
// bad_token the stored session is dropped and the user is back at a
// fresh join screen with a banner explaining why.

import { FetchLike, RoomListing, RoomsUnavailable, fetchRooms, wsEndpoints } from "./discovery.js";
import { Card, MoveView, ProtocolError, moveViewOf } from "./protocol.js";
import {
  HandshakeRejected,
  RoomClient,
  WebSocketFactory,
} from "./client.js";
import { UiHandlers, UiState, bindUi, render } from "./render.js";
import {
  SequenceError,
  applyMoveRequest,
  applyRoomEvent,
  initialView,
  markPlayed,
  playableKeys,
  pushLog,
} from "./state.js";
import {
  KeyValueStore,
  clearSession,
  loadEndpoint,
  loadLastRoomId,
  loadToken,
  saveSession,
} from "./storage.js";

export interface AppEnv {
  wsFactory: WebSocketFactory;
  fetchFn: FetchLike;
  storage: KeyValueStore;
  /** Origin of the host's HTTP bridge, or null when there is none. */
  httpBase: string | null;
  defaultName: string;
}

const STALE_SESSION_REASONS = new Set(["expired", "bad_token", "unknown_participant"]);

export class App {
  readonly ui: UiState;
  private client: RoomClient | null = null;
  private endpoint: string | null = null;

  constructor(
    private readonly env: AppEnv,
    private readonly root: HTMLElement,
  ) {
    this.ui = { view: initialView(), rooms: null, roomsError: null, busy: false };
    bindUi(root, this.handlers());
  }

  private handlers(): UiHandlers {
    return {
      onJoinRoom: (roomId, name) => void this.joinListed(roomId, name),
      onManualJoin: (endpoint, name) => void this.join(endpoint, name),
      onPlay: (card) => this.play(card),
      onLeave: () => this.leaveRoom(),
      onRejoin: () => void this.rejoinCurrent(),
      onRefreshRooms: () => void this.refreshRooms(true),
      onDismissBanner: () => {
        this.ui.view.banner = null;
        this.draw();
      },
    };
  }

  draw(): void {
    render(this.ui, this.root);
  }

  /** Page load: list rooms, then resume a stored session if one matches. */
  async boot(): Promise<void> {
    this.draw();
    await this.refreshRooms(false);
    const resumed = await this.resumeStoredSession();
    if (!resumed) this.draw();
  }

  async refreshRooms(redraw: boolean): Promise<void> {
    if (this.env.httpBase === null) {
      this.ui.rooms = null;
      this.ui.roomsError = null;
    } else {
      try {
        this.ui.rooms = await fetchRooms(this.env.httpBase, this.env.fetchFn);
        this.ui.roomsError = null;
      } catch (err) {
        this.ui.rooms = null;
        this.ui.roomsError = err instanceof RoomsUnavailable ? err.message : String(err);
      }
    }
    if (redraw) this.draw();
  }

  private storedSessionFor(roomId: string): { token: string; endpoint: string } | null {
    const token = loadToken(this.env.storage, roomId);
    if (token === null) return null;
    let endpoint = loadEndpoint(this.env.storage, roomId);
    if (endpoint === null && this.ui.rooms !== null) {
      const listing = this.ui.rooms.find((r) => r.room_id === roomId);
      endpoint = listing !== undefined ? (wsEndpoints(listing)[0] ?? null) : null;
    }
    return endpoint !== null ? { token, endpoint } : null;
  }

  private async resumeStoredSession(): Promise<boolean> {
    const candidates: string[] = [];
    const last = loadLastRoomId(this.env.storage);
    if (last !== null) candidates.push(last);
    for (const listing of this.ui.rooms ?? []) {
      if (!candidates.includes(listing.room_id)) candidates.push(listing.room_id);
    }
    for (const roomId of candidates) {
      const session = this.storedSessionFor(roomId);
      if (session === null) continue;
      return await this.rejoin(roomId, session.endpoint, session.token);
    }
    return false;
  }

  private listingById(roomId: string): RoomListing | null {
    return this.ui.rooms?.find((r) => r.room_id === roomId) ?? null;
  }

  async joinListed(roomId: string, name: string): Promise<void> {
    const listing = this.listingById(roomId);
    if (listing === null) {
      this.ui.view.banner = "that room is gone — refresh the list";
      this.draw();
      return;
    }
    const endpoint = wsEndpoints(listing)[0];
    if (endpoint === undefined) {
      this.ui.view.banner = `${listing.room_name} offers no ws endpoint`;
      this.draw();
      return;
    }
    await this.join(endpoint, name);
  }

  async join(endpoint: string, name: string): Promise<void> {
    this.ui.busy = true;
    this.ui.view.banner = null;
    this.draw();
    try {
      const client = await RoomClient.join(
        endpoint,
        name !== "" ? name : this.env.defaultName,
        this.env.wsFactory,
      );
      saveSession(this.env.storage, client.snapshot.room_id, client.token, endpoint);
      this.enterRoom(client, endpoint);
    } catch (err) {
      this.ui.view.phase = "lobby";
      this.ui.view.banner =
        err instanceof HandshakeRejected ? `join rejected: ${err.reason}` : String(err);
    } finally {
      this.ui.busy = false;
      this.draw();
    }
  }

  /** Rejoin a stored session; false means the lobby should be shown. */
  private async rejoin(roomId: string, endpoint: string, token: string): Promise<boolean> {
    this.ui.busy = true;
    this.draw();
    try {
      const client = await RoomClient.rejoin(endpoint, token, this.env.wsFactory);
      this.enterRoom(client, endpoint);
      return true;
    } catch (err) {
      if (err instanceof HandshakeRejected && STALE_SESSION_REASONS.has(err.reason)) {
        clearSession(this.env.storage, roomId);
        this.ui.view = initialView();
        this.ui.view.banner = `previous session ${err.reason.replaceAll("_", " ")} — join again`;
      } else {
        this.ui.view.banner =
          err instanceof HandshakeRejected ? `rejoin rejected: ${err.reason}` : String(err);
        if (this.ui.view.phase !== "lobby") this.ui.view.phase = "disconnected";
      }
      return false;
    } finally {
      this.ui.busy = false;
      this.draw();
    }
  }

  async rejoinCurrent(): Promise<void> {
    const roomId = this.ui.view.roomId;
    if (roomId === null) return;
    const session = this.storedSessionFor(roomId);
    if (session === null) {
      this.ui.view = initialView();
      this.ui.view.banner = "no stored session — join again";
      this.draw();
      return;
    }
    await this.rejoin(roomId, session.endpoint, session.token);
  }

  private enterRoom(client: RoomClient, endpoint: string): void {
    const view = this.ui.view;
    const rejoining = view.roomId === client.snapshot.room_id && view.hand !== null;
    this.client = client;
    this.endpoint = endpoint;
    view.phase = "seated";
    view.banner = null;
    view.roomId = client.snapshot.room_id;
    view.roomName = client.snapshot.room_name;
    view.participantId = client.participantId;
    view.lastSeq = client.snapshot.seq;
    view.joinOrder = client.snapshot.participants.map((p) => p.participant_id);
    for (const p of client.snapshot.participants) view.names[p.participant_id] = p.display_name;
    if (rejoining) {
      // Own cards are still good — we cannot have played while away — but
      // whose turn it is and what lies on the table must come back from
      // the wire (the re-sent move prompt, or simply the next event).
      view.trick = [];
      view.turnSeat = null;
      view.legal = [];
      view.pendingCid = null;
      view.pendingPlay = null;
      pushLog(view, "reconnected");
    }
    client.attach({
      onRoomEvent: (seq, variant, body) => {
        try {
          applyRoomEvent(view, seq, variant, body);
        } catch (err) {
          if (err instanceof SequenceError) {
            view.banner = `out-of-order event from room (${err.message}); disconnecting`;
            client.close();
          } else {
            throw err;
          }
        }
        this.draw();
      },
      onRpcRequest: (cid, method, params) => {
        if (method !== "request_move") {
          client.respond(cid, {});
          return;
        }
        let move: MoveView;
        try {
          move = moveViewOf(params.view);
        } catch (err) {
          view.banner = err instanceof ProtocolError ? err.message : String(err);
          this.draw();
          return;
        }
        applyMoveRequest(view, cid, move);
        this.draw();
      },
      onServerError: (payload) => {
        pushLog(view, `room error: ${JSON.stringify(payload)}`);
        this.draw();
      },
      onClose: () => {
        this.client = null;
        if (view.phase === "seated") {
          view.phase = "disconnected";
          view.banner = "connection lost — rejoin or reload";
        }
        this.draw();
      },
    });
    this.draw();
  }

  play(card: Card): void {
    const view = this.ui.view;
    const cid = view.pendingCid;
    if (this.client === null || cid === null) return;
    if (!playableKeys(view).has(`${card.s}:${card.r}`)) return;
    markPlayed(view, card);
    this.client.respondMove(cid, card);
    this.draw();
  }

  leaveRoom(): void {
    const roomId = this.ui.view.roomId;
    if (this.client !== null) this.client.leave();
    this.client = null;
    if (roomId !== null) clearSession(this.env.storage, roomId);
    this.ui.view = initialView();
    this.draw();
    void this.refreshRooms(true);
  }

  /** Tear down like a closing tab: no leave, storage untouched. */
  dispose(): void {
    if (this.client !== null) {
      this.client.close();
      this.client = null;
    }
  }
}
