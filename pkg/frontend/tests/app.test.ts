// @vitest-environment happy-dom

// App orchestration against scripted sockets: the stored-session resume
// paths, the manual fallback, and a click-to-play round trip. The real
// server is exercised end to end in e2e.test.ts.

import { beforeEach, describe, expect, test } from "vitest";

import { App, AppEnv } from "../src/app.js";
import { FetchLike } from "../src/discovery.js";
import { decodeEnvelope, encodeEnvelope } from "../src/protocol.js";
import { MemoryStore, loadLastRoomId, loadToken, saveSession } from "../src/storage.js";
import {
  FakeSocket,
  TOKEN,
  acceptedJoin,
  acceptedRejoin,
  gameBroadcast,
  moveRequest,
} from "./fakes.js";

const LISTING = {
  room_id: "room-1",
  room_name: "fake room",
  app_tag: "tressette",
  endpoints: ["ws://h:1"],
  protocol_version: 1,
  capacity: 4,
  occupied: 3,
  interval: 1,
};

const tick = () => new Promise((resolve) => setTimeout(resolve, 0));

let root: HTMLElement;
let sockets: FakeSocket[];
let store: MemoryStore;

beforeEach(() => {
  document.body.innerHTML = `<div id="app"></div>`;
  root = document.getElementById("app") as HTMLElement;
  sockets = [];
  store = new MemoryStore();
});

function env(overrides: Partial<AppEnv> = {}): AppEnv {
  const okFetch: FetchLike = async () => ({ ok: true, status: 200, json: async () => [LISTING] });
  return {
    wsFactory: (url, protocols) => {
      const socket = new FakeSocket(url, protocols);
      sockets.push(socket);
      return socket;
    },
    fetchFn: okFetch,
    storage: store,
    httpBase: "http://h",
    defaultName: "player",
    ...overrides,
  };
}

const FULL_VIEW = {
  your_seat: 0,
  hand: [
    { s: "denari", r: "3" },
    { s: "coppe", r: "A" },
  ],
  trick: [],
  led: null,
  match_points: [0, 0],
  legal: [{ s: "denari", r: "3" }],
  deadline: 30,
};

describe("boot", () => {
  test("no bridge and no session lands on the manual form", async () => {
    const app = new App(env({ httpBase: null }), root);
    await app.boot();
    expect(app.ui.view.phase).toBe("lobby");
    expect(root.querySelector("#endpoint-input")).not.toBeNull();
  });

  test("an unreachable bridge is reported and falls back to manual", async () => {
    const dead: FetchLike = async () => {
      throw new Error("ECONNREFUSED");
    };
    const app = new App(env({ fetchFn: dead }), root);
    await app.boot();
    expect(app.ui.rooms).toBeNull();
    expect(root.textContent).toContain("room list unavailable");
  });

  test("a stored session is resumed with rejoin_request on page load", async () => {
    saveSession(store, "room-1", TOKEN, "ws://h:1");
    const app = new App(env(), root);
    const booted = app.boot();
    await tick();
    const socket = sockets[0] as FakeSocket;
    socket.open();
    await tick();
    expect(decodeEnvelope(socket.sent[0] as string)).toMatchObject({
      type: "rejoin_request",
      payload: { token: TOKEN },
    });
    socket.deliver(acceptedRejoin(12));
    await booted;
    expect(app.ui.view.phase).toBe("seated");
    expect(app.ui.view.participantId).toBe("b".repeat(16));
    expect(app.ui.view.lastSeq).toBe(12);
  });

  test("an expired session is cleared and the lobby explains why", async () => {
    saveSession(store, "room-1", TOKEN, "ws://h:1");
    const app = new App(env(), root);
    const booted = app.boot();
    await tick();
    const socket = sockets[0] as FakeSocket;
    socket.open();
    await tick();
    socket.deliver(encodeEnvelope("rejoin_rejected", { reason: "expired" }));
    await booted;
    expect(app.ui.view.phase).toBe("lobby");
    expect(loadToken(store, "room-1")).toBeNull();
    expect(loadLastRoomId(store)).toBeNull();
    expect(root.querySelector(".banner")?.textContent).toContain("previous session expired");
    expect(root.querySelector('[data-action="join-room"]')).not.toBeNull();
  });

  test("a bad token is likewise cleared", async () => {
    saveSession(store, "room-1", TOKEN, "ws://h:1");
    const app = new App(env(), root);
    const booted = app.boot();
    await tick();
    (sockets[0] as FakeSocket).open();
    await tick();
    (sockets[0] as FakeSocket).deliver(encodeEnvelope("rejoin_rejected", { reason: "bad_token" }));
    await booted;
    expect(loadToken(store, "room-1")).toBeNull();
    expect(app.ui.view.phase).toBe("lobby");
  });
});

describe("joining and playing", () => {
  async function seatedApp(): Promise<{ app: App; socket: FakeSocket }> {
    const app = new App(env(), root);
    await app.boot();
    (root.querySelector('[data-action="join-room"]') as HTMLElement).click();
    await tick();
    const socket = sockets[0] as FakeSocket;
    socket.open();
    await tick();
    socket.deliver(acceptedJoin(0));
    await tick();
    expect(app.ui.view.phase).toBe("seated");
    return { app, socket };
  }

  test("join stores the session and renders the table", async () => {
    const { socket } = await seatedApp();
    expect(decodeEnvelope(socket.sent[0] as string)).toMatchObject({
      type: "join_request",
      payload: { display_name: "player" },
    });
    expect(loadToken(store, "room-1")).toBe(TOKEN);
    expect(loadLastRoomId(store)).toBe("room-1");
    expect(root.textContent).toContain("fake room");
  });

  test("a move prompt highlights cards; clicking answers its cid", async () => {
    const { app, socket } = await seatedApp();
    socket.deliver(moveRequest(7, FULL_VIEW));
    await tick();

    const legal = [...root.querySelectorAll<HTMLButtonElement>('button[data-legal="true"]')];
    expect(legal.map((b) => b.dataset.card)).toEqual(["denari:3"]);
    (legal[0] as HTMLButtonElement).click();

    const reply = decodeEnvelope(socket.sent.at(-1) as string);
    expect(reply).toMatchObject({
      type: "rpc_response",
      cid: 7,
      payload: { move: { s: "denari", r: "3" } },
    });
    expect(app.ui.view.pendingPlay).toEqual({ s: "denari", r: "3" });

    socket.deliver(gameBroadcast(1, { type: "played", seat: 0, card: { s: "denari", r: "3" } }));
    await tick();
    expect(app.ui.view.hand).toEqual([{ s: "coppe", r: "A" }]);
    expect(app.ui.view.pendingPlay).toBeNull();
  });

  test("a second click cannot double-answer the same prompt", async () => {
    const { socket } = await seatedApp();
    socket.deliver(moveRequest(7, FULL_VIEW));
    await tick();
    (root.querySelector('button[data-legal="true"]') as HTMLButtonElement).click();
    const sentBefore = socket.sent.length;
    (root.querySelector('button[data-card="denari:3"]') as HTMLButtonElement).click();
    (root.querySelector('button[data-card="coppe:A"]') as HTMLButtonElement).click();
    expect(socket.sent.length).toBe(sentBefore);
  });

  test("an unexpected disconnect offers rejoin and recovers", async () => {
    const { app, socket } = await seatedApp();
    socket.deliver(gameBroadcast(1, { type: "deal", hand: FULL_VIEW.hand, dealer: 0, your_seat: 0 }));
    await tick();
    socket.close();
    await tick();
    expect(app.ui.view.phase).toBe("disconnected");
    expect(root.textContent).toContain("connection lost");

    (root.querySelector('[data-action="rejoin"]') as HTMLElement).click();
    await tick();
    const second = sockets[1] as FakeSocket;
    second.open();
    await tick();
    expect(decodeEnvelope(second.sent[0] as string).type).toBe("rejoin_request");
    second.deliver(acceptedRejoin(30));
    await tick();
    expect(app.ui.view.phase).toBe("seated");
    expect(app.ui.view.hand).toEqual([
      { s: "denari", r: "3" },
      { s: "coppe", r: "A" },
    ]); // own cards survive a reconnect
    expect(app.ui.view.lastSeq).toBe(30);
  });

  test("leaving clears the stored session and returns to the lobby", async () => {
    const { app, socket } = await seatedApp();
    (root.querySelector('[data-action="leave"]') as HTMLElement).click();
    await tick();
    expect(decodeEnvelope(socket.sent.at(-1) as string).type).toBe("leave");
    expect(loadToken(store, "room-1")).toBeNull();
    expect(app.ui.view.phase).toBe("lobby");
  });
});
