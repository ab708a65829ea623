import { describe, expect, test } from "vitest";

import {
  MemoryStore,
  clearSession,
  clearToken,
  isWellFormedToken,
  loadEndpoint,
  loadLastRoomId,
  loadToken,
  participantIdFromToken,
  saveSession,
  saveToken,
  tokenKey,
} from "../src/storage.js";

const TOKEN = `${"1".repeat(32)}.${"2".repeat(16)}.${"3".repeat(32)}`;

describe("token persistence", () => {
  test("tokens are keyed by room id", () => {
    const store = new MemoryStore();
    saveToken(store, "room-a", TOKEN);
    saveToken(store, "room-b", "x");
    expect(loadToken(store, "room-a")).toBe(TOKEN);
    expect(loadToken(store, "room-b")).toBe("x");
    expect(loadToken(store, "room-c")).toBeNull();
    expect(tokenKey("room-a")).not.toBe(tokenKey("room-b"));
    clearToken(store, "room-a");
    expect(loadToken(store, "room-a")).toBeNull();
    expect(loadToken(store, "room-b")).toBe("x");
  });

  test("a whole session stores token, endpoint, and last-room pointer", () => {
    const store = new MemoryStore();
    saveSession(store, "room-a", TOKEN, "ws://host:1");
    expect(loadToken(store, "room-a")).toBe(TOKEN);
    expect(loadEndpoint(store, "room-a")).toBe("ws://host:1");
    expect(loadLastRoomId(store)).toBe("room-a");
    clearSession(store, "room-a");
    expect(loadToken(store, "room-a")).toBeNull();
    expect(loadEndpoint(store, "room-a")).toBeNull();
    expect(loadLastRoomId(store)).toBeNull();
  });

  test("clearing one room's session keeps another's last-room pointer", () => {
    const store = new MemoryStore();
    saveSession(store, "room-a", TOKEN, "ws://host:1");
    saveSession(store, "room-b", TOKEN, "ws://host:2");
    clearSession(store, "room-a");
    expect(loadLastRoomId(store)).toBe("room-b");
  });
});

describe("token shape", () => {
  test("well-formed tokens yield their participant id", () => {
    expect(isWellFormedToken(TOKEN)).toBe(true);
    expect(participantIdFromToken(TOKEN)).toBe("2".repeat(16));
  });

  test.each([
    ["empty", ""],
    ["two fields", `${"1".repeat(32)}.${"2".repeat(16)}`],
    ["bad lengths", "ab.cd.ef"],
    ["uppercase hex", `${"A".repeat(32)}.${"2".repeat(16)}.${"3".repeat(32)}`],
    ["non-hex", `${"g".repeat(32)}.${"2".repeat(16)}.${"3".repeat(32)}`],
  ])("malformed token (%s) yields null", (_label, token) => {
    expect(isWellFormedToken(token)).toBe(false);
    expect(participantIdFromToken(token)).toBeNull();
  });
});
