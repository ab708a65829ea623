// Session-token persistence. Tokens are keyed by room id so a browser
// that has visited several rooms rejoins each with the right credential,
// and the participant id is recovered from the token itself (its middle
// dot-separated field) because a rejoin reply does not repeat it.

export interface KeyValueStore {
  getItem(key: string): string | null;
  setItem(key: string, value: string): void;
  removeItem(key: string): void;
}

const PREFIX = "tressette.token.";

export function tokenKey(roomId: string): string {
  return PREFIX + roomId;
}

export function saveToken(store: KeyValueStore, roomId: string, token: string): void {
  store.setItem(tokenKey(roomId), token);
}

export function loadToken(store: KeyValueStore, roomId: string): string | null {
  return store.getItem(tokenKey(roomId));
}

export function clearToken(store: KeyValueStore, roomId: string): void {
  store.removeItem(tokenKey(roomId));
}

const ENDPOINT_PREFIX = "tressette.endpoint.";
const LAST_ROOM_KEY = "tressette.last-room";

export function saveSession(
  store: KeyValueStore,
  roomId: string,
  token: string,
  endpoint: string,
): void {
  saveToken(store, roomId, token);
  store.setItem(ENDPOINT_PREFIX + roomId, endpoint);
  store.setItem(LAST_ROOM_KEY, roomId);
}

export function loadEndpoint(store: KeyValueStore, roomId: string): string | null {
  return store.getItem(ENDPOINT_PREFIX + roomId);
}

export function loadLastRoomId(store: KeyValueStore): string | null {
  return store.getItem(LAST_ROOM_KEY);
}

export function clearSession(store: KeyValueStore, roomId: string): void {
  clearToken(store, roomId);
  store.removeItem(ENDPOINT_PREFIX + roomId);
  if (store.getItem(LAST_ROOM_KEY) === roomId) store.removeItem(LAST_ROOM_KEY);
}

const TOKEN_SHAPE = /^[0-9a-f]{32}\.[0-9a-f]{16}\.[0-9a-f]{32}$/;

export function isWellFormedToken(token: string): boolean {
  return TOKEN_SHAPE.test(token);
}

/** The participant id a token was minted for, or null if malformed. */
export function participantIdFromToken(token: string): string | null {
  if (!isWellFormedToken(token)) return null;
  const middle = token.split(".")[1];
  return middle ?? null;
}

/** An in-memory stand-in with localStorage's surface, for tests. */
export class MemoryStore implements KeyValueStore {
  private items = new Map<string, string>();

  getItem(key: string): string | null {
    return this.items.has(key) ? (this.items.get(key) as string) : null;
  }

  setItem(key: string, value: string): void {
    this.items.set(key, value);
  }

  removeItem(key: string): void {
    this.items.delete(key);
  }
}
