// Room discovery over the host's HTTP bridge: GET /rooms returns the
// advertisement list. A 503 means the bridge is up but the room has not
// opened yet; anything else unexpected is a hard error so the UI can fall
// back to a manually entered ws:// endpoint.

export interface RoomListing {
  room_id: string;
  room_name: string;
  app_tag: string;
  endpoints: string[];
  protocol_version: number;
  capacity: number;
  occupied: number;
  interval: number;
}

export class RoomsUnavailable extends Error {}

export type FetchLike = (url: string) => Promise<{
  ok: boolean;
  status: number;
  json(): Promise<unknown>;
}>;

function isListing(x: unknown): x is RoomListing {
  if (typeof x !== "object" || x === null) return false;
  const r = x as Record<string, unknown>;
  return (
    typeof r.room_id === "string" &&
    typeof r.room_name === "string" &&
    typeof r.app_tag === "string" &&
    Array.isArray(r.endpoints) &&
    r.endpoints.every((e) => typeof e === "string") &&
    typeof r.protocol_version === "number" &&
    typeof r.capacity === "number" &&
    typeof r.occupied === "number"
  );
}

export async function fetchRooms(baseUrl: string, fetchFn: FetchLike): Promise<RoomListing[]> {
  const url = baseUrl.replace(/\/$/, "") + "/rooms";
  let response: Awaited<ReturnType<FetchLike>>;
  try {
    response = await fetchFn(url);
  } catch (err) {
    throw new RoomsUnavailable(`cannot reach ${url}: ${String(err)}`);
  }
  if (response.status === 503) throw new RoomsUnavailable("room not open yet");
  if (!response.ok) throw new RoomsUnavailable(`GET ${url} failed with ${response.status}`);
  const body = await response.json();
  if (!Array.isArray(body)) throw new RoomsUnavailable("room list is not an array");
  return body.filter(isListing);
}

/** The ws:// endpoints of a listing, the only kind a browser can dial. */
export function wsEndpoints(listing: RoomListing): string[] {
  return listing.endpoints.filter((e) => e.startsWith("ws://") || e.startsWith("wss://"));
}
