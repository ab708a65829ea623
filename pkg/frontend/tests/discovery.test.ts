import { describe, expect, test } from "vitest";

import { FetchLike, RoomsUnavailable, fetchRooms, wsEndpoints } from "../src/discovery.js";

const LISTING = {
  room_id: "r1",
  room_name: "friday",
  app_tag: "tressette",
  endpoints: ["tcp://10.0.0.5:4700", "ws://10.0.0.5:4701"],
  protocol_version: 1,
  capacity: 4,
  occupied: 2,
  interval: 1.0,
};

function respond(status: number, body: unknown): FetchLike {
  return async () => ({
    ok: status >= 200 && status < 300,
    status,
    json: async () => body,
  });
}

describe("fetchRooms", () => {
  test("parses the advertisement array and requests /rooms", async () => {
    let requested = "";
    const fetchFn: FetchLike = async (url) => {
      requested = url;
      return { ok: true, status: 200, json: async () => [LISTING] };
    };
    const rooms = await fetchRooms("http://host:4702/", fetchFn);
    expect(requested).toBe("http://host:4702/rooms");
    expect(rooms).toEqual([LISTING]);
  });

  test("drops malformed entries instead of failing the list", async () => {
    const rooms = await fetchRooms(
      "http://h",
      respond(200, [LISTING, { room_id: 5 }, "junk"]),
    );
    expect(rooms).toEqual([LISTING]);
  });

  test("503 means the room has not opened yet", async () => {
    await expect(fetchRooms("http://h", respond(503, { error: "room not open" }))).rejects.toThrow(
      RoomsUnavailable,
    );
  });

  test("other failures also surface as RoomsUnavailable", async () => {
    await expect(fetchRooms("http://h", respond(500, {}))).rejects.toThrow(RoomsUnavailable);
    await expect(fetchRooms("http://h", respond(200, { not: "array" }))).rejects.toThrow(
      RoomsUnavailable,
    );
    const dead: FetchLike = async () => {
      throw new Error("ECONNREFUSED");
    };
    await expect(fetchRooms("http://h", dead)).rejects.toThrow(RoomsUnavailable);
  });
});

describe("wsEndpoints", () => {
  test("keeps only endpoints a browser can dial", () => {
    expect(wsEndpoints(LISTING)).toEqual(["ws://10.0.0.5:4701"]);
    expect(wsEndpoints({ ...LISTING, endpoints: ["tcp://a:1"] })).toEqual([]);
    expect(wsEndpoints({ ...LISTING, endpoints: ["wss://a:1"] })).toEqual(["wss://a:1"]);
  });
});
