// Wire vocabulary shared with the room server: envelope codec, card
// encoding, and shape guards for the game events a table client consumes.
// The server is authoritative for all of it — this module only restates
// the shapes so the rest of the client can stay typed.

export const WIRE_VERSION = 1;
export const SUBPROTOCOL = "roomkit.v1";

export const ENVELOPE_TYPES = [
  "join_request",
  "join_accepted",
  "join_rejected",
  "rejoin_request",
  "rejoin_accepted",
  "rejoin_rejected",
  "leave",
  "room_event",
  "rpc_request",
  "rpc_response",
  "error",
] as const;

export type EnvelopeType = (typeof ENVELOPE_TYPES)[number];

export interface Envelope {
  v: number;
  type: string;
  cid?: number;
  from?: string;
  payload: Record<string, unknown>;
}

export class ProtocolError extends Error {}

export function isKnownEnvelopeType(type: string): type is EnvelopeType {
  return (ENVELOPE_TYPES as readonly string[]).includes(type);
}

export function encodeEnvelope(
  type: EnvelopeType,
  payload: Record<string, unknown> = {},
  extra: { cid?: number; from?: string } = {},
): string {
  const body: Record<string, unknown> = { v: WIRE_VERSION, type, payload };
  if (extra.cid !== undefined) body.cid = extra.cid;
  if (extra.from !== undefined) body.from = extra.from;
  return JSON.stringify(body);
}

function isRecord(x: unknown): x is Record<string, unknown> {
  return typeof x === "object" && x !== null && !Array.isArray(x);
}

export function decodeEnvelope(text: string): Envelope {
  let parsed: unknown;
  try {
    parsed = JSON.parse(text);
  } catch {
    throw new ProtocolError("envelope is not valid JSON");
  }
  if (!isRecord(parsed)) throw new ProtocolError("envelope is not an object");
  if (parsed.v !== WIRE_VERSION) {
    throw new ProtocolError(`unsupported envelope version ${String(parsed.v)}`);
  }
  if (typeof parsed.type !== "string") {
    throw new ProtocolError("envelope has no type");
  }
  const payload = parsed.payload === undefined ? {} : parsed.payload;
  if (!isRecord(payload)) throw new ProtocolError("envelope payload is not an object");
  const env: Envelope = { v: WIRE_VERSION, type: parsed.type, payload };
  if (typeof parsed.cid === "number") env.cid = parsed.cid;
  if (typeof parsed.from === "string") env.from = parsed.from;
  return env;
}

// ---------------------------------------------------------------- cards

export const SUITS = ["denari", "coppe", "spade", "bastoni"] as const;
export type Suit = (typeof SUITS)[number];

export const RANKS = ["3", "2", "A", "K", "C", "F", "7", "6", "5", "4"] as const;
export type Rank = (typeof RANKS)[number];

export interface Card {
  s: Suit;
  r: Rank;
}

export function isCard(x: unknown): x is Card {
  return (
    isRecord(x) &&
    typeof x.s === "string" &&
    (SUITS as readonly string[]).includes(x.s) &&
    typeof x.r === "string" &&
    (RANKS as readonly string[]).includes(x.r)
  );
}

export function cardKey(card: Card): string {
  return `${card.s}:${card.r}`;
}

export function cardFromKey(key: string): Card {
  const sep = key.indexOf(":");
  const candidate = { s: key.slice(0, sep), r: key.slice(sep + 1) };
  if (sep < 0 || !isCard(candidate)) throw new ProtocolError(`bad card key ${key}`);
  return candidate;
}

export function sameCard(a: Card, b: Card): boolean {
  return a.s === b.s && a.r === b.r;
}

const RANK_LABEL: Record<Rank, string> = {
  "3": "3",
  "2": "2",
  A: "asso",
  K: "re",
  C: "cavallo",
  F: "fante",
  "7": "7",
  "6": "6",
  "5": "5",
  "4": "4",
};

export function cardLabel(card: Card): string {
  return `${RANK_LABEL[card.r]} di ${card.s}`;
}

function cardList(x: unknown): Card[] | null {
  if (!Array.isArray(x)) return null;
  const cards: Card[] = [];
  for (const item of x) {
    if (!isCard(item)) return null;
    cards.push(item);
  }
  return cards;
}

// ----------------------------------------------------------- game events

export interface TeamScore {
  seats: number[];
  match_points: number;
}

export interface ScoreEvent {
  type: "score";
  teams: TeamScore[];
}

export interface DealEvent {
  type: "deal";
  hand: Card[];
  dealer: number;
  your_seat: number;
}

export interface TurnEvent {
  type: "turn";
  seat: number;
  deadline: number;
  legal?: Card[];
}

export interface PlayedEvent {
  type: "played";
  seat: number;
  card: Card;
}

export interface TrickResultEvent {
  type: "trick_result";
  winner_seat: number;
  cards: Card[];
  /** Card points banked by this trick, in integer thirds. */
  thirds: number;
}

export interface GameOverEvent {
  type: "game_over";
  winner_team?: number;
  aborted?: string;
  reason?: string;
}

export interface AnomalyEvent {
  type: "anomaly";
  seat: number | null;
  description: string;
}

export type GameEvent =
  | ScoreEvent
  | DealEvent
  | TurnEvent
  | PlayedEvent
  | TrickResultEvent
  | GameOverEvent
  | AnomalyEvent;

export interface TrickPlay {
  seat: number;
  card: Card;
}

export interface MoveView {
  your_seat: number;
  hand: Card[];
  trick: TrickPlay[];
  led: Suit | null;
  match_points: number[];
  legal: Card[];
  deadline: number;
}

function isTeamScore(x: unknown): x is TeamScore {
  return (
    isRecord(x) &&
    Array.isArray(x.seats) &&
    x.seats.every((s) => typeof s === "number") &&
    typeof x.match_points === "number"
  );
}

/** Narrow an application payload to a game event, or null if it is not one. */
export function gameEventOf(x: unknown): GameEvent | null {
  if (!isRecord(x) || typeof x.type !== "string") return null;
  switch (x.type) {
    case "score": {
      if (Array.isArray(x.teams) && x.teams.every(isTeamScore)) {
        return { type: "score", teams: x.teams };
      }
      return null;
    }
    case "deal": {
      const hand = cardList(x.hand);
      if (hand && typeof x.dealer === "number" && typeof x.your_seat === "number") {
        return { type: "deal", hand, dealer: x.dealer, your_seat: x.your_seat };
      }
      return null;
    }
    case "turn": {
      if (typeof x.seat !== "number" || typeof x.deadline !== "number") return null;
      const event: TurnEvent = { type: "turn", seat: x.seat, deadline: x.deadline };
      if (x.legal !== undefined) {
        const legal = cardList(x.legal);
        if (!legal) return null;
        event.legal = legal;
      }
      return event;
    }
    case "played": {
      if (typeof x.seat === "number" && isCard(x.card)) {
        return { type: "played", seat: x.seat, card: x.card };
      }
      return null;
    }
    case "trick_result": {
      const cards = cardList(x.cards);
      if (cards && typeof x.winner_seat === "number" && typeof x.thirds === "number") {
        return { type: "trick_result", winner_seat: x.winner_seat, cards, thirds: x.thirds };
      }
      return null;
    }
    case "game_over": {
      const event: GameOverEvent = { type: "game_over" };
      if (typeof x.winner_team === "number") event.winner_team = x.winner_team;
      if (typeof x.aborted === "string") event.aborted = x.aborted;
      if (typeof x.reason === "string") event.reason = x.reason;
      return event;
    }
    case "anomaly": {
      if (typeof x.description === "string") {
        return {
          type: "anomaly",
          seat: typeof x.seat === "number" ? x.seat : null,
          description: x.description,
        };
      }
      return null;
    }
    default:
      return null;
  }
}

function isTrickPlay(x: unknown): x is TrickPlay {
  return isRecord(x) && typeof x.seat === "number" && isCard(x.card);
}

/** Validate a request_move view; the move prompt is unusable without one. */
export function moveViewOf(x: unknown): MoveView {
  if (!isRecord(x)) throw new ProtocolError("move view is not an object");
  const hand = cardList(x.hand);
  const legal = cardList(x.legal);
  const led =
    x.led === null || x.led === undefined
      ? null
      : typeof x.led === "string" && (SUITS as readonly string[]).includes(x.led)
        ? (x.led as Suit)
        : undefined;
  if (
    !hand ||
    !legal ||
    led === undefined ||
    typeof x.your_seat !== "number" ||
    typeof x.deadline !== "number" ||
    !Array.isArray(x.trick) ||
    !x.trick.every(isTrickPlay) ||
    !Array.isArray(x.match_points) ||
    !x.match_points.every((p) => typeof p === "number")
  ) {
    throw new ProtocolError("malformed move view");
  }
  return {
    your_seat: x.your_seat,
    hand,
    trick: x.trick,
    led,
    match_points: x.match_points,
    legal,
    deadline: x.deadline,
  };
}
