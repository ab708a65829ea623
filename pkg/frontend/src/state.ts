// Client-side table state. Everything here is derived from the wire:
// the hand is the last private deal minus cards whose play the server
// confirmed, legality comes from the latest turn prompt, and scores are
// whatever the last score event said. No rules are evaluated locally —
// the server is the only referee, so a buggy or hostile peer cannot
// desynchronize this view, only the room can move it.

import {
  Card,
  GameEvent,
  MoveView,
  RANKS,
  SUITS,
  TeamScore,
  TrickPlay,
  cardKey,
  cardLabel,
  gameEventOf,
  sameCard,
} from "./protocol.js";

export type Phase = "lobby" | "joining" | "seated" | "over" | "disconnected";

export interface ParticipantInfo {
  participant_id: string;
  display_name: string;
  state: string;
}

export interface ClientView {
  phase: Phase;
  banner: string | null;
  roomId: string | null;
  roomName: string | null;
  participantId: string | null;
  names: Record<string, string>;
  joinOrder: string[];
  seat: number | null;
  dealer: number | null;
  hand: Card[] | null;
  pendingPlay: Card | null;
  legal: Card[];
  pendingCid: number | null;
  turnSeat: number | null;
  deadline: number | null;
  trick: TrickPlay[];
  lastTrick: { winner_seat: number; cards: Card[] } | null;
  matchPoints: number[] | null;
  winnerTeam: number | null;
  aborted: { kind: string; reason: string } | null;
  log: string[];
  lastSeq: number;
}

export class SequenceError extends Error {}

const LOG_LIMIT = 200;

export function initialView(): ClientView {
  return {
    phase: "lobby",
    banner: null,
    roomId: null,
    roomName: null,
    participantId: null,
    names: {},
    joinOrder: [],
    seat: null,
    dealer: null,
    hand: null,
    pendingPlay: null,
    legal: [],
    pendingCid: null,
    turnSeat: null,
    deadline: null,
    trick: [],
    lastTrick: null,
    matchPoints: null,
    winnerTeam: null,
    aborted: null,
    log: [],
    lastSeq: 0,
  };
}

export function pushLog(view: ClientView, text: string): void {
  view.log.push(text);
  if (view.log.length > LOG_LIMIT) view.log.splice(0, view.log.length - LOG_LIMIT);
}

export function nameOf(view: ClientView, participantId: string): string {
  return view.names[participantId] ?? participantId;
}

export function seatName(view: ClientView, seat: number): string {
  if (seat === view.seat) return "you";
  const pid = view.joinOrder[seat];
  return pid !== undefined ? nameOf(view, pid) : `seat ${seat}`;
}

/** Display order: suits in declaration order, ranks strongest first. */
export function sortHand(cards: Card[]): Card[] {
  return [...cards].sort((a, b) => {
    const suit = SUITS.indexOf(a.s) - SUITS.indexOf(b.s);
    return suit !== 0 ? suit : RANKS.indexOf(a.r) - RANKS.indexOf(b.r);
  });
}

function isRecord(x: unknown): x is Record<string, unknown> {
  return typeof x === "object" && x !== null && !Array.isArray(x);
}

/**
 * Fold one room event into the view. Sequence numbers must rise strictly:
 * the room promises ordered delivery, so a regression means the connection
 * can no longer be trusted and the caller should tear it down.
 */
export function applyRoomEvent(
  view: ClientView,
  seq: number,
  variant: string,
  body: Record<string, unknown>,
): void {
  if (seq <= view.lastSeq) {
    throw new SequenceError(`event seq ${seq} after ${view.lastSeq}`);
  }
  view.lastSeq = seq;

  switch (variant) {
    case "participant_joined": {
      const pid = typeof body.participant_id === "string" ? body.participant_id : null;
      if (pid === null) return;
      const name = typeof body.display_name === "string" ? body.display_name : pid;
      view.names[pid] = name;
      if (!view.joinOrder.includes(pid)) view.joinOrder.push(pid);
      pushLog(view, `${name} joined`);
      return;
    }
    case "participant_rejoined": {
      const pid = typeof body.participant_id === "string" ? body.participant_id : "";
      pushLog(view, `${nameOf(view, pid)} reconnected`);
      return;
    }
    case "participant_disconnected": {
      const pid = typeof body.participant_id === "string" ? body.participant_id : "";
      pushLog(view, `${nameOf(view, pid)} lost connection`);
      return;
    }
    case "participant_left": {
      const pid = typeof body.participant_id === "string" ? body.participant_id : "";
      pushLog(view, `${nameOf(view, pid)} left`);
      const at = view.joinOrder.indexOf(pid);
      if (at >= 0 && view.hand === null) view.joinOrder.splice(at, 1);
      return;
    }
    case "room_opened":
      pushLog(view, "room opened");
      return;
    case "room_closed":
      pushLog(view, "room closed");
      return;
    case "anomaly_detected": {
      const description =
        typeof body.description === "string" ? body.description : "irregular play";
      pushLog(view, `anomaly: ${description}`);
      return;
    }
    case "app_event": {
      const data = body.data;
      if (isRecord(data) && "game" in data) {
        const event = gameEventOf(data.game);
        if (event !== null) applyGameEvent(view, event);
        return;
      }
      if (typeof body.from === "string" && data !== undefined) {
        pushLog(view, `${nameOf(view, body.from)}: ${JSON.stringify(data)}`);
      }
      return;
    }
    default:
      pushLog(view, `(${variant})`);
  }
}

export function applyGameEvent(view: ClientView, event: GameEvent): void {
  switch (event.type) {
    case "score": {
      view.matchPoints = event.teams.map((team: TeamScore) => team.match_points);
      pushLog(view, `match points ${view.matchPoints.join(" – ")}`);
      return;
    }
    case "deal": {
      view.seat = event.your_seat;
      view.dealer = event.dealer;
      view.hand = sortHand(event.hand);
      view.pendingPlay = null;
      view.legal = [];
      view.pendingCid = null;
      view.turnSeat = null;
      view.deadline = null;
      view.trick = [];
      view.lastTrick = null;
      pushLog(view, `new deal — ${seatName(view, event.dealer)} deals`);
      return;
    }
    case "turn": {
      view.turnSeat = event.seat;
      view.deadline = event.deadline;
      if (event.legal !== undefined && event.seat === view.seat) {
        view.legal = event.legal;
      } else if (event.seat !== view.seat) {
        view.legal = [];
        view.pendingCid = null;
      }
      return;
    }
    case "played": {
      view.trick.push({ seat: event.seat, card: event.card });
      if (event.seat === view.seat && view.hand !== null) {
        view.hand = view.hand.filter((card) => !sameCard(card, event.card));
        view.pendingPlay = null;
        view.legal = [];
        view.pendingCid = null;
      }
      pushLog(view, `${seatName(view, event.seat)} played ${cardLabel(event.card)}`);
      return;
    }
    case "trick_result": {
      view.lastTrick = { winner_seat: event.winner_seat, cards: event.cards };
      view.trick = [];
      view.turnSeat = null;
      pushLog(view, `trick to ${seatName(view, event.winner_seat)}`);
      return;
    }
    case "game_over": {
      if (event.aborted !== undefined) {
        view.aborted = { kind: event.aborted, reason: event.reason ?? "" };
        pushLog(view, `game aborted (${event.aborted})`);
      } else if (event.winner_team !== undefined) {
        view.winnerTeam = event.winner_team;
        pushLog(view, `game over — team ${event.winner_team} wins`);
      }
      view.phase = "over";
      view.legal = [];
      view.pendingCid = null;
      view.turnSeat = null;
      return;
    }
    case "anomaly": {
      pushLog(view, `anomaly: ${event.description}`);
      return;
    }
  }
}

/**
 * Fold a request_move prompt into the view. The prompt's embedded view is
 * authoritative — after a reconnect it is the only way the hand, trick,
 * and legality come back, so it overwrites rather than merges.
 */
export function applyMoveRequest(view: ClientView, cid: number, move: MoveView): void {
  view.seat = move.your_seat;
  view.hand = sortHand(move.hand);
  view.trick = move.trick;
  view.matchPoints = move.match_points;
  view.legal = move.legal;
  view.deadline = move.deadline;
  view.turnSeat = move.your_seat;
  view.pendingCid = cid;
  view.pendingPlay = null;
}

/** Keys of the cards that may be clicked right now. */
export function playableKeys(view: ClientView): Set<string> {
  const keys = new Set<string>();
  if (
    view.phase !== "seated" ||
    view.pendingCid === null ||
    view.pendingPlay !== null ||
    view.turnSeat !== view.seat
  ) {
    return keys;
  }
  for (const card of view.legal) keys.add(cardKey(card));
  return keys;
}

/** Record the optimistic local play; confirmation arrives as `played`. */
export function markPlayed(view: ClientView, card: Card): void {
  view.pendingPlay = card;
  view.legal = [];
}
