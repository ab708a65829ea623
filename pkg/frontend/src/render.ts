// DOM output. One render() call redraws the whole app from UiState —
// events mutate state, state drives markup, and the only listener is a
// single delegated click handler installed once by bindUi. Cards are
// buttons; a card is clickable exactly when it carries data-legal="true",
// which playableKeys() grants only to legal cards on the player's turn.

import { RoomListing } from "./discovery.js";
import { Card, cardFromKey, cardKey, cardLabel } from "./protocol.js";
import { ClientView, playableKeys, seatName } from "./state.js";

export interface UiState {
  view: ClientView;
  rooms: RoomListing[] | null;
  roomsError: string | null;
  busy: boolean;
}

export interface UiHandlers {
  onJoinRoom(roomId: string, name: string): void;
  onManualJoin(endpoint: string, name: string): void;
  onPlay(card: Card): void;
  onLeave(): void;
  onRejoin(): void;
  onRefreshRooms(): void;
  onDismissBanner(): void;
}

export function escapeHtml(text: string): string {
  return text
    .replaceAll("&", "&amp;")
    .replaceAll("<", "&lt;")
    .replaceAll(">", "&gt;")
    .replaceAll('"', "&quot;")
    .replaceAll("'", "&#39;");
}

const SUIT_GLYPH: Record<string, string> = {
  denari: "🪙",
  coppe: "🏆",
  spade: "⚔️",
  bastoni: "🪵",
};

function inputValue(root: HTMLElement, id: string, fallback: string): string {
  const input = root.querySelector<HTMLInputElement>(`#${id}`);
  return input !== null && input.value !== "" ? input.value : fallback;
}

export function bindUi(root: HTMLElement, handlers: UiHandlers): void {
  root.addEventListener("click", (event) => {
    const target = event.target as Element | null;
    if (target === null) return;
    const card = target.closest<HTMLElement>("button[data-card]");
    if (card !== null) {
      if (card.dataset.legal === "true" && !card.hasAttribute("disabled")) {
        handlers.onPlay(cardFromKey(card.dataset.card ?? ""));
      }
      return;
    }
    const action = target.closest<HTMLElement>("[data-action]");
    if (action === null) return;
    const name = inputValue(root, "name-input", "player");
    switch (action.dataset.action) {
      case "join-room":
        handlers.onJoinRoom(action.dataset.roomId ?? "", name);
        return;
      case "manual-join": {
        const endpoint = inputValue(root, "endpoint-input", "");
        if (endpoint !== "") handlers.onManualJoin(endpoint, name);
        return;
      }
      case "leave":
        handlers.onLeave();
        return;
      case "rejoin":
        handlers.onRejoin();
        return;
      case "refresh-rooms":
        handlers.onRefreshRooms();
        return;
      case "dismiss-banner":
        handlers.onDismissBanner();
        return;
    }
  });
}

function bannerHtml(view: ClientView): string {
  if (view.banner === null) return "";
  return `<div class="banner">
    <span>${escapeHtml(view.banner)}</span>
    <button data-action="dismiss-banner" title="dismiss">&times;</button>
  </div>`;
}

function roomRow(listing: RoomListing): string {
  const full = listing.occupied >= listing.capacity;
  return `<li class="room-row">
    <span class="room-name">${escapeHtml(listing.room_name)}</span>
    <span class="room-fill">${listing.occupied}/${listing.capacity}</span>
    <button data-action="join-room" data-room-id="${escapeHtml(listing.room_id)}"
      ${full ? "disabled" : ""}>join</button>
  </li>`;
}

function lobbyHtml(ui: UiState): string {
  const rows =
    ui.rooms === null
      ? `<p class="muted">room list unavailable${
          ui.roomsError !== null ? ` (${escapeHtml(ui.roomsError)})` : ""
        } — enter an endpoint below.</p>`
      : ui.rooms.length === 0
        ? `<p class="muted">no rooms advertised yet.</p>`
        : `<ul class="rooms">${ui.rooms.map(roomRow).join("")}</ul>`;
  return `<section class="lobby">
    <h1>tressette</h1>
    ${bannerHtml(ui.view)}
    <label>your name <input id="name-input" value="player" maxlength="32"></label>
    ${rows}
    <p>
      <button data-action="refresh-rooms">refresh rooms</button>
    </p>
    <details ${ui.rooms === null ? "open" : ""}>
      <summary>connect to an endpoint directly</summary>
      <label>ws endpoint <input id="endpoint-input" placeholder="ws://host:4701"></label>
      <button data-action="manual-join">connect</button>
    </details>
  </section>`;
}

function cardFace(card: Card, extra = ""): string {
  return `<span class="card-face s-${card.s} ${extra}" title="${escapeHtml(cardLabel(card))}">
    <span class="rank">${card.r}</span><span class="suit">${SUIT_GLYPH[card.s] ?? card.s}</span>
  </span>`;
}

function handHtml(view: ClientView): string {
  if (view.hand === null) {
    return `<p class="muted">waiting for your cards…</p>`;
  }
  const playable = playableKeys(view);
  const buttons = view.hand
    .map((card) => {
      const key = cardKey(card);
      const legal = playable.has(key);
      const pending = view.pendingPlay !== null && cardKey(view.pendingPlay) === key;
      return `<button class="card${legal ? " legal" : ""}${pending ? " pending" : ""}"
        data-card="${key}" data-legal="${legal}" ${legal ? "" : "disabled"}
        title="${escapeHtml(cardLabel(card))}">
        <span class="rank">${card.r}</span><span class="suit s-${card.s}">${SUIT_GLYPH[card.s] ?? card.s}</span>
      </button>`;
    })
    .join("");
  return `<div class="hand">${buttons}</div>`;
}

function trickHtml(view: ClientView): string {
  const plays = view.trick
    .map(
      (play) => `<div class="play">
        <span class="who">${escapeHtml(seatName(view, play.seat))}</span>
        ${cardFace(play.card)}
      </div>`,
    )
    .join("");
  const last =
    view.lastTrick !== null && view.trick.length === 0
      ? `<p class="muted">last trick to ${escapeHtml(seatName(view, view.lastTrick.winner_seat))}:
          ${view.lastTrick.cards.map((card) => cardFace(card, "small")).join("")}</p>`
      : "";
  return `<div class="trick">${plays}</div>${last}`;
}

function statusHtml(view: ClientView): string {
  if (view.phase === "over") {
    if (view.aborted !== null) {
      return `<p class="status over">game aborted — ${escapeHtml(view.aborted.kind)}${
        view.aborted.reason !== "" ? `: ${escapeHtml(view.aborted.reason)}` : ""
      }</p>`;
    }
    if (view.winnerTeam !== null) {
      const mine = view.seat !== null && view.seat % 2 === view.winnerTeam;
      return `<p class="status over">team ${view.winnerTeam} wins — ${
        mine ? "victory!" : "defeat."
      }</p>`;
    }
    return `<p class="status over">game over</p>`;
  }
  if (view.turnSeat === null) return `<p class="status">waiting…</p>`;
  const deadline = view.deadline !== null ? ` (${Math.round(view.deadline)}s)` : "";
  return view.turnSeat === view.seat
    ? `<p class="status your-turn">your turn${deadline} — play a highlighted card</p>`
    : `<p class="status">${escapeHtml(seatName(view, view.turnSeat))} is thinking${deadline}</p>`;
}

function scoreHtml(view: ClientView): string {
  if (view.matchPoints === null) return "";
  const mine = view.seat !== null ? view.seat % 2 : 0;
  const labels = view.matchPoints.map((points, team) =>
    team === mine ? `us ${points}` : `them ${points}`,
  );
  return `<span class="scores">${labels.join(" · ")}</span>`;
}

function seatsHtml(view: ClientView): string {
  if (view.seat === null) return "";
  const panels: string[] = [];
  for (let rel = 1; rel < 4; rel++) {
    const seat = (view.seat + rel) % 4;
    const active = view.turnSeat === seat ? " active" : "";
    const place = rel === 1 ? "right" : rel === 2 ? "top" : "left";
    panels.push(
      `<div class="seat ${place}${active}" data-seat="${seat}">
        ${escapeHtml(seatName(view, seat))}${rel === 2 ? " (partner)" : ""}
      </div>`,
    );
  }
  return panels.join("");
}

function tableHtml(ui: UiState): string {
  const view = ui.view;
  const title = view.roomName !== null ? view.roomName : "table";
  const rejoinControls =
    view.phase === "disconnected"
      ? `<p class="status over">connection lost —
          <button data-action="rejoin">rejoin</button> or reload the page.</p>`
      : "";
  return `<section class="table">
    <header>
      <span class="room">${escapeHtml(title)}</span>
      ${scoreHtml(view)}
      <button data-action="leave">leave</button>
    </header>
    ${bannerHtml(view)}
    ${rejoinControls}
    ${seatsHtml(view)}
    ${trickHtml(view)}
    ${statusHtml(view)}
    ${handHtml(view)}
    <ul class="log">${view.log
      .slice(-12)
      .map((line) => `<li>${escapeHtml(line)}</li>`)
      .join("")}</ul>
  </section>`;
}

export function render(ui: UiState, root: HTMLElement): void {
  const nameBefore = root.querySelector<HTMLInputElement>("#name-input")?.value;
  const endpointBefore = root.querySelector<HTMLInputElement>("#endpoint-input")?.value;

  if (ui.busy) {
    root.innerHTML = `<section class="lobby">${bannerHtml(ui.view)}<p class="status">connecting…</p></section>`;
    return;
  }
  switch (ui.view.phase) {
    case "lobby":
      root.innerHTML = lobbyHtml(ui);
      break;
    case "joining":
      root.innerHTML = `<section class="lobby"><p class="status">joining…</p></section>`;
      break;
    default:
      root.innerHTML = tableHtml(ui);
  }

  const nameAfter = root.querySelector<HTMLInputElement>("#name-input");
  if (nameAfter !== null && nameBefore !== undefined) nameAfter.value = nameBefore;
  const endpointAfter = root.querySelector<HTMLInputElement>("#endpoint-input");
  if (endpointAfter !== null && endpointBefore !== undefined) endpointAfter.value = endpointBefore;
}
