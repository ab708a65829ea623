// @vitest-environment happy-dom

// End to end against a real host: `roomkit host --bots 3` is spawned as a
// subprocess, and the app under test is driven purely through its DOM —
// discovery over GET /rooms, the join handshake over a real WebSocket,
// and a full match played by clicking only highlighted cards. Midway
// through a deal the "page" is torn down and rebuilt on the same storage,
// which must resume the seat through the stored token's rejoin_request
// (the host keeps a disconnected seat for its default 60 s).
//
// There is no browser binary in this environment; the page is emulated
// with happy-dom, while sockets and HTTP are the real thing.

import { ChildProcess, spawn } from "node:child_process";
import http from "node:http";
import path from "node:path";
import { fileURLToPath } from "node:url";
import WebSocket from "ws";
import { afterEach, expect, test } from "vitest";

import { App, AppEnv } from "../src/app.js";
import { WebSocketLike } from "../src/client.js";
import { FetchLike } from "../src/discovery.js";
import { MemoryStore } from "../src/storage.js";

const REPO_ROOT = path.resolve(path.dirname(fileURLToPath(import.meta.url)), "..", "..");

const nodeFetch: FetchLike = (url) =>
  new Promise((resolve, reject) => {
    http
      .get(url, (res) => {
        let body = "";
        res.setEncoding("utf-8");
        res.on("data", (chunk: string) => (body += chunk));
        res.on("end", () =>
          resolve({
            ok: (res.statusCode ?? 0) >= 200 && (res.statusCode ?? 0) < 300,
            status: res.statusCode ?? 0,
            json: async () => JSON.parse(body) as unknown,
          }),
        );
      })
      .on("error", reject);
  });

const wsFactory = (url: string, protocols: string[]) =>
  new WebSocket(url, protocols) as unknown as WebSocketLike;

function sleep(ms: number): Promise<void> {
  return new Promise((resolve) => setTimeout(resolve, ms));
}

async function waitFor(
  what: string,
  predicate: () => boolean,
  timeoutMs = 15_000,
  diagnostics: () => string = () => "",
): Promise<void> {
  const deadline = Date.now() + timeoutMs;
  while (!predicate()) {
    if (Date.now() > deadline) {
      throw new Error(`timed out waiting for ${what}${diagnostics()}`);
    }
    await sleep(15);
  }
}

class HostProcess {
  readonly proc: ChildProcess;
  out = "";
  exitCode: number | null = null;
  readonly exited: Promise<number | null>;

  constructor(args: string[]) {
    this.proc = spawn("python3", ["-m", "roomkit", "host", ...args], {
      cwd: REPO_ROOT,
      env: { ...process.env, PYTHONUNBUFFERED: "1" },
      stdio: ["ignore", "pipe", "pipe"],
    });
    this.proc.stdout?.setEncoding("utf-8");
    this.proc.stderr?.setEncoding("utf-8");
    this.proc.stdout?.on("data", (chunk: string) => (this.out += chunk));
    this.proc.stderr?.on("data", (chunk: string) => (this.out += chunk));
    this.exited = new Promise((resolve) =>
      this.proc.on("exit", (code) => {
        this.exitCode = code;
        resolve(code);
      }),
    );
  }

  async waitForLine(pattern: RegExp, timeoutMs = 20_000): Promise<RegExpMatchArray> {
    await waitFor(
      `host output ${pattern}`,
      () => pattern.test(this.out),
      timeoutMs,
      () => `\nhost output so far:\n${this.out}`,
    );
    return this.out.match(pattern) as RegExpMatchArray;
  }

  kill(): void {
    if (this.exitCode === null) this.proc.kill("SIGKILL");
  }
}

let host: HostProcess | null = null;

afterEach(() => {
  host?.kill();
  host = null;
});

function freshPage(env: AppEnv): { app: App; root: HTMLElement } {
  document.body.innerHTML = `<div id="app"></div>`;
  const root = document.getElementById("app") as HTMLElement;
  return { app: new App(env, root), root };
}

function highlightedCards(root: HTMLElement): HTMLButtonElement[] {
  return [
    ...root.querySelectorAll<HTMLButtonElement>(
      'button[data-card][data-legal="true"]:not([disabled])',
    ),
  ];
}

test("a web player wins or loses a real match, clicking only highlighted cards, through a mid-deal reload", async () => {
  host = new HostProcess([
    "--name",
    "e2e-table",
    "--bots",
    "3",
    "--seed",
    "20260819",
    "--ws",
    "127.0.0.1:0",
    "--http-port",
    "0",
    "--advertise",
    "",
    "--timeout",
    "60",
  ]);
  const [, httpPort] = await host.waitForLine(/http on port (\d+)/);

  const storage = new MemoryStore(); // plays the role of localStorage
  const env = (): AppEnv => ({
    wsFactory,
    fetchFn: nodeFetch,
    storage,
    httpBase: `http://127.0.0.1:${httpPort}`,
    defaultName: "webplayer",
  });

  // ---- page one: discover the room over /rooms and join through the UI
  let { app, root } = freshPage(env());
  await app.boot();
  await waitFor("the room listing", () => root.querySelector('[data-action="join-room"]') !== null);
  expect(root.textContent).toContain("e2e-table");
  (root.querySelector("#name-input") as HTMLInputElement).value = "webplayer";
  (root.querySelector('[data-action="join-room"]') as HTMLElement).click();
  await waitFor("the joined table", () => app.ui.view.phase === "seated");
  const participantId = app.ui.view.participantId;
  expect(participantId).not.toBeNull();
  await host.waitForLine(/all seats filled — starting match/);

  // ---- play: click the first highlighted card whenever one is offered;
  // once, mid-deal, tear the page down instead and come back via rejoin
  let clicks = 0;
  let reloaded = false;
  const deadline = Date.now() + 90_000;
  while (app.ui.view.phase !== "over") {
    if (Date.now() > deadline) {
      throw new Error(`match did not finish; log: ${app.ui.view.log.join(" | ")}`);
    }
    const legal = highlightedCards(root);
    if (legal.length === 0) {
      await sleep(15);
      continue;
    }

    if (!reloaded && app.ui.view.hand !== null && app.ui.view.hand.length === 7) {
      // Three tricks of the first deal are done and a move prompt is on
      // screen — unmistakably mid-deal. Reload the page instead of playing.
      reloaded = true;
      expect(app.ui.view.lastTrick).not.toBeNull();
      app.dispose();

      ({ app, root } = freshPage(env()));
      await app.boot(); // finds the stored token and sends rejoin_request
      await waitFor(
        "the rejoined table",
        () => app.ui.view.phase === "seated",
        15_000,
        () => ` (phase ${app.ui.view.phase}, banner ${String(app.ui.view.banner)})`,
      );
      expect(app.ui.view.participantId).toBe(participantId);
      // The unanswered move prompt is re-sent; the same seven cards return.
      await waitFor("the re-sent move prompt", () => highlightedCards(root).length > 0);
      expect(app.ui.view.hand).toHaveLength(7);
      continue;
    }

    const button = legal[0] as HTMLButtonElement;
    expect(button.dataset.legal).toBe("true");
    expect(button.hasAttribute("disabled")).toBe(false);
    button.click();
    clicks += 1;
    await waitFor(
      "the play's confirmation",
      () => app.ui.view.pendingPlay === null || app.ui.view.phase === "over",
    );
  }

  // ---- the verdicts: reload happened, every play was a highlighted click,
  // and client and host agree on the outcome
  expect(reloaded).toBe(true);
  expect(clicks).toBeGreaterThanOrEqual(19); // ≥ 2 deals of 10, one play "lost" to the reload
  expect(app.ui.view.winnerTeam).not.toBeNull();
  expect(app.ui.view.aborted).toBeNull();

  const exitCode = await host.exited;
  expect(exitCode).toBe(0);
  const verdict = host.out.match(/result: team (\d+) wins/);
  expect(verdict).not.toBeNull();
  expect(Number((verdict as RegExpMatchArray)[1])).toBe(app.ui.view.winnerTeam);
  expect(host.out).toContain("webplayer joined");
}, 150_000);

test("the host serves the built client from --web-root", async () => {
  host = new HostProcess([
    "--name",
    "static-check",
    "--bots",
    "0",
    "--ws",
    "127.0.0.1:0",
    "--http-port",
    "0",
    "--advertise",
    "",
    "--web-root",
    path.join(REPO_ROOT, "frontend"),
  ]);
  const [, httpPort] = await host.waitForLine(/http on port (\d+)/);
  const page = await nodeFetch(`http://127.0.0.1:${httpPort}/`);
  expect(page.ok).toBe(true);
  const dist = await nodeFetch(`http://127.0.0.1:${httpPort}/dist/main.js`);
  expect(dist.ok).toBe(true);
  host.kill();
});
