// Browser entry point: bind the real window facilities and boot.

import { App, AppEnv } from "./app.js";
import { WebSocketLike } from "./client.js";

const env: AppEnv = {
  wsFactory: (url, protocols) => new WebSocket(url, protocols) as unknown as WebSocketLike,
  fetchFn: (url) => fetch(url),
  storage: window.localStorage,
  httpBase: window.location.protocol.startsWith("http") ? window.location.origin : null,
  defaultName: "player",
};

const root = document.getElementById("app");
if (root === null) throw new Error("missing #app root element");
void new App(env, root).boot();
