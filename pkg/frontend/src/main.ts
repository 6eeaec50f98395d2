/** Entry point: read connection settings, authenticate, start the app. */

import { ApiClient } from "./api.js";
import { App } from "./app.js";
import { DraftStore, MemoryStore, type KeyValueStore } from "./drafts.js";

function storageBackend(): KeyValueStore {
  try {
    const probe = "abceval-probe";
    window.localStorage.setItem(probe, "1");
    window.localStorage.removeItem(probe);
    return window.localStorage;
  } catch {
    return new MemoryStore();
  }
}

async function boot(): Promise<void> {
  const root = document.getElementById("app");
  if (!root) throw new Error("missing #app mount point");

  const params = new URLSearchParams(window.location.search);
  const baseUrl = params.get("api") ?? window.location.origin;
  const api = new ApiClient(baseUrl);

  const token = params.get("token");
  if (token) {
    api.setToken(token);
  } else {
    const name = window.prompt("Display name for this session:") ?? "annotator";
    await api.register(name);
  }

  const app = new App({ api, drafts: new DraftStore(storageBackend()), root });
  await app.start();
}

boot().catch((error: unknown) => {
  const root = document.getElementById("app");
  if (root) {
    root.textContent = `Failed to start: ${error instanceof Error ? error.message : String(error)}`;
  }
});
