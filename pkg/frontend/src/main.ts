// Browser bootstrap: wire the store to the real gateway and the DOM.

import { GatewayClient } from "./gateway.js";
import { ConsoleStore } from "./store.js";
import { RecordStream, fetchLineSource } from "./stream.js";
import { renderApp } from "./views.js";

const BASE = (window as unknown as { SOCMATRIX_BASE?: string }).SOCMATRIX_BASE ?? "";
const TOKEN =
  new URLSearchParams(window.location.search).get("token") ?? "change-me";

const client = new GatewayClient(BASE, TOKEN, (url, init) => fetch(url, init));
const store = new ConsoleStore(client);
const root = document.getElementById("app")!;

store.onChange(() => {
  root.innerHTML = renderApp(store);
});

root.addEventListener("click", (event) => {
  const target = event.target as HTMLElement;
  const action = target.dataset["action"];
  if (!action) return;
  if (action === "apply-param") {
    const row = target.closest<HTMLElement>("[data-param]");
    const input = row?.querySelector<HTMLInputElement>('[data-role="param-value"]');
    if (row && input) {
      void store.tuneParam(row.dataset["param"]!, Number(input.value));
    }
    return;
  }
  const box = target.closest<HTMLElement>("[data-conflict]");
  if (!box) return;
  const conflictId = Number(box.dataset["conflict"]);
  const amendInput = box.querySelector<HTMLInputElement>('[data-role="amend-text"]');
  if (action === "approve" || action === "deny" || action === "amend") {
    void store.submitVerdict(conflictId, action, amendInput?.value);
  }
});

async function start(): Promise<void> {
  await store.loadInitial();
  const stream = new RecordStream(
    fetchLineSource(BASE, (url) => fetch(url)),
    (record) => store.handleRecord(record),
    { reconnectDelayMs: 1000 },
  );
  void stream.run(0);
}

void start();
