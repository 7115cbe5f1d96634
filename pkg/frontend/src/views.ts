// Pure view functions: state in, HTML string out. No fetching, no globals,
// so every view is snapshot-testable against fixture payloads.

import type { ConflictCard, ConsoleStore, ParamControl } from "./store.js";

const PALETTE = [
  "#58a6ff", "#3fb950", "#d29922", "#f85149",
  "#bc8cff", "#39c5cf", "#f778ba", "#9e6a03",
];

export function communityColor(label: number): string {
  return PALETTE[((label % PALETTE.length) + PALETTE.length) % PALETTE.length]!;
}

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

/**
 * Extract a field's value exactly as the endpoint serialized it, so the
 * readout is byte-equal to the payload (1.0 stays "1.0", never "1").
 */
export function rawField(raw: string, key: string): string {
  const match = raw.match(new RegExp(`"${key}"\\s*:\\s*([^,}]+)`));
  return match ? match[1]!.trim() : "–";
}

function renderCard(card: ConflictCard, tick: number): string {
  const conflict = card.conflict;
  const countdown = Math.max(0, conflict.deadline_tick - tick);
  const violated = conflict.violated
    .map(
      (entry) =>
        `<li><code>${escapeHtml(entry.layer)}</code> forbids ` +
        `<code>${escapeHtml(entry.tag)}</code> (${escapeHtml(entry.severity)})</li>`,
    )
    .join("");
  const controls =
    card.state === "submitted"
      ? `<p class="submitted">submitted${
          card.appliesAt !== undefined ? `, applies at tick ${card.appliesAt}` : ""
        }</p>`
      : `<div class="verdicts" data-conflict="${conflict.id}">
           <button data-action="approve">approve</button>
           <button data-action="deny">deny</button>
           <input data-role="amend-text" placeholder="amended utterance">
           <button data-action="amend">amend</button>
         </div>`;
  const notice = card.notice ? `<p class="card-notice">${escapeHtml(card.notice)}</p>` : "";
  return `<article class="card" data-card="${conflict.id}">
    <header>#${conflict.id} · agent <b>${escapeHtml(conflict.action.agent)}</b>
      · <span class="countdown">${countdown} ticks left</span></header>
    <blockquote>${escapeHtml(conflict.action.utterance)}</blockquote>
    <ul class="violations">${violated}</ul>
    ${controls}${notice}
  </article>`;
}

export function renderQueue(store: ConsoleStore): string {
  if (store.cards.length === 0) {
    return `<section id="queue"><h2>Arbitration queue</h2>
      <p class="empty">No conflicts awaiting arbitration.</p></section>`;
  }
  const cards = store.cards.map((card) => renderCard(card, store.tick)).join("\n");
  return `<section id="queue"><h2>Arbitration queue (${store.cards.length})</h2>
    ${cards}</section>`;
}

function renderControl(name: string, control: ParamControl): string {
  const { min, max, value } = control.spec;
  const pending =
    control.pending !== undefined
      ? `<span class="pending">pending → ${control.pending}</span>`
      : "";
  const error = control.error
    ? `<span class="param-error">${escapeHtml(control.error)}</span>`
    : "";
  return `<div class="param" data-param="${escapeHtml(name)}">
    <label>${escapeHtml(name)} <small>[${min}, ${max}]</small></label>
    <span class="value">${value}</span>
    <input data-role="param-value" type="number" step="0.1" min="${min}" max="${max}" value="${value}">
    <button data-action="apply-param">apply</button>
    ${pending}${error}
  </div>`;
}

export function renderParams(store: ConsoleStore): string {
  const rows = [...store.params.entries()]
    .map(([name, control]) => renderControl(name, control))
    .join("\n");
  return `<section id="params"><h2>Live parameters</h2>${
    rows || '<p class="empty">Scenario declares no live parameters.</p>'
  }</section>`;
}

export function renderTopology(store: ConsoleStore): string {
  if (store.topologyError) {
    return `<section id="topology"><h2>Topology</h2>
      <p class="error-panel">${escapeHtml(store.topologyError)}</p></section>`;
  }
  const topology = store.topology;
  if (!topology || topology.nodes.length === 0) {
    return `<section id="topology"><h2>Topology</h2>
      <p class="empty">No agents in the graph.</p></section>`;
  }
  const size = 420;
  const radius = size / 2 - 40;
  const center = size / 2;
  const position = new Map<string, { x: number; y: number }>();
  topology.nodes.forEach((node, index) => {
    const angle = (2 * Math.PI * index) / topology.nodes.length - Math.PI / 2;
    position.set(node, {
      x: Math.round(center + radius * Math.cos(angle)),
      y: Math.round(center + radius * Math.sin(angle)),
    });
  });
  const edges = topology.edges
    .map((edge) => {
      const a = position.get(edge.a)!;
      const b = position.get(edge.b)!;
      return `<line x1="${a.x}" y1="${a.y}" x2="${b.x}" y2="${b.y}" stroke="#30363d" stroke-width="${(1 + 2 * edge.w).toFixed(2)}"/>`;
    })
    .join("");
  const nodes = topology.nodes
    .map((node) => {
      const point = position.get(node)!;
      const community = topology.communities[node] ?? 0;
      return (
        `<circle cx="${point.x}" cy="${point.y}" r="12" fill="${communityColor(community)}">` +
        `<title>${escapeHtml(node)} · community ${community}</title></circle>` +
        `<text x="${point.x}" y="${point.y + 24}" text-anchor="middle">${escapeHtml(node)}</text>`
      );
    })
    .join("");
  return `<section id="topology"><h2>Topology</h2>
    <svg viewBox="0 0 ${size} ${size}" role="img">${edges}${nodes}</svg>
  </section>`;
}

export function renderMetrics(store: ConsoleStore): string {
  if (!store.metricsRaw) {
    return `<section id="metrics"><h2>Metrics</h2>
      <p class="empty">No metrics yet.</p></section>`;
  }
  const raw = store.metricsRaw;
  const rows = ["clustering", "sync", "consistency"]
    .map(
      (key) =>
        `<div class="metric"><span class="metric-name">${key}</span>` +
        `<span class="metric-value">${escapeHtml(rawField(raw, key))}</span></div>`,
    )
    .join("");
  return `<section id="metrics"><h2>Metrics <small>tick ${escapeHtml(
    rawField(raw, "tick"),
  )}</small></h2>${rows}</section>`;
}

export function renderNotices(store: ConsoleStore): string {
  if (store.notices.length === 0) return "";
  const items = store.notices
    .map((notice) => `<li>${escapeHtml(notice)}</li>`)
    .join("");
  return `<ul id="notices">${items}</ul>`;
}

export function renderApp(store: ConsoleStore): string {
  return `<header id="topbar">
      <h1>socmatrix console</h1>
      <span class="dot ${store.connected ? "live" : "dead"}"></span>
      <span class="tickbox">tick ${store.tick}</span>
    </header>
    ${renderNotices(store)}
    <main>
      ${renderQueue(store)}
      ${renderParams(store)}
      ${renderMetrics(store)}
      ${renderTopology(store)}
    </main>`;
}
