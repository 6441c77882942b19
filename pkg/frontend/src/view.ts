/**
 * Pure HTML rendering over the chat state. The view is a function of
 * state — no DOM reads — so it can be unit-tested as plain strings and
 * mounted with innerHTML plus event delegation.
 */

import { ActionDebug, SegmentDebug, TurnDebug } from "./api.js";
import { ChatState, ChatTurnView } from "./controller.js";

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

function renderTurn(turn: ChatTurnView): string {
  return `<div class="bubble bubble-${turn.author}" data-author="${turn.author}">
    ${escapeHtml(turn.text)}
  </div>`;
}

function topDialogueAct(segment: SegmentDebug): string {
  const top = segment.dialogue_acts[0];
  return top ? `${top[0]} (${top[1].toFixed(2)})` : "—";
}

function renderSegmentRows(segments: SegmentDebug[]): string {
  return segments
    .map(
      (segment) => `<tr class="segment-row">
        <td>${segment.hypothesis}.${segment.index}</td>
        <td>${escapeHtml(segment.text)}</td>
        <td>${escapeHtml(segment.terminal)}</td>
        <td>${escapeHtml(topDialogueAct(segment))}</td>
        <td>${escapeHtml(segment.tense)}</td>
      </tr>`,
    )
    .join("");
}

function renderActionRows(actions: ActionDebug[]): string {
  return actions
    .map(
      (action) => `<tr class="action-row">
        <td>${action.segment[0]}.${action.segment[1]}</td>
        <td>${escapeHtml(action.pair)}</td>
        <td>${escapeHtml(action.da)}</td>
        <td>${action.confidence.toFixed(3)}</td>
        <td>${escapeHtml(action.property ?? "—")}</td>
        <td>${action.asks_question ? "asks" : ""}</td>
      </tr>`,
    )
    .join("");
}

export function renderDebugPanel(debug: TurnDebug | undefined): string {
  if (!debug) {
    return `<section class="debug-panel" data-testid="debug-panel">
      <p>No debug trace yet — send a turn first.</p>
    </section>`;
  }
  const stack = debug.pair_stack
    .map((entry) => `<li>${escapeHtml(entry.pair)} @ ${escapeHtml(entry.node)}</li>`)
    .join("");
  return `<section class="debug-panel" data-testid="debug-panel">
    <h3>Segments (hypothesis ${debug.chosen_hypothesis} chosen)</h3>
    <table class="segments">
      <thead><tr><th>ref</th><th>text</th><th>terminal</th><th>top act</th><th>tense</th></tr></thead>
      <tbody>${renderSegmentRows(debug.segments)}</tbody>
    </table>
    <h3>Selected actions</h3>
    <table class="selected-actions">
      <thead><tr><th>segment</th><th>pair</th><th>act</th><th>conf</th><th>property</th><th></th></tr></thead>
      <tbody>${renderActionRows(debug.selected)}</tbody>
    </table>
    <h3>Pair stack</h3>
    <ul class="pair-stack">${stack || "<li>(empty)</li>"}</ul>
    <p class="timings">turn ${debug.timings["total_ms"] ?? "?"} ms</p>
  </section>`;
}

export function renderApp(state: ChatState): string {
  const lastBot = [...state.turns].reverse().find((t) => t.author === "bot");
  const messages = state.turns.map(renderTurn).join("\n");
  const errorBar = state.error
    ? `<div class="error-bar" role="alert">
        ${escapeHtml(state.error)}
        ${state.canRetry ? '<button data-action="retry">Retry</button>' : ""}
      </div>`
    : "";
  return `<main class="chat">
    <header>
      <span class="conversation-id">${escapeHtml(state.conversationId ?? "connecting…")}</span>
      <button data-action="toggle-debug">${state.debugOpen ? "Hide" : "Show"} debug</button>
      <button data-action="reset">New conversation</button>
    </header>
    <div class="messages">${messages}</div>
    ${errorBar}
    <form class="composer" data-action="send">
      <input name="turn" type="text" autocomplete="off"
        placeholder="Say something…" ${state.busy ? "disabled" : ""} />
      <button type="submit" ${state.busy ? "disabled" : ""}>Send</button>
    </form>
    ${state.debugOpen ? renderDebugPanel(lastBot?.debug) : ""}
  </main>`;
}
