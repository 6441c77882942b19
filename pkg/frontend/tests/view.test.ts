import { describe, expect, it } from "vitest";

import { TurnDebug } from "../src/api.js";
import { ChatState } from "../src/controller.js";
import { escapeHtml, renderApp, renderDebugPanel } from "../src/view.js";

function baseState(overrides: Partial<ChatState> = {}): ChatState {
  return {
    userId: "alice",
    conversationId: "conv1",
    turns: [],
    debugOpen: false,
    busy: false,
    error: null,
    canRetry: false,
    ...overrides,
  };
}

const sampleDebug: TurnDebug = {
  timings: { total_ms: 12.5 },
  segments: [
    {
      hypothesis: 0,
      index: 0,
      text: "what movie is your favorite",
      terminal: "question",
      dialogue_acts: [["da.Que.WhOb", 1.0]],
      mentions: [],
      properties: [["favorite_movie", 1.0]],
      tense: "present",
    },
    {
      hypothesis: 0,
      index: 1,
      text: "do you like tom hanks",
      terminal: "question",
      dialogue_acts: [["da.Que.Yesno", 1.0]],
      mentions: [{ text: "tom hanks", candidates: [["tom_hanks", 1.0]] }],
      properties: [["likes", 1.0]],
      tense: "present",
    },
  ],
  analyzer_calls: { dialogue_act: 1 },
  actions: {},
  chosen_hypothesis: 0,
  selected: [
    {
      segment: [0, 0],
      kind: "handle",
      da: "da.Que.WhOb",
      pair: "open_question",
      confidence: 1.0,
      asks_question: false,
      property: "favorite_movie",
      dom: "Alquist",
      ran: null,
    },
    {
      segment: [0, 1],
      kind: "handle",
      da: "da.Que.Yesno",
      pair: "yes_no",
      confidence: 1.0,
      asks_question: false,
      property: "likes",
      dom: "Alquist",
      ran: "tom_hanks",
    },
  ],
  enrichment: {},
  pair_stack: [{ pair: "forward", node: "ask" }],
};

describe("renderApp", () => {
  it("renders user and bot bubbles in order", () => {
    const html = renderApp(
      baseState({
        turns: [
          { author: "user", text: "do you like music", timestamp: 1 },
          { author: "bot", text: "Yes, I love music!", timestamp: 2 },
        ],
      }),
    );
    const userAt = html.indexOf("do you like music");
    const botAt = html.indexOf("Yes, I love music!");
    expect(userAt).toBeGreaterThan(-1);
    expect(botAt).toBeGreaterThan(userAt);
    expect(html).toContain('data-author="user"');
    expect(html).toContain('data-author="bot"');
  });

  it("disables the composer while a turn is in flight", () => {
    expect(renderApp(baseState({ busy: true }))).toContain("disabled");
    expect(renderApp(baseState({ busy: false }))).not.toContain("disabled");
  });

  it("hides the debug panel unless toggled open", () => {
    expect(renderApp(baseState())).not.toContain("debug-panel");
    expect(renderApp(baseState({ debugOpen: true }))).toContain("debug-panel");
  });

  it("shows a retry affordance only for retryable errors", () => {
    const withRetry = renderApp(
      baseState({ error: "network down", canRetry: true }),
    );
    expect(withRetry).toContain("network down");
    expect(withRetry).toContain('data-action="retry"');
    const plain = renderApp(baseState({ error: "bad input", canRetry: false }));
    expect(plain).not.toContain('data-action="retry"');
  });

  it("escapes user-controlled text", () => {
    const html = renderApp(
      baseState({
        turns: [{ author: "user", text: "<script>alert(1)</script>", timestamp: 1 }],
      }),
    );
    expect(html).not.toContain("<script>alert");
    expect(html).toContain("&lt;script&gt;");
  });
});

describe("renderDebugPanel", () => {
  it("lists one row per segment and per selected action", () => {
    const html = renderDebugPanel(sampleDebug);
    expect(html.match(/class="segment-row"/g)).toHaveLength(2);
    expect(html.match(/class="action-row"/g)).toHaveLength(2);
    expect(html).toContain("open_question");
    expect(html).toContain("da.Que.Yesno");
    expect(html).toContain("forward @ ask");
  });

  it("copes with a missing trace", () => {
    expect(renderDebugPanel(undefined)).toContain("No debug trace yet");
  });
});

describe("escapeHtml", () => {
  it("escapes the four HTML metacharacters", () => {
    expect(escapeHtml(`<a href="x">&`)).toBe("&lt;a href=&quot;x&quot;&gt;&amp;");
  });
});
