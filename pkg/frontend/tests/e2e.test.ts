/**
 * End-to-end: a real engine service process, the real ApiClient, the
 * real controller and view. Covers the golden exchange, the debug
 * panel, and retry-without-duplication.
 */

import { ChildProcess, spawn } from "node:child_process";
import { mkdtempSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";

import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { ApiClient, FetchLike } from "../src/api.js";
import { ChatController } from "../src/controller.js";
import { renderApp } from "../src/view.js";

const PORT = 8931;
const BASE = `http://127.0.0.1:${PORT}`;
const GOLDEN_REPLY = "Yes, I love music! What music genre is your favorite?";

let service: ChildProcess;

async function waitForHealth(): Promise<void> {
  const deadline = Date.now() + 30_000;
  while (Date.now() < deadline) {
    try {
      const response = await fetch(`${BASE}/api/health`);
      if (response.ok) return;
    } catch {
      // not up yet
    }
    await new Promise((resolve) => setTimeout(resolve, 250));
  }
  throw new Error("service did not become healthy within 30s");
}

beforeAll(async () => {
  const store = mkdtempSync(join(tmpdir(), "kgchat-e2e-"));
  service = spawn(
    "python3",
    ["-m", "kgchat", "serve", "--port", String(PORT), "--store-dir", store],
    { stdio: ["ignore", "inherit", "inherit"] },
  );
  await waitForHealth();
}, 40_000);

afterAll(() => {
  service?.kill();
});

describe("chat UI against a live service", () => {
  it("runs the golden exchange and shows the debug panel", async () => {
    const controller = new ChatController(new ApiClient(BASE), "e2e-user");
    await controller.startConversation();
    const botTurn = await controller.sendTurn("do you like music");
    expect(botTurn?.text).toBe(GOLDEN_REPLY);

    let html = renderApp(controller.state());
    expect(html).toContain(GOLDEN_REPLY);
    expect(html).not.toContain("debug-panel");

    controller.toggleDebug();
    html = renderApp(controller.state());
    expect(html).toContain("debug-panel");
    expect((html.match(/class="segment-row"/g) ?? []).length)
      .toBeGreaterThanOrEqual(1);
    expect((html.match(/class="action-row"/g) ?? []).length)
      .toBeGreaterThanOrEqual(1);
    expect(html).toContain("yes_no"); // the selected action's pair
  });

  it("survives a dropped response without duplicating the turn", async () => {
    // the request reaches the server, but the response is "lost" once
    let dropNext = false;
    const flakyFetch: FetchLike = async (input, init) => {
      const response = await fetch(input, init);
      if (dropNext && init?.method === "POST") {
        dropNext = false;
        throw new TypeError("simulated network drop");
      }
      return response;
    };
    const api = new ApiClient(BASE, flakyFetch);
    const controller = new ChatController(api, "e2e-retry-user");
    const conversationId = await controller.startConversation();

    dropNext = true;
    const botTurn = await controller.sendTurn("i have three siblings");
    expect(botTurn?.text).toBe("I see!");
    expect(controller.state().error).toBeNull();
    expect(controller.state().turns.map((t) => t.author))
      .toEqual(["user", "bot"]);

    // the server ran the turn exactly once
    const info = await api.getConversation(conversationId);
    expect(info.turns).toBe(1);
    expect(info.transcript).toHaveLength(1);

    const profile = await api.getProfile("e2e-retry-user");
    expect(profile.facts).toContainEqual({
      property: "sibling_count",
      value: 3,
      tense: "present",
    });
  });

  it("keeps learned facts across a reset to a new conversation", async () => {
    const api = new ApiClient(BASE);
    const controller = new ChatController(api, "e2e-memory-user");
    await controller.startConversation();
    await controller.sendTurn("i have three siblings");
    const firstConversation = controller.state().conversationId;

    await controller.reset();
    expect(controller.state().conversationId).not.toBe(firstConversation);
    const botTurn = await controller.sendTurn(
      "hey how many siblings do you have",
    );
    expect(botTurn?.text).toContain("You have three siblings, right?");
  });
});
