import { describe, expect, it } from "vitest";

import { ApiClient, TurnPayload } from "../src/api.js";
import { ChatController } from "../src/controller.js";

interface Script {
  createConversation?: () => Promise<string>;
  sendTurn?: (cid: string, text: string, nonce: string) => Promise<TurnPayload>;
  getConversation?: ApiClient["getConversation"];
}

function fakeApi(script: Script): ApiClient {
  return {
    createConversation: script.createConversation ?? (() => Promise.resolve("conv1")),
    sendTurn:
      script.sendTurn ??
      ((cid: string, text: string) =>
        Promise.resolve({ conversation_id: cid, text: `echo: ${text}` })),
    getConversation: script.getConversation ?? (() => Promise.reject(new Error("off"))),
  } as unknown as ApiClient;
}

describe("ChatController", () => {
  it("appends a user and a bot turn per exchange", async () => {
    const controller = new ChatController(fakeApi({}), "alice");
    await controller.startConversation();
    await controller.sendTurn("do you like music");
    const state = controller.state();
    expect(state.turns.map((t) => t.author)).toEqual(["user", "bot"]);
    expect(state.turns[1]?.text).toBe("echo: do you like music");
    expect(state.busy).toBe(false);
  });

  it("ignores empty input", async () => {
    const controller = new ChatController(fakeApi({}), "alice");
    await controller.startConversation();
    expect(await controller.sendTurn("   ")).toBeNull();
    expect(controller.state().turns).toHaveLength(0);
  });

  it("allows only one in-flight turn", async () => {
    let release!: (payload: TurnPayload) => void;
    const blocked = new Promise<TurnPayload>((resolve) => (release = resolve));
    const controller = new ChatController(
      fakeApi({ sendTurn: () => blocked }),
      "alice",
    );
    await controller.startConversation();
    const first = controller.sendTurn("one");
    expect(controller.state().busy).toBe(true);
    expect(await controller.sendTurn("two")).toBeNull(); // rejected while busy
    release({ conversation_id: "conv1", text: "done" });
    await first;
    expect(controller.state().turns.map((t) => t.text)).toEqual(["one", "done"]);
  });

  it("keeps the failed turn and retries with the same nonce", async () => {
    const nonces: string[] = [];
    let failFirst = true;
    const controller = new ChatController(
      fakeApi({
        sendTurn: (cid, text, nonce) => {
          nonces.push(nonce);
          if (failFirst) {
            failFirst = false;
            return Promise.reject(new TypeError("offline"));
          }
          return Promise.resolve({ conversation_id: cid, text: "I see!" });
        },
      }),
      "alice",
    );
    await controller.startConversation();
    await controller.sendTurn("i have three siblings");
    let state = controller.state();
    expect(state.error).toContain("offline");
    expect(state.canRetry).toBe(true);
    expect(state.turns.map((t) => t.author)).toEqual(["user"]); // not dropped

    await controller.retryLast();
    state = controller.state();
    expect(state.error).toBeNull();
    expect(state.turns.map((t) => t.author)).toEqual(["user", "bot"]);
    expect(new Set(nonces).size).toBe(1); // identical nonce end to end
  });

  it("toggles the debug panel", async () => {
    const controller = new ChatController(fakeApi({}), "alice");
    expect(controller.state().debugOpen).toBe(false);
    controller.toggleDebug();
    expect(controller.state().debugOpen).toBe(true);
    controller.toggleDebug();
    expect(controller.state().debugOpen).toBe(false);
  });

  it("resumes history from the server transcript", async () => {
    const controller = new ChatController(
      fakeApi({
        getConversation: () =>
          Promise.resolve({
            conversation_id: "old",
            user_id: "alice",
            turns: 1,
            pending_question: false,
            transcript: [{ user: "hello", bot: "Hello!" }],
          }),
      }),
      "alice",
    );
    await controller.resume("old");
    const state = controller.state();
    expect(state.conversationId).toBe("old");
    expect(state.turns.map((t) => [t.author, t.text])).toEqual([
      ["user", "hello"],
      ["bot", "Hello!"],
    ]);
  });

  it("reset opens a fresh conversation for the same user", async () => {
    let counter = 0;
    const controller = new ChatController(
      fakeApi({ createConversation: () => Promise.resolve(`conv${++counter}`) }),
      "alice",
    );
    await controller.startConversation();
    await controller.sendTurn("hi");
    await controller.reset();
    const state = controller.state();
    expect(state.conversationId).toBe("conv2");
    expect(state.turns).toHaveLength(0);
    expect(state.userId).toBe("alice");
  });

  it("notifies subscribers on every transition", async () => {
    const controller = new ChatController(fakeApi({}), "alice");
    const snapshots: boolean[] = [];
    controller.subscribe((state) => snapshots.push(state.busy));
    await controller.startConversation();
    await controller.sendTurn("hi");
    // initial, started, busy, settled
    expect(snapshots).toEqual([false, false, true, false]);
  });
});
