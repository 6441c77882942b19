/** Browser entry point: mount the controller onto #app. */

import { ApiClient } from "./api.js";
import { ChatController } from "./controller.js";
import { renderApp } from "./view.js";

declare global {
  interface Window {
    KGCHAT_API_BASE?: string;
  }
}

function apiBase(): string {
  const params = new URLSearchParams(window.location.search);
  return params.get("api") ?? window.KGCHAT_API_BASE ?? "";
}

export function mount(root: HTMLElement): ChatController {
  const api = new ApiClient(apiBase());
  const userId =
    localStorage.getItem("kgchat.user") ??
    `web-${Math.random().toString(36).slice(2, 10)}`;
  localStorage.setItem("kgchat.user", userId);
  const controller = new ChatController(api, userId);

  controller.subscribe((state) => {
    const hadFocus = document.activeElement?.getAttribute("name") === "turn";
    root.innerHTML = renderApp(state);
    if (hadFocus) {
      root.querySelector<HTMLInputElement>("input[name=turn]")?.focus();
    }
  });

  root.addEventListener("click", (event) => {
    const target = (event.target as HTMLElement).closest("[data-action]");
    if (!(target instanceof HTMLElement)) return;
    const action = target.dataset["action"];
    if (action === "toggle-debug") controller.toggleDebug();
    else if (action === "reset") void controller.reset();
    else if (action === "retry") void controller.retryLast();
  });

  root.addEventListener("submit", (event) => {
    const form = event.target as HTMLFormElement;
    if (form.dataset["action"] !== "send") return;
    event.preventDefault();
    const input = form.elements.namedItem("turn") as HTMLInputElement;
    const text = input.value;
    input.value = "";
    void controller.sendTurn(text);
  });

  const resumeId = new URLSearchParams(window.location.search).get("c");
  void (resumeId
    ? controller.resume(resumeId).catch(() => controller.startConversation())
    : controller.startConversation());
  return controller;
}

if (typeof document !== "undefined") {
  const root = document.getElementById("app");
  if (root) mount(root);
}
