/**
 * Chat state machine, independent of the DOM.
 *
 * Holds the message stream, the debug-panel toggle, and the single
 * in-flight turn. A failed send keeps the user's text and its nonce so
 * the retry affordance can resend without risking a duplicated turn.
 */

import { ApiClient, TurnDebug, newNonce } from "./api.js";

export interface ChatTurnView {
  author: "user" | "bot";
  text: string;
  timestamp: number;
  debug?: TurnDebug;
}

export interface ChatState {
  userId: string;
  conversationId: string | null;
  turns: ChatTurnView[];
  debugOpen: boolean;
  busy: boolean;
  error: string | null;
  canRetry: boolean;
}

interface PendingSend {
  text: string;
  nonce: string;
}

export type StateListener = (state: ChatState) => void;

export class ChatController {
  private turns: ChatTurnView[] = [];
  private conversationId: string | null = null;
  private debugOpen = false;
  private busy = false;
  private error: string | null = null;
  private failedSend: PendingSend | null = null;
  private listeners: StateListener[] = [];

  constructor(
    private readonly api: ApiClient,
    readonly userId: string,
    private readonly now: () => number = () => Date.now(),
  ) {}

  subscribe(listener: StateListener): () => void {
    this.listeners.push(listener);
    listener(this.state());
    return () => {
      this.listeners = this.listeners.filter((l) => l !== listener);
    };
  }

  state(): ChatState {
    return {
      userId: this.userId,
      conversationId: this.conversationId,
      turns: [...this.turns],
      debugOpen: this.debugOpen,
      busy: this.busy,
      error: this.error,
      canRetry: this.failedSend !== null,
    };
  }

  private emit(): void {
    const snapshot = this.state();
    for (const listener of this.listeners) listener(snapshot);
  }

  async startConversation(): Promise<string> {
    this.conversationId = await this.api.createConversation(this.userId);
    this.turns = [];
    this.error = null;
    this.failedSend = null;
    this.emit();
    return this.conversationId;
  }

  /** Rejoin an existing conversation, replaying history from the server. */
  async resume(conversationId: string): Promise<void> {
    const info = await this.api.getConversation(conversationId);
    this.conversationId = info.conversation_id;
    this.turns = info.transcript.flatMap((entry) => [
      { author: "user" as const, text: entry.user, timestamp: this.now() },
      { author: "bot" as const, text: entry.bot, timestamp: this.now() },
    ]);
    this.error = null;
    this.failedSend = null;
    this.emit();
  }

  async sendTurn(text: string): Promise<ChatTurnView | null> {
    const trimmed = text.trim();
    if (!trimmed || this.busy || this.conversationId === null) return null;
    this.turns.push({ author: "user", text: trimmed, timestamp: this.now() });
    return this.dispatch({ text: trimmed, nonce: newNonce() });
  }

  /** Resend the last failed turn with its original nonce. */
  async retryLast(): Promise<ChatTurnView | null> {
    if (!this.failedSend || this.busy) return null;
    return this.dispatch(this.failedSend);
  }

  private async dispatch(send: PendingSend): Promise<ChatTurnView | null> {
    this.busy = true;
    this.error = null;
    this.emit();
    try {
      const payload = await this.api.sendTurn(
        this.conversationId as string,
        send.text,
        send.nonce,
      );
      const botTurn: ChatTurnView = {
        author: "bot",
        text: payload.text,
        timestamp: this.now(),
        debug: payload.debug,
      };
      this.turns.push(botTurn);
      this.failedSend = null;
      return botTurn;
    } catch (err) {
      this.failedSend = send;
      this.error = err instanceof Error ? err.message : String(err);
      return null;
    } finally {
      this.busy = false;
      this.emit();
    }
  }

  toggleDebug(): void {
    this.debugOpen = !this.debugOpen;
    this.emit();
  }

  /** Fresh conversation, same user — learned facts carry over. */
  async reset(): Promise<void> {
    await this.startConversation();
  }
}
