/**
 * Typed client for the engine's HTTP API.
 *
 * Every turn carries a client-generated nonce; the server treats a
 * repeated nonce as a retry and returns the original response, so a
 * network hiccup never duplicates a turn.
 */

export interface Hypothesis {
  text: string;
  confidence: number;
}

export interface SegmentDebug {
  hypothesis: number;
  index: number;
  text: string;
  terminal: string;
  dialogue_acts: [string, number][];
  mentions: { text: string; candidates: [string, number][] }[];
  properties: [string, number][];
  tense: string;
}

export interface ActionDebug {
  segment: [number, number];
  kind: string;
  da: string;
  pair: string;
  confidence: number;
  asks_question: boolean;
  property: string | null;
  dom: unknown;
  ran: unknown;
}

export interface TurnDebug {
  timings: Record<string, number>;
  segments: SegmentDebug[];
  analyzer_calls: Record<string, number>;
  actions: Record<string, ActionDebug[][]>;
  chosen_hypothesis: number;
  selected: ActionDebug[];
  enrichment: Record<string, ActionDebug>;
  pair_stack: { pair: string; node: string }[];
}

export interface TurnPayload {
  conversation_id: string;
  text: string;
  debug?: TurnDebug;
}

export interface ConversationInfo {
  conversation_id: string;
  user_id: string;
  turns: number;
  pending_question: boolean;
  transcript: { user: string; bot: string }[];
}

export interface UserProfile {
  user_id: string;
  facts: { property: string; value: unknown; tense: string }[];
}

export type FetchLike = (
  input: string,
  init?: RequestInit,
) => Promise<Response>;

export class ApiError extends Error {
  constructor(
    readonly status: number,
    message: string,
  ) {
    super(message);
    this.name = "ApiError";
  }
}

export function newNonce(): string {
  if (typeof crypto !== "undefined" && "randomUUID" in crypto) {
    return crypto.randomUUID();
  }
  return `${Date.now()}-${Math.random().toString(36).slice(2)}`;
}

export class ApiClient {
  constructor(
    private readonly baseUrl: string,
    private readonly fetchImpl: FetchLike = (input, init) =>
      fetch(input, init),
  ) {}

  private async request<T>(
    method: string,
    path: string,
    body?: unknown,
  ): Promise<T> {
    const response = await this.fetchImpl(`${this.baseUrl}${path}`, {
      method,
      headers: body === undefined ? {} : { "content-type": "application/json" },
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    if (!response.ok) {
      let detail = response.statusText;
      try {
        const parsed = (await response.json()) as { detail?: unknown };
        if (parsed.detail !== undefined) detail = JSON.stringify(parsed.detail);
      } catch {
        // non-JSON error body; keep the status text
      }
      throw new ApiError(response.status, detail);
    }
    return (await response.json()) as T;
  }

  health(): Promise<{ status: string }> {
    return this.request("GET", "/api/health");
  }

  async createConversation(userId: string): Promise<string> {
    const payload = await this.request<{ conversation_id: string }>(
      "POST",
      "/api/conversations",
      { user_id: userId },
    );
    return payload.conversation_id;
  }

  getConversation(conversationId: string): Promise<ConversationInfo> {
    return this.request("GET", `/api/conversations/${conversationId}`);
  }

  getProfile(userId: string): Promise<UserProfile> {
    return this.request("GET", `/api/users/${userId}/profile`);
  }

  /**
   * Run one turn. Retries once on network failure, reusing the nonce so
   * the server can deduplicate if the first attempt actually landed.
   */
  async sendTurn(
    conversationId: string,
    text: string,
    nonce: string = newNonce(),
  ): Promise<TurnPayload> {
    const body = {
      hypotheses: [{ text, confidence: 1.0 }],
      nonce,
      debug: true,
    };
    const path = `/api/conversations/${conversationId}/turns`;
    try {
      return await this.request<TurnPayload>("POST", path, body);
    } catch (error) {
      if (error instanceof ApiError) throw error; // server said no; don't retry
      return await this.request<TurnPayload>("POST", path, body);
    }
  }
}
