/** Wire and widget types for the Axlerod chat panel. */

export interface WidgetConfig {
  /** Base URL of the assistant service, e.g. "http://127.0.0.1:8080". */
  baseUrl: string;
  /** CSS selector of the host element (or the element itself). */
  mount: string | HTMLElement;
  /** Optional bearer token sent as Authorization. */
  authToken?: string;
  /** Optional initial policy context, e.g. "AUT9000007". */
  context?: string;
}

export interface ToolActivity {
  tool: string;
  latency_ms: number;
  status: string;
}

/** The assistant-specific block attached to every chat response. */
export interface AxlerodBlock {
  session_id: string;
  tool_activity: ToolActivity[];
  cost_microcents: number;
  cost: string;
  usage_estimated: boolean;
  resolved_policy: string | null;
  elapsed_ms: number;
}

export interface ChatResponse {
  id: string;
  object: string;
  created: number;
  model: string;
  choices: Array<{
    index: number;
    message: { role: string; content: string };
    finish_reason: string;
  }>;
  usage: {
    prompt_tokens: number;
    completion_tokens: number;
    total_tokens: number;
  };
  axlerod: AxlerodBlock;
}

export interface SessionInfo {
  session_id: string;
  context: string | null;
}

export interface TranscriptEntry {
  role: "user" | "assistant";
  text: string;
  /** Present on assistant entries only. */
  toolActivity?: ToolActivity[];
  cost?: string;
  timestamp: number;
  /** Set when the turn failed and can be retried (the failed user text). */
  retryText?: string;
}

/** Client-side mirror of the service's policy number grammar. */
export const POLICY_NUMBER_RE = /^(AUT|HOM|CAU|UMB)\d{7}$/;
