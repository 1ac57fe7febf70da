/** The embeddable chat panel: transcript, composer, and context banner. */

import { ServiceClient, ServiceError } from "./api.js";
import {
  POLICY_NUMBER_RE,
  type ToolActivity,
  type TranscriptEntry,
  type WidgetConfig,
} from "./types.js";

/** Thrown when mount() targets an element that already hosts a widget. */
export class MountConflictError extends Error {
  constructor(message: string) {
    super(message);
    this.name = "MountConflictError";
  }
}

const MOUNTED_ATTR = "data-axlerod-mounted";

const STYLE_ID = "axlerod-widget-style";
const CSS = `
.axlerod-widget { display: flex; flex-direction: column; gap: 8px;
  font-family: system-ui, sans-serif; font-size: 14px; max-width: 480px;
  border: 1px solid #cdd3da; border-radius: 8px; padding: 12px; }
.axlerod-banner { background: #eef4fb; border-radius: 6px; padding: 6px 10px;
  display: flex; justify-content: space-between; align-items: center; }
.axlerod-banner button { border: none; background: none; cursor: pointer; }
.axlerod-error { background: #fbeeee; color: #8a1f1f; border-radius: 6px;
  padding: 6px 10px; }
.axlerod-notice { color: #6b6355; padding: 2px 4px; font-size: 13px; }
.axlerod-transcript { display: flex; flex-direction: column; gap: 6px;
  min-height: 60px; max-height: 360px; overflow-y: auto; }
.axlerod-entry { border-radius: 6px; padding: 6px 10px; white-space: pre-wrap; }
.axlerod-entry.user { background: #eef; align-self: flex-end; }
.axlerod-entry.assistant { background: #f4f4f2; align-self: flex-start; }
.axlerod-entry.failed { background: #fbeeee; }
.axlerod-chips { margin-top: 4px; display: flex; gap: 6px; flex-wrap: wrap; }
.axlerod-chip { background: #e2e8f0; border-radius: 10px; padding: 1px 8px;
  font-size: 12px; }
.axlerod-cost { color: #6b7280; font-size: 12px; margin-left: 4px; }
.axlerod-composer { display: flex; gap: 6px; }
.axlerod-composer input { flex: 1; padding: 6px 8px; }
`;

function ensureStylesheet(doc: Document): void {
  if (!doc.getElementById(STYLE_ID)) {
    const style = doc.createElement("style");
    style.id = STYLE_ID;
    style.textContent = CSS;
    doc.head.appendChild(style);
  }
}

function chipLabel(activity: ToolActivity): string {
  return `${activity.tool} · ${Math.round(activity.latency_ms)} ms`;
}

export class AxlerodWidget {
  /** Resolves once the session is created (or mount has failed visibly). */
  readonly ready: Promise<void>;

  private readonly host: HTMLElement;
  private readonly client: ServiceClient;
  private readonly entries: TranscriptEntry[] = [];

  private sessionId: string | null = null;
  private contextPolicy: string | null = null;
  private resolvedPolicy: string | null = null;
  private inFlight = false;
  private fatalError: string | null = null;
  private noticeText: string | null = null;

  private root!: HTMLElement;
  private transcriptEl!: HTMLElement;
  private inputEl!: HTMLInputElement;
  private sendButton!: HTMLButtonElement;

  private constructor(host: HTMLElement, config: WidgetConfig) {
    this.host = host;
    this.client = new ServiceClient(config.baseUrl, config.authToken);
    this.contextPolicy = config.context ?? null;
    ensureStylesheet(host.ownerDocument);
    this.buildSkeleton();
    this.render();
    this.ready = this.openSession();
  }

  /**
   * Create a widget inside the configured element. The returned handle is
   * usable immediately; `ready` resolves when the session exists.
   */
  static mount(config: WidgetConfig): AxlerodWidget {
    if (!config.baseUrl || !/^https?:\/\//.test(config.baseUrl)) {
      throw new Error(`baseUrl must be an http(s) URL, got ${JSON.stringify(config.baseUrl)}`);
    }
    const host =
      typeof config.mount === "string"
        ? document.querySelector<HTMLElement>(config.mount)
        : config.mount;
    if (!host) {
      throw new Error(`mount element not found: ${String(config.mount)}`);
    }
    if (host.hasAttribute(MOUNTED_ATTR)) {
      throw new MountConflictError("element already hosts a widget");
    }
    host.setAttribute(MOUNTED_ATTR, "true");
    return new AxlerodWidget(host, config);
  }

  // -- lifecycle ---------------------------------------------------------

  private async openSession(): Promise<void> {
    try {
      const info = await this.client.createSession(this.contextPolicy);
      this.sessionId = info.session_id;
      this.contextPolicy = info.context;
    } catch (err) {
      this.fatalError =
        err instanceof ServiceError && err.status === 0
          ? "Could not reach the assistant service. Check that it is running and reload."
          : `Could not start a session: ${(err as Error).message}`;
    }
    this.render();
  }

  destroy(): void {
    this.host.removeAttribute(MOUNTED_ATTR);
    this.root.remove();
  }

  // -- public state ------------------------------------------------------

  get transcript(): readonly TranscriptEntry[] {
    return this.entries;
  }

  get session(): string | null {
    return this.sessionId;
  }

  /** The policy shown in the banner: pinned context, else last resolved. */
  get viewingPolicy(): string | null {
    return this.contextPolicy ?? this.resolvedPolicy;
  }

  // -- sending -----------------------------------------------------------

  /**
   * Send one user message. Returns false (with a visible notice) when the
   * text is empty, the session is unavailable, or a turn is already in
   * flight — exactly one send per widget may be active.
   */
  async send(text: string): Promise<boolean> {
    const trimmed = text.trim();
    if (!trimmed || this.fatalError || !this.sessionId) {
      return false;
    }
    if (this.inFlight) {
      this.showNotice("A reply is still in flight — wait for it to finish.");
      return false;
    }
    const entry: TranscriptEntry = {
      role: "user",
      text: trimmed,
      timestamp: Date.now(),
    };
    this.entries.push(entry);
    return this.runTurn(trimmed, null);
  }

  /** Issue the request for a user text already present in the transcript. */
  private async runTurn(
    text: string,
    reuse: TranscriptEntry | null,
  ): Promise<boolean> {
    this.inFlight = true;
    this.noticeText = null;
    this.render();
    try {
      const response = await this.client.chat(this.sessionId as string, text);
      const reply: TranscriptEntry = reuse ?? {
        role: "assistant",
        text: "",
        timestamp: Date.now(),
      };
      reply.text = response.choices[0]?.message.content ?? "";
      reply.toolActivity = response.axlerod.tool_activity;
      reply.cost = response.axlerod.cost;
      reply.retryText = undefined;
      if (reuse == null) {
        this.entries.push(reply);
      }
      if (response.axlerod.resolved_policy) {
        this.resolvedPolicy = response.axlerod.resolved_policy;
      }
      return true;
    } catch (err) {
      this.handleTurnError(err, text, reuse);
      return false;
    } finally {
      this.inFlight = false;
      this.render();
    }
  }

  private handleTurnError(
    err: unknown,
    text: string,
    reuse: TranscriptEntry | null,
  ): void {
    if (err instanceof ServiceError && err.status === 409) {
      this.showNotice(
        "The session is busy with another turn — try again in a moment.",
      );
      return;
    }
    const reason =
      err instanceof ServiceError && err.status === 0
        ? "The service could not be reached."
        : `The service reported an error: ${(err as Error).message}`;
    const failed: TranscriptEntry = reuse ?? {
      role: "assistant",
      text: "",
      timestamp: Date.now(),
    };
    failed.text = reason;
    failed.retryText = text;
    failed.toolActivity = undefined;
    failed.cost = undefined;
    if (reuse == null) {
      this.entries.push(failed);
    }
  }

  /** Re-run the failed turn in place: the placeholder becomes the answer. */
  private retry(entry: TranscriptEntry): void {
    if (this.inFlight || !entry.retryText) {
      return;
    }
    void this.runTurn(entry.retryText, entry);
  }

  // -- context -----------------------------------------------------------

  /**
   * Pin (or clear, with null) the session's policy context. Malformed
   * numbers never reach the service: the client-side grammar check fails
   * fast with an inline message.
   */
  async setContext(policyNumber: string | null): Promise<boolean> {
    if (!this.sessionId) {
      return false;
    }
    if (policyNumber !== null && !POLICY_NUMBER_RE.test(policyNumber)) {
      this.showNotice(
        `"${policyNumber}" is not a policy number (expected e.g. AUT0001234).`,
      );
      return false;
    }
    try {
      const info = await this.client.setContext(this.sessionId, policyNumber);
      this.contextPolicy = info.context;
      if (policyNumber === null) {
        this.resolvedPolicy = null; // clearing context removes the banner
      }
      this.noticeText = null;
      this.render();
      return true;
    } catch (err) {
      this.showNotice(
        err instanceof ServiceError
          ? err.message
          : `Could not update context: ${(err as Error).message}`,
      );
      return false;
    }
  }

  // -- rendering ---------------------------------------------------------

  private showNotice(text: string): void {
    this.noticeText = text;
    this.render();
  }

  private buildSkeleton(): void {
    const doc = this.host.ownerDocument;
    this.root = doc.createElement("div");
    this.root.className = "axlerod-widget";

    this.transcriptEl = doc.createElement("div");
    this.transcriptEl.className = "axlerod-transcript";
    this.transcriptEl.setAttribute("role", "log");

    const form = doc.createElement("form");
    form.className = "axlerod-composer";
    this.inputEl = doc.createElement("input");
    this.inputEl.type = "text";
    this.inputEl.placeholder = "Ask about a policy…";
    this.sendButton = doc.createElement("button");
    this.sendButton.type = "submit";
    this.sendButton.textContent = "Send";
    form.append(this.inputEl, this.sendButton);
    form.addEventListener("submit", (event) => {
      event.preventDefault();
      const text = this.inputEl.value;
      this.inputEl.value = "";
      void this.send(text);
    });
    this.inputEl.addEventListener("input", () => {
      this.sendButton.disabled = this.composerDisabled();
    });

    this.root.append(this.transcriptEl, form);
    this.host.appendChild(this.root);
  }

  private composerDisabled(): boolean {
    return (
      this.fatalError !== null ||
      this.sessionId === null ||
      this.inFlight ||
      this.inputEl.value.trim() === ""
    );
  }

  /** Repaint everything from state; the transcript itself never mutates. */
  rerender(): void {
    this.render();
  }

  private render(): void {
    const doc = this.host.ownerDocument;
    // remove previous banner/error/notice blocks, keep transcript + composer
    for (const stale of Array.from(
      this.root.querySelectorAll(".axlerod-banner, .axlerod-error, .axlerod-notice"),
    )) {
      stale.remove();
    }

    if (this.fatalError) {
      const error = doc.createElement("div");
      error.className = "axlerod-error";
      error.textContent = this.fatalError;
      this.root.prepend(error);
    } else if (this.viewingPolicy) {
      const banner = doc.createElement("div");
      banner.className = "axlerod-banner";
      const label = doc.createElement("span");
      label.textContent = `Viewing policy ${this.viewingPolicy}`;
      const clear = doc.createElement("button");
      clear.type = "button";
      clear.textContent = "×";
      clear.title = "Clear context";
      clear.addEventListener("click", () => void this.setContext(null));
      banner.append(label, clear);
      this.root.prepend(banner);
    }

    if (this.noticeText) {
      const notice = doc.createElement("div");
      notice.className = "axlerod-notice";
      notice.textContent = this.noticeText;
      this.transcriptEl.after(notice);
    }

    this.transcriptEl.replaceChildren(
      ...this.entries.map((entry) => this.renderEntry(entry)),
    );
    this.transcriptEl.scrollTop = this.transcriptEl.scrollHeight;

    this.inputEl.disabled = this.fatalError !== null || this.sessionId === null;
    this.sendButton.disabled = this.composerDisabled();
  }

  private renderEntry(entry: TranscriptEntry): HTMLElement {
    const doc = this.host.ownerDocument;
    const el = doc.createElement("div");
    el.className = `axlerod-entry ${entry.role}`;
    const text = doc.createElement("div");
    text.textContent = entry.text;
    el.appendChild(text);

    if (entry.toolActivity && entry.toolActivity.length > 0) {
      const chips = doc.createElement("div");
      chips.className = "axlerod-chips";
      for (const activity of entry.toolActivity) {
        const chip = doc.createElement("span");
        chip.className = "axlerod-chip";
        chip.textContent = chipLabel(activity);
        chips.appendChild(chip);
      }
      if (entry.cost) {
        const cost = doc.createElement("span");
        cost.className = "axlerod-cost";
        cost.textContent = entry.cost;
        chips.appendChild(cost);
      }
      el.appendChild(chips);
    }

    if (entry.retryText) {
      el.classList.add("failed");
      const retry = doc.createElement("button");
      retry.type = "button";
      retry.className = "axlerod-retry";
      retry.textContent = "Retry";
      retry.addEventListener("click", () => this.retry(entry));
      el.appendChild(retry);
    }
    return el;
  }
}
