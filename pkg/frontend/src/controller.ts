// Search-box state machine: debounced suggestion fetching, keyboard and
// mouse selection, selection/search logging. Framework-free so it can be
// driven headlessly in tests and wired to real DOM in the browser.

import {
  ApiClient,
  Section,
  ServiceName,
  SuggestionItem,
} from "./api.js";
import { debounce, Debounced } from "./debounce.js";

export interface UiState {
  input: string;
  service: ServiceName;
  sessionId: string | null;
  suggestions: SuggestionItem[]; // exactly as the server sent them
  open: boolean;
  highlighted: number; // index into suggestions, -1 = none
  resultCount: number | null;
  lastError: string | null;
}

export interface ControllerOptions {
  service?: ServiceName;
  debounceMs?: number;
  onRender?: (state: UiState) => void;
}

export const SERVICES: ServiceName[] = ["UST", "HTS", "TS", "CTS"];

export class SearchController {
  readonly state: UiState;
  private readonly api: ApiClient;
  private readonly onRender: (state: UiState) => void;
  private readonly queueQuery: Debounced<[]>;
  private requestSeq = 0; // stale suggestion responses are discarded

  constructor(api: ApiClient, options: ControllerOptions = {}) {
    this.api = api;
    this.onRender = options.onRender ?? (() => {});
    this.state = {
      input: "",
      service: options.service ?? "CTS",
      sessionId: null,
      suggestions: [],
      open: false,
      highlighted: -1,
      resultCount: null,
      lastError: null,
    };
    this.queueQuery = debounce(() => {
      void this.queryNow();
    }, options.debounceMs ?? 150);
  }

  /** Obtain a visitor session id; falls back to a local id offline. */
  async start(): Promise<void> {
    try {
      this.state.sessionId = await this.api.newSession();
    } catch {
      this.state.sessionId = `local-${Date.now().toString(36)}-${Math.random()
        .toString(36)
        .slice(2, 10)}`;
    }
    this.render();
  }

  handleInput(text: string): void {
    this.state.input = text;
    if (text === "") {
      // cleared input hides the dropdown immediately
      this.queueQuery.cancel();
      this.state.suggestions = [];
      this.state.open = false;
      this.state.highlighted = -1;
      this.render();
      return;
    }
    this.queueQuery();
  }

  /** Run the pending suggestion request now (tests, Enter-to-refresh). */
  async queryNow(): Promise<void> {
    this.queueQuery.cancel();
    const query = this.state.input;
    const seq = ++this.requestSeq;
    let items: SuggestionItem[];
    try {
      const response = await this.api.suggest(query, this.state.service);
      items = response.suggestions;
    } catch (error) {
      // degraded mode: no suggestions, input stays usable
      if (seq === this.requestSeq) {
        this.state.suggestions = [];
        this.state.open = false;
        this.state.highlighted = -1;
        this.state.lastError = String(error);
        this.render();
      }
      return;
    }
    if (seq !== this.requestSeq || query !== this.state.input) {
      return; // superseded by newer input
    }
    this.state.suggestions = items;
    this.state.open = items.length > 0;
    this.state.highlighted = -1;
    this.state.lastError = null;
    this.render();
  }

  setService(service: ServiceName): void {
    if (this.state.service === service) {
      return;
    }
    this.state.service = service;
    this.state.suggestions = [];
    this.state.open = false;
    this.state.highlighted = -1;
    this.render();
    if (this.state.input !== "") {
      void this.queryNow();
    }
  }

  /** Items of one section, in server order. */
  section(which: Section): SuggestionItem[] {
    return this.state.suggestions.filter((item) => item.section === which);
  }

  moveHighlight(delta: 1 | -1): void {
    const count = this.state.suggestions.length;
    if (count === 0) {
      return;
    }
    this.state.open = true;
    const next = this.state.highlighted + delta;
    this.state.highlighted = Math.min(Math.max(next, 0), count - 1);
    this.render();
  }

  /**
   * Accept one suggestion: the chosen display term replaces the input and
   * exactly one selection record is logged, carrying the text that was in
   * the field at selection time plus the item's global position and
   * section. A failed log write is retried once and never blocks the UI.
   */
  async selectIndex(index: number): Promise<void> {
    const item = this.state.suggestions[index];
    if (item === undefined) {
      return;
    }
    const entered = this.state.input;
    this.state.input = item.term;
    this.state.suggestions = [];
    this.state.open = false;
    this.state.highlighted = -1;
    this.render();
    const record = {
      entered_term: entered,
      chosen_term: item.term,
      position: item.position,
      section: item.section,
      service_type: this.state.service,
      session_id: this.state.sessionId ?? "unknown",
    };
    try {
      await this.api.logSelection(record);
    } catch {
      try {
        await this.api.logSelection(record);
      } catch (error) {
        this.state.lastError = String(error);
        this.render();
      }
    }
  }

  async selectHighlighted(): Promise<boolean> {
    if (this.state.highlighted < 0) {
      return false;
    }
    await this.selectIndex(this.state.highlighted);
    return true;
  }

  /** Submit the search: log it and show the stub result count. */
  async submit(): Promise<void> {
    this.queueQuery.cancel();
    this.state.open = false;
    this.state.highlighted = -1;
    const record = {
      submitted_term: this.state.input,
      service_type: this.state.service,
      session_id: this.state.sessionId ?? "unknown",
    };
    try {
      await this.api.logSearch(record);
    } catch {
      try {
        await this.api.logSearch(record);
      } catch (error) {
        this.state.lastError = String(error);
      }
    }
    this.state.resultCount = await this.api.resultCount(this.state.input);
    this.render();
  }

  /** Keyboard protocol; returns true when the key was consumed. */
  async handleKey(key: string): Promise<boolean> {
    switch (key) {
      case "ArrowDown":
        this.moveHighlight(1);
        return true;
      case "ArrowUp":
        this.moveHighlight(-1);
        return true;
      case "Escape":
        this.state.open = false;
        this.state.highlighted = -1;
        this.render();
        return true;
      case "Enter":
        if (this.state.open && (await this.selectHighlighted())) {
          return true;
        }
        await this.submit();
        return true;
      default:
        return false;
    }
  }

  private render(): void {
    this.onRender(this.state);
  }
}
