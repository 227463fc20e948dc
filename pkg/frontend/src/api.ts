// Typed client for the suggestion service endpoints.

export type ServiceName = "UST" | "HTS" | "TS" | "CTS";
export type Section = "main" | "alternative";

export interface SuggestionItem {
  term: string;
  position: number; // global 1-based rank across both sections
  section: Section;
  source: string;
}

export interface SuggestResponse {
  query: string;
  service_type: ServiceName;
  suggestions: SuggestionItem[];
}

export interface SelectionRecord {
  entered_term: string;
  chosen_term: string;
  position: number;
  section: Section;
  service_type: ServiceName;
  session_id: string;
}

export interface SearchRecord {
  submitted_term: string;
  service_type?: ServiceName;
  session_id: string;
}

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
  private readonly fetchFn: FetchLike;

  constructor(readonly baseUrl: string, fetchFn?: FetchLike) {
    // bind lazily so the global fetch keeps its expected receiver
    this.fetchFn = fetchFn ?? ((input, init) => fetch(input, init));
  }

  async suggest(query: string, service: ServiceName): Promise<SuggestResponse> {
    const params = new URLSearchParams({ q: query, service });
    const response = await this.fetchFn(`${this.baseUrl}/suggest?${params}`);
    if (!response.ok) {
      throw new Error(`suggest failed: HTTP ${response.status}`);
    }
    return (await response.json()) as SuggestResponse;
  }

  async newSession(): Promise<string> {
    const response = await this.fetchFn(`${this.baseUrl}/session`);
    if (!response.ok) {
      throw new Error(`session failed: HTTP ${response.status}`);
    }
    const body = (await response.json()) as { session_id: string };
    return body.session_id;
  }

  async resultCount(query: string): Promise<number | null> {
    const params = new URLSearchParams({ q: query });
    const response = await this.fetchFn(`${this.baseUrl}/search?${params}`);
    if (!response.ok) {
      return null;
    }
    const body = (await response.json()) as { result_count: number | null };
    return body.result_count;
  }

  async logSelection(record: SelectionRecord): Promise<void> {
    await this.post("/log/selection", record);
  }

  async logSearch(record: SearchRecord): Promise<void> {
    await this.post("/log/search", record);
  }

  private async post(path: string, body: unknown): Promise<void> {
    const response = await this.fetchFn(`${this.baseUrl}${path}`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(body),
    });
    if (!response.ok) {
      throw new Error(`${path} failed: HTTP ${response.status}`);
    }
  }
}
