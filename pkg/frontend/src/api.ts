/** Thin typed client over the findings search API. */

import type { ApiError, ApiLookupResult, ApiSearchPage } from "./types.js";
import { parseIdList, type ViewState } from "./state.js";

export class ApiRequestError extends Error {
  constructor(
    message: string,
    public readonly status: number,
  ) {
    super(message);
  }
}

async function parseFailure(response: Response): Promise<never> {
  let detail = response.statusText;
  try {
    const body = (await response.json()) as ApiError;
    if (body && typeof body.detail === "string") detail = body.detail;
    else if (body && body.detail !== undefined) detail = JSON.stringify(body.detail);
  } catch {
    // non-JSON error body; keep the status text
  }
  throw new ApiRequestError(detail, response.status);
}

export class ApiClient {
  constructor(private readonly baseUrl: string = "") {}

  searchUrl(query: string, fields: string[], page: number): string {
    const params = new URLSearchParams({
      q: query,
      fields: fields.join(","),
      page: String(page),
    });
    return `${this.baseUrl}/search?${params.toString()}`;
  }

  exportUrl(state: ViewState): string {
    const params = new URLSearchParams();
    if (state.mode === "ids") {
      params.set("ids", parseIdList(state.query).join(","));
    } else {
      params.set("q", state.query);
      params.set("fields", state.fields.join(","));
    }
    return `${this.baseUrl}/export.csv?${params.toString()}`;
  }

  async search(query: string, fields: string[], page: number): Promise<ApiSearchPage> {
    const response = await fetch(this.searchUrl(query, fields, page));
    if (!response.ok) await parseFailure(response);
    return (await response.json()) as ApiSearchPage;
  }

  async lookup(ids: string[]): Promise<ApiLookupResult> {
    const response = await fetch(`${this.baseUrl}/lookup`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ ids }),
    });
    if (!response.ok) await parseFailure(response);
    return (await response.json()) as ApiLookupResult;
  }

  async exportCsv(state: ViewState): Promise<string> {
    const response = await fetch(this.exportUrl(state));
    if (!response.ok) await parseFailure(response);
    return await response.text();
  }

  async health(): Promise<{ status: string; docs: number; findings: number }> {
    const response = await fetch(`${this.baseUrl}/healthz`);
    if (!response.ok) await parseFailure(response);
    return (await response.json()) as { status: string; docs: number; findings: number };
  }
}
