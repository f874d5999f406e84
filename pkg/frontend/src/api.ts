/** HTTP client for the repository service (API v1). The viewer talks to
 * nothing else; filtering and measurement always run server-side. */

import { FilterFlags, MeasurementReport, RecordMeta } from "./types.js";

export class ApiError extends Error {
  constructor(
    message: string,
    public readonly status: number,
  ) {
    super(message);
  }
}

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

/** Query string for server-side filtering; parameter names are identical
 * to the CLI flags (hp, lp, notch, baseline, emg). */
export function filtersToQuery(filters: FilterFlags): string {
  const params = new URLSearchParams();
  params.set("hp", filters.hp);
  params.set("lp", filters.lp);
  params.set("notch", filters.notch);
  params.set("baseline", filters.baseline);
  params.set("emg", filters.emg);
  return params.toString();
}

async function errorMessage(response: Response): Promise<string> {
  try {
    const body = await response.json();
    if (body && typeof body.error === "string") return body.error;
  } catch {
    /* non-JSON body */
  }
  return `server returned ${response.status}`;
}

export class ApiClient {
  constructor(
    public readonly baseUrl: string,
    private readonly fetchImpl: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private url(path: string): string {
    return this.baseUrl.replace(/\/+$/, "") + path;
  }

  private async get(path: string, signal?: AbortSignal): Promise<Response> {
    const response = await this.fetchImpl(this.url(path), { signal });
    if (!response.ok) throw new ApiError(await errorMessage(response), response.status);
    return response;
  }

  async health(): Promise<boolean> {
    try {
      await this.get("/api/v1/health");
      return true;
    } catch {
      return false;
    }
  }

  async listRecords(signal?: AbortSignal): Promise<RecordMeta[]> {
    const response = await this.get("/api/v1/records", signal);
    const body = await response.json();
    return body.records as RecordMeta[];
  }

  /** Raw or server-side-filtered batch text for one record. */
  async fetchRecordText(
    recordId: string,
    filters?: FilterFlags,
    signal?: AbortSignal,
  ): Promise<string> {
    const query = filters ? `?${filtersToQuery(filters)}` : "";
    const response = await this.get(
      `/api/v1/records/${encodeURIComponent(recordId)}${query}`,
      signal,
    );
    return response.text();
  }

  async fetchMeasurements(recordId: string, signal?: AbortSignal): Promise<MeasurementReport> {
    const response = await this.get(
      `/api/v1/records/${encodeURIComponent(recordId)}/measurements`,
      signal,
    );
    return (await response.json()) as MeasurementReport;
  }

  async manualAxis(request: {
    lead_a: string;
    baseline_a: number;
    peak_a: number;
    lead_b: string;
    baseline_b: number;
    peak_b: number;
  }): Promise<number> {
    const response = await this.fetchImpl(this.url("/api/v1/tools/manual-axis"), {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(request),
    });
    if (!response.ok) throw new ApiError(await errorMessage(response), response.status);
    const body = await response.json();
    return body.axis_deg as number;
  }
}
