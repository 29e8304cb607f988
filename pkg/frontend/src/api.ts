import type { Health, HistoryRecord } from "./types";

export class ApiError extends Error {
  constructor(
    public readonly status: number,
    public readonly code: string,
  ) {
    super(`service error ${status}: ${code}`);
  }
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

/**
 * Thin typed client over the prediction service's JSON API. The UI never
 * computes predictions itself; everything rendered comes from here.
 */
export class ApiClient {
  constructor(
    private readonly baseUrl: string = "",
    private readonly fetchFn: FetchLike = (...args) => fetch(...args),
  ) {}

  async predict(image: Blob, filename: string, description = ""): Promise<HistoryRecord> {
    const form = new FormData();
    form.append("image", image, filename);
    if (description) form.append("description", description);
    const resp = await this.fetchFn(`${this.baseUrl}/predict`, {
      method: "POST",
      body: form,
    });
    return this.parse(resp);
  }

  async records(limit?: number, offset?: number): Promise<HistoryRecord[]> {
    const params = new URLSearchParams();
    if (limit !== undefined) params.set("limit", String(limit));
    if (offset !== undefined) params.set("offset", String(offset));
    const query = params.toString();
    const resp = await this.fetchFn(`${this.baseUrl}/records${query ? `?${query}` : ""}`);
    return this.parse(resp);
  }

  async setDescription(id: string, text: string): Promise<HistoryRecord> {
    const resp = await this.fetchFn(`${this.baseUrl}/records/${id}/description`, {
      method: "PUT",
      headers: { "Content-Type": "text/plain; charset=utf-8" },
      body: text,
    });
    return this.parse(resp);
  }

  async health(): Promise<Health> {
    return this.parse(await this.fetchFn(`${this.baseUrl}/health`));
  }

  private async parse(resp: Response): Promise<any> {
    if (resp.ok) return resp.json();
    let code = "unknown_error";
    try {
      const body = await resp.json();
      if (body && typeof body.error === "string") code = body.error;
    } catch {
      // non-JSON error body; keep the generic code
    }
    throw new ApiError(resp.status, code);
  }
}
