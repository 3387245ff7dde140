// HTTP client plus a sequence guard that drops stale slider responses.

import { ApiClient, FrontsResponse, ItemResponse } from "./types.js";

export class HttpClient implements ApiClient {
  constructor(private baseUrl: string) {}

  private async get<T>(path: string): Promise<T> {
    const resp = await fetch(`${this.baseUrl}${path}`);
    if (!resp.ok) {
      throw new Error(`service returned ${resp.status} for ${path}`);
    }
    return (await resp.json()) as T;
  }

  fetchFronts(modelId: string, queryIds: [number, number], depth: number): Promise<FrontsResponse> {
    const qs = `queries=${queryIds[0]},${queryIds[1]}&depth=${depth}`;
    return this.get<FrontsResponse>(`/fronts/${encodeURIComponent(modelId)}?${qs}`);
  }

  fetchItem(modelId: string, itemId: string): Promise<ItemResponse> {
    return this.get<ItemResponse>(
      `/items/${encodeURIComponent(itemId)}?model_id=${encodeURIComponent(modelId)}`,
    );
  }
}

/**
 * At most one slider fetch is applied at a time: every request takes a
 * ticket and a response is delivered only while its ticket is current.
 */
export class SequencedFetcher {
  private seq = 0;

  async run<T>(request: () => Promise<T>): Promise<T | null> {
    const ticket = ++this.seq;
    const result = await request();
    return ticket === this.seq ? result : null;
  }
}
