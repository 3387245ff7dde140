// Wire types for the frontrank HTTP API (docs/api.md in the engine repo).
// The UI never reorders or recomputes anything it receives.

export interface FrontItem {
  item_id: string;
  item_index: number;
  coords: number[];
  position: number;
}

export interface FrontsResponse {
  model_id: string;
  query_ids: number[];
  depth: number;
  n_fronts_total: number;
  fronts: FrontItem[][];
  timing_ms: number;
}

export interface ItemResponse {
  item_id: string;
  item_index: number;
  labels: number[] | null;
  thumbnail: string | null;
  feature_dim: number;
}

export interface ApiClient {
  fetchFronts(modelId: string, queryIds: [number, number], depth: number): Promise<FrontsResponse>;
  fetchItem(modelId: string, itemId: string): Promise<ItemResponse>;
}
