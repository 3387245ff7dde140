// Explorer state, deep-link encoding, and the fronts cache contract.

import { FrontItem, FrontsResponse } from "./types.js";

export interface ExplorerState {
  modelId: string;
  queryIds: [number, number];
  frontIndex: number; // 1-based, like the service's depth numbering
  position: number; // 0-based position along the selected front
}

export interface FrontsCache {
  key: string; // model + query tuple the cached fronts belong to
  fronts: FrontItem[][];
  totalFronts: number;
}

export const cacheKey = (modelId: string, queryIds: [number, number]): string =>
  `${modelId}:${queryIds[0]},${queryIds[1]}`;

export const emptyCache = (): FrontsCache => ({ key: "", fronts: [], totalFronts: 0 });

export function storeResponse(cache: FrontsCache, state: ExplorerState, resp: FrontsResponse): FrontsCache {
  const key = cacheKey(state.modelId, state.queryIds);
  // responses for a different selection are stale, keep the cache untouched
  if (resp.model_id !== state.modelId) return cache;
  if (resp.query_ids[0] !== state.queryIds[0] || resp.query_ids[1] !== state.queryIds[1]) return cache;
  if (cache.key === key && cache.fronts.length >= resp.fronts.length) return cache;
  return { key, fronts: resp.fronts, totalFronts: resp.n_fronts_total };
}

/** Depth to request so frontIndex is covered, or null when cached. */
export function neededDepth(cache: FrontsCache, state: ExplorerState): number | null {
  const key = cacheKey(state.modelId, state.queryIds);
  if (cache.key === key) {
    if (cache.fronts.length >= state.frontIndex) return null;
    if (cache.totalFronts > 0 && cache.fronts.length >= cache.totalFronts) return null;
  }
  // fetch a window past the requested front so small slider moves stay local
  return Math.max(state.frontIndex + 2, 5);
}

export function selectedFront(cache: FrontsCache, state: ExplorerState): FrontItem[] | null {
  if (cache.key !== cacheKey(state.modelId, state.queryIds)) return null;
  return cache.fronts[state.frontIndex - 1] ?? null;
}

/** Clamp the sliders into the ranges the cached fronts allow. */
export function clampState(cache: FrontsCache, state: ExplorerState): ExplorerState {
  const total = cache.key === cacheKey(state.modelId, state.queryIds) && cache.totalFronts > 0
    ? cache.totalFronts
    : Number.POSITIVE_INFINITY;
  const frontIndex = Math.max(1, Math.min(state.frontIndex, total));
  const front = selectedFront(cache, { ...state, frontIndex });
  const maxPos = front && front.length > 0 ? front.length - 1 : 0;
  const position = Math.max(0, Math.min(state.position, maxPos));
  return { ...state, frontIndex, position };
}

// Deep links: every view is fully recoverable from the URL hash.
// #model=<id>&qa=<idx>&qb=<idx>&front=<n>&pos=<n>

export function encodeState(state: ExplorerState): string {
  const params = new URLSearchParams({
    model: state.modelId,
    qa: String(state.queryIds[0]),
    qb: String(state.queryIds[1]),
    front: String(state.frontIndex),
    pos: String(state.position),
  });
  return `#${params.toString()}`;
}

export function decodeState(hash: string): ExplorerState | null {
  const raw = hash.startsWith("#") ? hash.slice(1) : hash;
  if (!raw) return null;
  const params = new URLSearchParams(raw);
  const model = params.get("model");
  const qa = Number(params.get("qa"));
  const qb = Number(params.get("qb"));
  if (!model || !Number.isInteger(qa) || !Number.isInteger(qb) || qa === qb) return null;
  const front = Number(params.get("front") ?? "1");
  const pos = Number(params.get("pos") ?? "0");
  return {
    modelId: model,
    queryIds: [qa, qb],
    frontIndex: Number.isInteger(front) && front >= 1 ? front : 1,
    position: Number.isInteger(pos) && pos >= 0 ? pos : 0,
  };
}
