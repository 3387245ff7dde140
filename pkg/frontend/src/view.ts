// Pure computation of what the screen shows for a state + cached fronts.
// All item identity, coordinates, and ordering come from the service
// verbatim; this module only selects and annotates.

import { FrontsCache, ExplorerState, selectedFront, cacheKey } from "./state.js";
import { FrontItem } from "./types.js";

export const DEFAULT_NEIGHBOR_COUNT = 4;

export interface ScatterPoint {
  x: number;
  y: number;
  front: number; // 1-based depth, drives the color scale
  itemId: string;
  selected: boolean;
}

export interface FrontView {
  ready: boolean;
  scatter: ScatterPoint[];
  front: FrontItem[]; // the selected front, service order (tail to tail)
  selected: FrontItem | null;
  neighbors: FrontItem[]; // up to neighborCount adjacent points on the front
  regionLabel: string; // tails-vs-middle indicator
  frontCount: number; // total fronts available server-side
  positionCount: number; // length of the selected front
  positionDisabled: boolean;
}

export function regionOfPosition(position: number, length: number): string {
  if (length <= 1) return "single point";
  const fraction = position / (length - 1);
  if (fraction <= 0.25) return "near left tail (close to query 1)";
  if (fraction >= 0.75) return "near right tail (close to query 2)";
  return "middle of the front";
}

/** Adjacent positions on the front, balanced around the selection. */
export function neighborPositions(position: number, length: number, count: number): number[] {
  const out: number[] = [];
  let step = 1;
  while (out.length < count && out.length < length - 1) {
    if (position + step < length) out.push(position + step);
    if (out.length < count && position - step >= 0) out.push(position - step);
    step += 1;
  }
  return out.sort((a, b) => a - b);
}

export function renderFrontView(
  cache: FrontsCache,
  state: ExplorerState,
  neighborCount: number = DEFAULT_NEIGHBOR_COUNT,
): FrontView {
  if (cache.key !== cacheKey(state.modelId, state.queryIds) || cache.fronts.length === 0) {
    return {
      ready: false,
      scatter: [],
      front: [],
      selected: null,
      neighbors: [],
      regionLabel: "",
      frontCount: 0,
      positionCount: 0,
      positionDisabled: true,
    };
  }
  const front = selectedFront(cache, state) ?? [];
  const selected = front.length > 0 ? front[Math.min(state.position, front.length - 1)] : null;
  const scatter: ScatterPoint[] = [];
  cache.fronts.forEach((members, i) => {
    for (const item of members) {
      scatter.push({
        x: item.coords[0],
        y: item.coords[1],
        front: i + 1,
        itemId: item.item_id,
        selected: selected !== null && item.item_id === selected.item_id,
      });
    }
  });
  const neighbors = selected
    ? neighborPositions(selected.position, front.length, neighborCount).map((p) => front[p])
    : [];
  return {
    ready: true,
    scatter,
    front,
    selected,
    neighbors,
    regionLabel: selected ? regionOfPosition(selected.position, front.length) : "",
    frontCount: cache.totalFronts,
    positionCount: front.length,
    positionDisabled: front.length <= 1,
  };
}
