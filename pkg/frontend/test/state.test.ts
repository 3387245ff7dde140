import test from "node:test";
import assert from "node:assert/strict";

import {
  ExplorerState,
  cacheKey,
  clampState,
  decodeState,
  emptyCache,
  encodeState,
  neededDepth,
  storeResponse,
} from "../src/state.js";
import { FixtureClient, loadFronts } from "./helpers.js";

const fixture = loadFronts();

const baseState = (): ExplorerState => ({
  modelId: fixture.model_id,
  queryIds: [fixture.query_ids[0], fixture.query_ids[1]] as [number, number],
  frontIndex: 1,
  position: 0,
});

test("url hash round-trips the full state", () => {
  const state: ExplorerState = { ...baseState(), frontIndex: 3, position: 7 };
  const decoded = decodeState(encodeState(state));
  assert.deepEqual(decoded, state);
});

test("decode rejects malformed or degenerate hashes", () => {
  assert.equal(decodeState(""), null);
  assert.equal(decodeState("#model=&qa=1&qb=2"), null);
  assert.equal(decodeState("#model=m&qa=3&qb=3"), null);
  assert.equal(decodeState("#model=m&qa=x&qb=2"), null);
});

test("decode fills defaults for missing sliders", () => {
  const decoded = decodeState("#model=m&qa=1&qb=2");
  assert.deepEqual(decoded, {
    modelId: "m",
    queryIds: [1, 2],
    frontIndex: 1,
    position: 0,
  });
});

test("moving the front slider refetches only when the front is not cached", async () => {
  const client = new FixtureClient();
  let state = baseState();
  let cache = emptyCache();

  let depth = neededDepth(cache, state);
  assert.notEqual(depth, null);
  cache = storeResponse(cache, state, await client.fetchFronts(state.modelId, state.queryIds, depth!));
  assert.equal(client.calls, 1);

  // front 2 is already inside the fetched window: no new call
  state = { ...state, frontIndex: 2 };
  assert.equal(neededDepth(cache, state), null);

  // a front past the window needs one more call
  state = { ...state, frontIndex: cache.fronts.length + 1 };
  depth = neededDepth(cache, state);
  assert.notEqual(depth, null);
  cache = storeResponse(cache, state, await client.fetchFronts(state.modelId, state.queryIds, depth!));
  assert.equal(client.calls, 2);
  assert.ok(cache.fronts.length >= state.frontIndex || cache.fronts.length === cache.totalFronts);
});

test("cache is keyed by model and query tuple", async () => {
  const client = new FixtureClient();
  const state = baseState();
  const resp = await client.fetchFronts(state.modelId, state.queryIds, 3);
  const cache = storeResponse(emptyCache(), state, resp);
  assert.equal(cache.key, cacheKey(state.modelId, state.queryIds));
  const other = { ...state, queryIds: [0, 5] as [number, number] };
  assert.notEqual(neededDepth(cache, other), null);
});

test("responses for a different selection never overwrite the cache", async () => {
  const client = new FixtureClient();
  const state = baseState();
  const resp = await client.fetchFronts(state.modelId, state.queryIds, 3);
  const cache = storeResponse(emptyCache(), state, resp);
  const stale = { ...resp, query_ids: [98, 99] };
  assert.equal(storeResponse(cache, state, stale), cache);
});

test("clamp keeps sliders inside the cached front", async () => {
  const client = new FixtureClient();
  const state = baseState();
  const resp = await client.fetchFronts(state.modelId, state.queryIds, 6);
  const cache = storeResponse(emptyCache(), state, resp);
  const wild = clampState(cache, { ...state, frontIndex: 999, position: 999 });
  assert.equal(wild.frontIndex, fixture.n_fronts_total);
  const inFront1 = clampState(cache, { ...state, frontIndex: 1, position: 999 });
  assert.equal(inFront1.position, fixture.fronts[0].length - 1);
});
