import { readFileSync } from "node:fs";
import { fileURLToPath } from "node:url";
import { dirname, join } from "node:path";

import { ApiClient, FrontsResponse, ItemResponse } from "../src/types.js";

const here = dirname(fileURLToPath(import.meta.url));

// compiled tests run from dist/test/, sources keep the fixtures in test/
export const fixturePath = (name: string): string => join(here, "..", "..", "test", name);

export const loadFronts = (): FrontsResponse =>
  JSON.parse(readFileSync(fixturePath("fronts_fixture.json"), "utf8"));

export const loadItem = (): ItemResponse =>
  JSON.parse(readFileSync(fixturePath("item_fixture.json"), "utf8"));

/** Serves the frozen capture the way the real service would, counting calls. */
export class FixtureClient implements ApiClient {
  calls = 0;
  private readonly data = loadFronts();

  async fetchFronts(
    modelId: string,
    queryIds: [number, number],
    depth: number,
  ): Promise<FrontsResponse> {
    this.calls += 1;
    if (modelId !== this.data.model_id) throw new Error("unknown model");
    return {
      ...this.data,
      query_ids: [...queryIds],
      depth,
      fronts: this.data.fronts.slice(0, depth),
    };
  }

  async fetchItem(_modelId: string, itemId: string): Promise<ItemResponse> {
    const item = loadItem();
    if (item.item_id !== itemId) throw new Error("unknown item");
    return item;
  }
}
