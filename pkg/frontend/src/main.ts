// Bootstrap: wire the sliders and query form to the service and the URL.

import { HttpClient, SequencedFetcher } from "./api.js";
import {
  ExplorerState,
  FrontsCache,
  clampState,
  decodeState,
  emptyCache,
  encodeState,
  neededDepth,
  storeResponse,
} from "./state.js";
import { renderFrontView } from "./view.js";
import { Controls, applyView, showRetryBanner } from "./dom.js";

const $ = (id: string) => document.getElementById(id) as HTMLElement;

function controls(): Controls {
  return {
    frontSlider: $("front-slider") as HTMLInputElement,
    positionSlider: $("position-slider") as HTMLInputElement,
    frontLabel: $("front-label"),
    positionLabel: $("position-label"),
    regionLabel: $("region-label"),
    panel: $("item-panel"),
    banner: $("banner"),
    scatter: document.getElementById("scatter") as unknown as SVGSVGElement,
  };
}

function main(): void {
  const base = (document.body.dataset.api ?? "http://127.0.0.1:8321").replace(/\/$/, "");
  const client = new HttpClient(base);
  const fetcher = new SequencedFetcher();
  const c = controls();
  let cache: FrontsCache = emptyCache();
  let state: ExplorerState | null = decodeState(window.location.hash);

  const modelInput = $("model-input") as HTMLInputElement;
  const qaInput = $("qa-input") as HTMLInputElement;
  const qbInput = $("qb-input") as HTMLInputElement;

  async function sync(pushUrl: boolean): Promise<void> {
    if (!state) return;
    const depth = neededDepth(cache, state);
    if (depth !== null) {
      try {
        const resp = await fetcher.run(() =>
          client.fetchFronts(state!.modelId, state!.queryIds, depth),
        );
        if (resp === null) return; // a newer slider move superseded this fetch
        cache = storeResponse(cache, state, resp);
      } catch {
        showRetryBanner(c, () => void sync(pushUrl));
        return;
      }
    }
    state = clampState(cache, state);
    if (pushUrl) window.history.replaceState(null, "", encodeState(state));
    applyView(c, renderFrontView(cache, state), state);
    modelInput.value = state.modelId;
    qaInput.value = String(state.queryIds[0]);
    qbInput.value = String(state.queryIds[1]);
  }

  c.frontSlider.addEventListener("input", () => {
    if (!state) return;
    state = { ...state, frontIndex: Number(c.frontSlider.value), position: 0 };
    void sync(true);
  });
  c.positionSlider.addEventListener("input", () => {
    if (!state) return;
    state = { ...state, position: Number(c.positionSlider.value) };
    void sync(true);
  });
  ($("go") as HTMLButtonElement).addEventListener("click", () => {
    const qa = Number(qaInput.value);
    const qb = Number(qbInput.value);
    if (!modelInput.value || !Number.isInteger(qa) || !Number.isInteger(qb) || qa === qb) return;
    state = { modelId: modelInput.value, queryIds: [qa, qb], frontIndex: 1, position: 0 };
    cache = emptyCache();
    void sync(true);
  });
  window.addEventListener("hashchange", () => {
    const restored = decodeState(window.location.hash);
    if (restored) {
      state = restored;
      void sync(false);
    }
  });

  if (state) void sync(false);
}

main();
