// DOM rendering: scatter SVG, sliders, item panel, retry banner.

import { FrontView, ScatterPoint } from "./view.js";
import { ExplorerState } from "./state.js";

const FRONT_COLORS = [
  "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
  "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf",
];

export const frontColor = (front: number): string =>
  FRONT_COLORS[(front - 1) % FRONT_COLORS.length];

function scatterBounds(points: ScatterPoint[]): { x0: number; x1: number; y0: number; y1: number } {
  let x0 = Infinity, x1 = -Infinity, y0 = Infinity, y1 = -Infinity;
  for (const p of points) {
    x0 = Math.min(x0, p.x); x1 = Math.max(x1, p.x);
    y0 = Math.min(y0, p.y); y1 = Math.max(y1, p.y);
  }
  if (!points.length) return { x0: 0, x1: 1, y0: 0, y1: 1 };
  const padX = (x1 - x0 || 1) * 0.06;
  const padY = (y1 - y0 || 1) * 0.06;
  return { x0: x0 - padX, x1: x1 + padX, y0: y0 - padY, y1: y1 + padY };
}

export function drawScatter(svg: SVGSVGElement, view: FrontView): void {
  const w = svg.clientWidth || 520;
  const h = svg.clientHeight || 520;
  svg.setAttribute("viewBox", `0 0 ${w} ${h}`);
  svg.innerHTML = "";
  const b = scatterBounds(view.scatter);
  const sx = (x: number) => ((x - b.x0) / (b.x1 - b.x0)) * (w - 40) + 30;
  const sy = (y: number) => h - 25 - ((y - b.y0) / (b.y1 - b.y0)) * (h - 40);
  // draw deeper fronts first so the selected front stays on top
  const ordered = [...view.scatter].sort((a, c) => c.front - a.front);
  for (const p of ordered) {
    const dot = document.createElementNS("http://www.w3.org/2000/svg", "circle");
    dot.setAttribute("cx", sx(p.x).toFixed(1));
    dot.setAttribute("cy", sy(p.y).toFixed(1));
    dot.setAttribute("r", p.selected ? "7" : "3.5");
    dot.setAttribute("fill", p.selected ? "#000" : frontColor(p.front));
    dot.setAttribute("fill-opacity", p.selected ? "1" : "0.75");
    if (p.selected) {
      dot.setAttribute("stroke", "#ffd400");
      dot.setAttribute("stroke-width", "3");
    }
    const title = document.createElementNS("http://www.w3.org/2000/svg", "title");
    title.textContent = `${p.itemId} (front ${p.front})`;
    dot.appendChild(title);
    svg.appendChild(dot);
  }
  const axis = document.createElementNS("http://www.w3.org/2000/svg", "text");
  axis.setAttribute("x", String(w / 2 - 60));
  axis.setAttribute("y", String(h - 6));
  axis.setAttribute("font-size", "11");
  axis.textContent = "dissimilarity to query 1 →";
  svg.appendChild(axis);
}

function itemCard(itemId: string, coords: number[], position: number, big: boolean): HTMLElement {
  const card = document.createElement("div");
  card.className = big ? "card card-big" : "card";
  const tile = document.createElement("div");
  tile.className = "tile";
  tile.textContent = itemId;
  const meta = document.createElement("div");
  meta.className = "meta";
  meta.textContent = `pos ${position} · (${coords.map((c) => c.toFixed(3)).join(", ")})`;
  card.append(tile, meta);
  return card;
}

export interface Controls {
  frontSlider: HTMLInputElement;
  positionSlider: HTMLInputElement;
  frontLabel: HTMLElement;
  positionLabel: HTMLElement;
  regionLabel: HTMLElement;
  panel: HTMLElement;
  banner: HTMLElement;
  scatter: SVGSVGElement;
}

export function applyView(c: Controls, view: FrontView, state: ExplorerState): void {
  c.banner.style.display = "none";
  if (!view.ready) return;
  c.frontSlider.max = String(Math.max(1, view.frontCount));
  c.frontSlider.value = String(state.frontIndex);
  c.frontLabel.textContent = `front ${state.frontIndex} / ${view.frontCount}`;
  c.positionSlider.max = String(Math.max(0, view.positionCount - 1));
  c.positionSlider.value = String(view.selected ? view.selected.position : 0);
  c.positionSlider.disabled = view.positionDisabled;
  c.positionLabel.textContent = view.positionCount
    ? `position ${view.selected?.position ?? 0} / ${view.positionCount - 1}`
    : "empty front";
  c.regionLabel.textContent = view.regionLabel;
  c.panel.innerHTML = "";
  if (view.selected) {
    c.panel.appendChild(
      itemCard(view.selected.item_id, view.selected.coords, view.selected.position, true),
    );
    for (const n of view.neighbors) {
      c.panel.appendChild(itemCard(n.item_id, n.coords, n.position, false));
    }
  }
  drawScatter(c.scatter, view);
}

export function showRetryBanner(c: Controls, onRetry: () => void): void {
  c.banner.innerHTML = "";
  c.banner.style.display = "block";
  const msg = document.createElement("span");
  msg.textContent = "service unreachable — ";
  const button = document.createElement("button");
  button.textContent = "retry";
  button.addEventListener("click", onRetry);
  c.banner.append(msg, button);
}
