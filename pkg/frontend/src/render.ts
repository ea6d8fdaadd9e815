import type { RetrieveResult, UiState } from "./types.js";

function esc(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

/**
 * Result grid as an HTML string. Cells appear in exactly the order the
 * API returned them — the server owns the ranking.
 */
export function renderResultsGrid(results: RetrieveResult[]): string {
  if (results.length === 0) {
    return '<div class="results empty">No charts matched.</div>';
  }
  const cells = results.map((r, i) => {
    const attrs = Object.entries(r.attributes)
      .map(([k, v]) => `<span class="attr attr-${esc(k)}">${esc(v)}</span>`)
      .join("");
    return [
      `<figure class="result" data-rank="${i + 1}" data-id="${esc(r.id)}">`,
      `<img src="${esc(r.image_url)}" alt="${esc(r.id)}">`,
      `<figcaption>`,
      `<span class="rank">#${i + 1}</span>`,
      `<span class="score">${r.scores.total.toFixed(4)}</span>`,
      attrs,
      `</figcaption>`,
      `</figure>`,
    ].join("");
  });
  return `<div class="results">${cells.join("")}</div>`;
}

/** Active intent chips, in a fixed kind order. */
export function renderChips(state: UiState): string {
  const chips: string[] = [];
  if (state.typeChip) chips.push(`<button class="chip chip-type active">${esc(state.typeChip)}</button>`);
  if (state.colorChip) chips.push(`<button class="chip chip-color active">${esc(state.colorChip)}</button>`);
  if (state.trendChip) chips.push(`<button class="chip chip-trend active">${esc(state.trendChip)}</button>`);
  if (state.layoutChip) chips.push(`<button class="chip chip-layout active">${esc(state.layoutChip)}</button>`);
  if (state.classifier) {
    const label = state.classifier.labels[state.classifier.selectedIndex];
    chips.push(`<button class="chip chip-custom active">${esc(state.classifier.name)}: ${esc(label)}</button>`);
  }
  return `<div class="chips">${chips.join("")}</div>`;
}
