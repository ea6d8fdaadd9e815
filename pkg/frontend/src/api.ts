import type { UiState } from "./types.js";

/**
 * Serialize with recursively sorted object keys so the same state always
 * produces the same bytes (request bodies are golden-tested).
 */
export function canonicalJson(value: unknown): string {
  return JSON.stringify(sortKeys(value));
}

function sortKeys(value: unknown): unknown {
  if (Array.isArray(value)) {
    return value.map(sortKeys);
  }
  if (value !== null && typeof value === "object") {
    const out: Record<string, unknown> = {};
    for (const key of Object.keys(value as Record<string, unknown>).sort()) {
      out[key] = sortKeys((value as Record<string, unknown>)[key]);
    }
    return out;
  }
  return value;
}

export interface RetrieveBody {
  image_base64: string;
  k: number;
  prompt?: string;
  attributes?: Record<string, string>;
  extended?: { name: string; labels: string[]; selected_index: number };
}

/** Body for POST /v1/retrieve. Blank prompt and unset chips are omitted. */
export function buildRetrieveBody(state: UiState): RetrieveBody {
  if (!state.imageBase64) {
    throw new Error("retrieve needs a query image");
  }
  const body: RetrieveBody = { image_base64: state.imageBase64, k: state.k };
  const prompt = state.prompt.trim();
  if (prompt.length > 0) {
    body.prompt = prompt;
  }
  const attributes: Record<string, string> = {};
  if (state.typeChip) attributes.type = state.typeChip;
  if (state.colorChip) attributes.color = state.colorChip;
  if (state.trendChip) attributes.trend = state.trendChip;
  if (state.layoutChip) attributes.layout = state.layoutChip;
  if (Object.keys(attributes).length > 0) {
    body.attributes = attributes;
  }
  if (state.classifier) {
    body.extended = {
      name: state.classifier.name,
      labels: state.classifier.labels,
      selected_index: state.classifier.selectedIndex,
    };
  }
  return body;
}

/** Body for POST /v1/annotate. */
export function buildAnnotateBody(
  imageBase64: string,
  classifierNames: string[] = [],
): { image_base64: string; classifiers?: string[] } {
  const body: { image_base64: string; classifiers?: string[] } = {
    image_base64: imageBase64,
  };
  if (classifierNames.length > 0) {
    body.classifiers = classifierNames;
  }
  return body;
}

/** Body for POST /v1/classifiers. */
export function buildClassifierBody(
  name: string,
  labels: string[],
  selectedIndex = 0,
): { name: string; labels: string[]; selected_index: number } {
  return { name, labels, selected_index: selectedIndex };
}

/** Canonical request bytes for a retrieve call; what golden tests pin. */
export function retrieveRequestBytes(state: UiState): string {
  return canonicalJson(buildRetrieveBody(state));
}
