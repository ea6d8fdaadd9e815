import type {
  ChartTypeId,
  ClassifierForm,
  ColormapId,
  LayoutId,
  TrendId,
  UiState,
} from "./types.js";

export function initialState(): UiState {
  return {
    imageBase64: null,
    typeChip: null,
    colorChip: null,
    trendChip: null,
    layoutChip: null,
    prompt: "",
    classifier: null,
    k: 5,
  };
}

/** Clicking a chip toggles it; clicking a different value replaces it. */
function toggle<T>(current: T | null, next: T): T | null {
  return current === next ? null : next;
}

export function setImage(state: UiState, imageBase64: string): UiState {
  return { ...state, imageBase64 };
}

export function toggleTypeChip(state: UiState, value: ChartTypeId): UiState {
  return { ...state, typeChip: toggle(state.typeChip, value) };
}

export function toggleColorChip(state: UiState, value: ColormapId): UiState {
  return { ...state, colorChip: toggle(state.colorChip, value) };
}

export function toggleTrendChip(state: UiState, value: TrendId): UiState {
  return { ...state, trendChip: toggle(state.trendChip, value) };
}

export function toggleLayoutChip(state: UiState, value: LayoutId): UiState {
  return { ...state, layoutChip: toggle(state.layoutChip, value) };
}

export function setPrompt(state: UiState, prompt: string): UiState {
  return { ...state, prompt };
}

export function setK(state: UiState, k: number): UiState {
  if (!Number.isInteger(k) || k < 1) {
    throw new Error(`k must be a positive integer, got ${k}`);
  }
  return { ...state, k };
}

export function setClassifier(state: UiState, form: ClassifierForm | null): UiState {
  if (form !== null) {
    const labels = form.labels.map((l) => l.trim()).filter((l) => l.length > 0);
    if (labels.length < 2) {
      throw new Error("classifier needs at least two labels");
    }
    if (new Set(labels).size !== labels.length) {
      throw new Error("classifier labels must be distinct");
    }
    if (form.selectedIndex < 0 || form.selectedIndex >= labels.length) {
      throw new Error("selected label out of range");
    }
    form = { ...form, labels };
  }
  return { ...state, classifier: form };
}

export function clearIntent(state: UiState): UiState {
  return {
    ...state,
    typeChip: null,
    colorChip: null,
    trendChip: null,
    layoutChip: null,
    prompt: "",
    classifier: null,
  };
}
