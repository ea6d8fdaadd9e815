export {
  buildAnnotateBody,
  buildClassifierBody,
  buildRetrieveBody,
  canonicalJson,
  retrieveRequestBytes,
} from "./api.js";
export {
  clearIntent,
  initialState,
  setClassifier,
  setImage,
  setK,
  setPrompt,
  toggleColorChip,
  toggleLayoutChip,
  toggleTrendChip,
  toggleTypeChip,
} from "./state.js";
export { renderChips, renderResultsGrid } from "./render.js";
export type {
  ChartTypeId,
  ClassifierForm,
  ColormapId,
  LayoutId,
  RetrieveResult,
  TrendId,
  UiState,
} from "./types.js";
