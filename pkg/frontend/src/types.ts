/** Attribute vocabularies mirrored from the service taxonomy. */

export const CHART_TYPES = [
  "bar",
  "stacked_bar",
  "circular_bar",
  "histogram",
  "timeline",
  "line",
  "scatter",
  "box_plot",
  "pie",
  "donut",
  "heatmap",
  "treemap",
  "sunburst",
  "area",
  "radar",
  "sankey",
  "choropleth",
  "node_link",
] as const;

export const COLORMAPS = ["categorical", "sequential", "diverging"] as const;
export const TRENDS = ["increasing", "decreasing", "mixed"] as const;
export const LAYOUTS = ["horizontal", "vertical", "other"] as const;

export type ChartTypeId = (typeof CHART_TYPES)[number];
export type ColormapId = (typeof COLORMAPS)[number];
export type TrendId = (typeof TRENDS)[number];
export type LayoutId = (typeof LAYOUTS)[number];

/** Custom zero-shot attribute entered in the classifier form. */
export interface ClassifierForm {
  name: string;
  labels: string[];
  selectedIndex: number;
}

/** Everything the user has picked in the query panel. */
export interface UiState {
  imageBase64: string | null;
  typeChip: ChartTypeId | null;
  colorChip: ColormapId | null;
  trendChip: TrendId | null;
  layoutChip: LayoutId | null;
  prompt: string;
  classifier: ClassifierForm | null;
  k: number;
}

/** One ranked result as returned by POST /v1/retrieve. */
export interface RetrieveResult {
  id: string;
  image_url: string;
  attributes: Record<string, string>;
  scores: {
    total: number;
    s_global: number;
    s_intent: number;
    s_match: number;
    [extra: string]: number | null | undefined;
  };
}
