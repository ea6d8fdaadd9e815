"""Attribute vocabulary: chart types, colormap/trend/layout classes,
user-defined classifier specs, applicability rules, and the filter predicate.

All data here is immutable after load and safe for concurrent reads.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Mapping, Optional, Sequence


class ChartType(str, Enum):
    BAR = "bar"
    STACKED_BAR = "stacked_bar"
    CIRCULAR_BAR = "circular_bar"
    DONUT = "donut"
    PIE = "pie"
    SANKEY = "sankey"
    TIMELINE = "timeline"
    BOX_PLOT = "box_plot"
    HISTOGRAM = "histogram"
    HEATMAP = "heatmap"
    LINE = "line"
    STAR_PLOT = "star_plot"
    CHOROPLETH_MAP = "choropleth_map"
    SCATTER = "scatter"
    WORD_CLOUD = "word_cloud"
    DENDROGRAM = "dendrogram"
    NETWORK = "network"
    CIRCULAR_PACKING = "circular_packing"


class ColormapClass(str, Enum):
    CATEGORICAL = "categorical"
    SEQUENTIAL = "sequential"
    DIVERGING = "diverging"


class TrendClass(str, Enum):
    INCREASING = "increasing"
    DECREASING = "decreasing"
    MIXED = "mixed"


class LayoutClass(str, Enum):
    HORIZONTAL = "horizontal"
    VERTICAL = "vertical"
    OTHER = "other"


# Attribute kinds beyond the always-present chart type.
KIND_COLOR = "color"
KIND_TREND = "trend"
KIND_LAYOUT = "layout"
ATTRIBUTE_KINDS = (KIND_COLOR, KIND_TREND, KIND_LAYOUT)

KIND_CLASSES: dict[str, type[Enum]] = {
    KIND_COLOR: ColormapClass,
    KIND_TREND: TrendClass,
    KIND_LAYOUT: LayoutClass,
}

_ALL = frozenset((KIND_COLOR, KIND_TREND, KIND_LAYOUT))
_COLOR_TREND = frozenset((KIND_COLOR, KIND_TREND))
_COLOR_ONLY = frozenset((KIND_COLOR,))

# Which attribute kinds are defined for each chart type. Bars and other
# axis-aligned series carry all three; continuous single-series charts drop
# layout; the rest (maps, part-to-whole, relational) keep only color.
DEFAULT_APPLICABILITY: dict[ChartType, frozenset[str]] = {
    ChartType.BAR: _ALL,
    ChartType.STACKED_BAR: _ALL,
    ChartType.CIRCULAR_BAR: _ALL,
    ChartType.HISTOGRAM: _ALL,
    ChartType.TIMELINE: _ALL,
    ChartType.LINE: _COLOR_TREND,
    ChartType.SCATTER: _COLOR_TREND,
    ChartType.BOX_PLOT: _COLOR_TREND,
    ChartType.HEATMAP: _COLOR_ONLY,
    ChartType.CHOROPLETH_MAP: _COLOR_ONLY,
    ChartType.PIE: _COLOR_ONLY,
    ChartType.DONUT: _COLOR_ONLY,
    ChartType.WORD_CLOUD: _COLOR_ONLY,
    ChartType.SANKEY: _COLOR_ONLY,
    ChartType.STAR_PLOT: _COLOR_ONLY,
    ChartType.DENDROGRAM: _COLOR_ONLY,
    ChartType.NETWORK: _COLOR_ONLY,
    ChartType.CIRCULAR_PACKING: _COLOR_ONLY,
}


class TaxonomyError(ValueError):
    pass


def load_applicability(path: str | Path) -> dict[ChartType, frozenset[str]]:
    """Load an applicability table from a JSON config file.

    Format: {"bar": ["color", "trend", "layout"], ...}. Types not listed
    fall back to the compiled-in defaults.
    """
    with open(path, "r", encoding="utf-8") as fh:
        raw = json.load(fh)
    table = dict(DEFAULT_APPLICABILITY)
    for type_name, kinds in raw.items():
        ctype = ChartType(type_name)
        for kind in kinds:
            if kind not in ATTRIBUTE_KINDS:
                raise TaxonomyError(f"unknown attribute kind {kind!r} for {type_name!r}")
        table[ctype] = frozenset(kinds)
    return table


def applicable_attributes(
    t: ChartType, table: Mapping[ChartType, frozenset[str]] | None = None
) -> frozenset[str]:
    """Subset of {color, trend, layout} defined for chart type ``t``."""
    table = DEFAULT_APPLICABILITY if table is None else table
    return table[ChartType(t)]


@dataclass(frozen=True)
class AttributeSet:
    """Disentangled attribute labels of one chart.

    ``extended`` maps a user classifier name to the chosen label string.
    Optional fields should be present exactly when applicable to the type;
    use :func:`validate_attribute_set` to enforce that.
    """

    type: ChartType
    color: Optional[ColormapClass] = None
    trend: Optional[TrendClass] = None
    layout: Optional[LayoutClass] = None
    extended: Mapping[str, str] = field(default_factory=dict)

    def get(self, kind: str):
        if kind == KIND_COLOR:
            return self.color
        if kind == KIND_TREND:
            return self.trend
        if kind == KIND_LAYOUT:
            return self.layout
        raise TaxonomyError(f"unknown attribute kind {kind!r}")

    def to_dict(self) -> dict:
        out: dict = {"type": self.type.value}
        for kind in ATTRIBUTE_KINDS:
            value = self.get(kind)
            if value is not None:
                out[kind] = value.value
        if self.extended:
            out["extended"] = dict(self.extended)
        return out

    @classmethod
    def from_dict(cls, data: Mapping) -> "AttributeSet":
        return cls(
            type=ChartType(data["type"]),
            color=ColormapClass(data["color"]) if data.get("color") else None,
            trend=TrendClass(data["trend"]) if data.get("trend") else None,
            layout=LayoutClass(data["layout"]) if data.get("layout") else None,
            extended=dict(data.get("extended", {})),
        )


def validate_attribute_set(
    a: AttributeSet, table: Mapping[ChartType, frozenset[str]] | None = None
) -> None:
    """Check that each optional field is present iff applicable to a.type."""
    applicable = applicable_attributes(a.type, table)
    for kind in ATTRIBUTE_KINDS:
        value = a.get(kind)
        if value is None and kind in applicable:
            raise TaxonomyError(f"{kind} is applicable to {a.type.value} but absent")
        if value is not None and kind not in applicable:
            raise TaxonomyError(f"{kind} is not applicable to {a.type.value}")


@dataclass(frozen=True)
class ExtendedClassifierSpec:
    """User-defined zero-shot classifier: a named list of candidate labels
    plus the index of the label representing the user's intent."""

    name: str
    labels: tuple[str, ...]
    selected_index: int = 0

    def __init__(self, name: str, labels: Sequence[str], selected_index: int = 0):
        if not name:
            raise TaxonomyError("classifier name must be nonempty")
        labels = tuple(labels)
        if len(labels) < 2:
            raise TaxonomyError("classifier needs at least 2 labels")
        if any(not lab for lab in labels):
            raise TaxonomyError("labels must be nonempty strings")
        if len(set(labels)) != len(labels):
            raise TaxonomyError("labels must be distinct")
        if not 0 <= selected_index < len(labels):
            raise TaxonomyError(f"selected_index {selected_index} out of range for {len(labels)} labels")
        object.__setattr__(self, "name", name)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "selected_index", selected_index)

    @property
    def selected_label(self) -> str:
        return self.labels[self.selected_index]


@dataclass(frozen=True)
class AttributeSelection:
    """The attribute values a user requires of retrieved charts.

    Every field optional; an all-empty selection matches everything.
    """

    type: Optional[ChartType] = None
    color: Optional[ColormapClass] = None
    trend: Optional[TrendClass] = None
    layout: Optional[LayoutClass] = None
    extended_name: Optional[str] = None
    extended_label: Optional[str] = None

    def is_empty(self) -> bool:
        return (
            self.type is None
            and self.color is None
            and self.trend is None
            and self.layout is None
            and self.extended_label is None
        )

    def to_dict(self) -> dict:
        out: dict = {}
        for kind in ("type", "color", "trend", "layout"):
            value = getattr(self, kind)
            if value is not None:
                out[kind] = value.value
        if self.extended_label is not None:
            out["extended"] = {"name": self.extended_name, "label": self.extended_label}
        return out

    @classmethod
    def from_dict(cls, data: Mapping) -> "AttributeSelection":
        ext = data.get("extended") or {}
        return cls(
            type=ChartType(data["type"]) if data.get("type") else None,
            color=ColormapClass(data["color"]) if data.get("color") else None,
            trend=TrendClass(data["trend"]) if data.get("trend") else None,
            layout=LayoutClass(data["layout"]) if data.get("layout") else None,
            extended_name=ext.get("name"),
            extended_label=ext.get("label"),
        )


def attribute_match(a: AttributeSet, sel: AttributeSelection) -> bool:
    """True iff every non-empty field of the selection equals the
    corresponding field of the attribute set. Empty selection matches all."""
    if sel.type is not None and a.type != sel.type:
        return False
    if sel.color is not None and a.color != sel.color:
        return False
    if sel.trend is not None and a.trend != sel.trend:
        return False
    if sel.layout is not None and a.layout != sel.layout:
        return False
    if sel.extended_label is not None:
        if sel.extended_name is None:
            return sel.extended_label in a.extended.values()
        if a.extended.get(sel.extended_name) != sel.extended_label:
            return False
    return True
