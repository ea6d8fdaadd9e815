"""Synthetic labeled corpus generator.

Renders simple parameterized charts (solid-color bars, lines, points, and
grids on plain backgrounds) with known attribute labels, and emits a mock
provider fixture whose embeddings cluster by chart type (and trend vectors
by trend class), so retrieval behaves like a trained encoder at desk scale.
"""

from __future__ import annotations

import csv
import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from chartseek.colorfeat import RasterImage
from chartseek.taxonomy import (
    ChartType,
    ColormapClass,
    LayoutClass,
    TrendClass,
    applicable_attributes,
)

# Distinct base hues for categorical palettes.
_CATEGORICAL = [
    (31, 119, 180),
    (255, 127, 14),
    (44, 160, 44),
    (214, 39, 40),
    (148, 103, 189),
    (140, 86, 75),
]


@dataclass(frozen=True)
class SynthSpec:
    seed: int = 0
    per_type: dict = field(default_factory=lambda: {t.value: 2 for t in ChartType})
    width: int = 64
    height: int = 48
    dim: int = 32
    embedding_noise: float = 0.3

    @classmethod
    def from_file(cls, path: str | Path) -> "SynthSpec":
        with open(path, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
        kwargs = {}
        for key in ("seed", "width", "height", "dim", "embedding_noise"):
            if key in raw:
                kwargs[key] = raw[key]
        if "per_type" in raw:
            kwargs["per_type"] = {ChartType(k).value: int(v) for k, v in raw["per_type"].items()}
        elif "count_per_type" in raw:
            kwargs["per_type"] = {t.value: int(raw["count_per_type"]) for t in ChartType}
        return cls(**kwargs)


@dataclass(frozen=True)
class SynthEntry:
    id: str
    image_path: str
    labels: dict


@dataclass(frozen=True)
class SynthResult:
    entries: tuple[SynthEntry, ...]
    images_dir: str
    labels_path: str
    fixture_path: str


def _palette_colors(rng: np.random.Generator, color_class: ColormapClass, n: int) -> list[tuple]:
    if color_class == ColormapClass.CATEGORICAL:
        start = int(rng.integers(len(_CATEGORICAL)))
        return [_CATEGORICAL[(start + i) % len(_CATEGORICAL)] for i in range(n)]
    if color_class == ColormapClass.SEQUENTIAL:
        base = _CATEGORICAL[int(rng.integers(len(_CATEGORICAL)))]
        return [
            tuple(int(c + (255 - c) * (0.7 * i / max(n - 1, 1))) for c in base) for i in range(n)
        ]
    # diverging: cold-to-warm ramp
    return [
        (int(50 + 205 * i / max(n - 1, 1)), 60, int(255 - 205 * i / max(n - 1, 1)))
        for i in range(n)
    ]


def _series_fractions(rng: np.random.Generator, trend: TrendClass | None, n: int) -> list[float]:
    levels = np.linspace(0.25, 0.95, n)
    if trend == TrendClass.DECREASING:
        levels = levels[::-1]
    elif trend == TrendClass.MIXED or trend is None:
        levels = rng.permutation(levels)
    return [float(v) for v in levels]


def render_chart(
    rng: np.random.Generator,
    ctype: ChartType,
    color_class: ColormapClass,
    trend: TrendClass | None,
    layout: LayoutClass | None,
    width: int,
    height: int,
) -> RasterImage:
    """Draw a minimal chart-like motif with the requested attributes."""
    arr = np.full((height, width, 4), 255, dtype=np.uint8)
    n = 4
    colors = _palette_colors(rng, color_class, n)
    fracs = _series_fractions(rng, trend, n)
    horizontal = layout == LayoutClass.HORIZONTAL

    if ctype in (ChartType.LINE, ChartType.TIMELINE, ChartType.SANKEY, ChartType.DENDROGRAM):
        # polyline-ish bands following the series levels
        xs = np.linspace(4, width - 5, n).astype(int)
        for i in range(n):
            y = int((1.0 - fracs[i]) * (height - 8)) + 4
            x0 = xs[i - 1] if i else xs[0]
            arr[max(y - 1, 0) : min(y + 2, height), min(x0, xs[i]) : max(x0, xs[i]) + 1, :3] = colors[
                i % len(colors)
            ]
    elif ctype in (ChartType.SCATTER, ChartType.NETWORK, ChartType.CIRCULAR_PACKING, ChartType.WORD_CLOUD):
        for i in range(3 * n):
            cx = int(rng.integers(3, width - 3))
            cy = int(rng.integers(3, height - 3))
            arr[cy - 2 : cy + 2, cx - 2 : cx + 2, :3] = colors[i % len(colors)]
    elif ctype in (ChartType.HEATMAP, ChartType.CHOROPLETH_MAP):
        rows, cols = 3, 4
        ch, cw = height // rows, width // cols
        for r in range(rows):
            for c in range(cols):
                arr[r * ch : (r + 1) * ch, c * cw : (c + 1) * cw, :3] = colors[
                    (r * cols + c) % len(colors)
                ]
    elif ctype in (ChartType.PIE, ChartType.DONUT, ChartType.STAR_PLOT):
        # quadrant blocks around the center
        cy, cx = height // 2, width // 2
        quads = [(0, cy, 0, cx), (0, cy, cx, width), (cy, height, 0, cx), (cy, height, cx, width)]
        for i, (y0, y1, x0, x1) in enumerate(quads):
            arr[y0 + 2 : y1 - 2, x0 + 2 : x1 - 2, :3] = colors[i % len(colors)]
    else:
        # bar-family: evenly spaced bars sized by the series levels
        slot = (width if not horizontal else height) // n
        for i in range(n):
            extent = fracs[i]
            if horizontal:
                y0 = i * slot + 2
                y1 = min((i + 1) * slot - 2, height)
                x1 = int(extent * (width - 4)) + 2
                arr[y0:y1, 2:x1, :3] = colors[i % len(colors)]
            else:
                x0 = i * slot + 2
                x1 = min((i + 1) * slot - 2, width)
                y0 = height - 2 - int(extent * (height - 4))
                arr[y0 : height - 2, x0:x1, :3] = colors[i % len(colors)]
    return RasterImage.from_array(arr)


def generate_synthetic_corpus(spec: SynthSpec, out_dir: str | Path) -> SynthResult:
    """Render the corpus into ``out_dir``: images/, labels.csv, fixture.json."""
    out_dir = Path(out_dir)
    images_dir = out_dir / "images"
    images_dir.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(spec.seed)

    base_rng = np.random.default_rng(spec.seed + 1)
    type_base = {
        t.value: _unit(base_rng.standard_normal(spec.dim)) for t in ChartType
    }
    trend_base = {
        t.value: _unit(base_rng.standard_normal(spec.dim)) for t in TrendClass
    }

    entries: list[SynthEntry] = []
    fixture: dict = {"dim": spec.dim, "images": {}, "texts": {}, "image_keys": {}}
    color_cycle = list(ColormapClass)
    trend_cycle = list(TrendClass)
    layout_cycle = list(LayoutClass)

    for ctype in ChartType:
        count = int(spec.per_type.get(ctype.value, 0))
        applicable = applicable_attributes(ctype)
        for i in range(count):
            cid = f"{ctype.value}_{i:03d}"
            color = color_cycle[int(rng.integers(len(color_cycle)))]
            trend = trend_cycle[i % len(trend_cycle)] if "trend" in applicable else None
            layout = layout_cycle[i % len(layout_cycle)] if "layout" in applicable else None
            img = render_chart(rng, ctype, color, trend, layout, spec.width, spec.height)
            path = images_dir / f"{cid}.png"
            path.write_bytes(img.to_png_bytes())

            labels = {
                "id": cid,
                "type": ctype.value,
                "color": color.value,
                "trend": trend.value if trend else "",
                "layout": layout.value if layout else "",
            }
            entries.append(SynthEntry(id=cid, image_path=str(path), labels=labels))

            emb = _unit(
                type_base[ctype.value]
                + spec.embedding_noise * _unit(rng.standard_normal(spec.dim))
            )
            tkey = (trend or TrendClass.MIXED).value
            tvec = _unit(
                trend_base[tkey] + spec.embedding_noise * _unit(rng.standard_normal(spec.dim))
            )
            fixture["images"][cid] = {
                "embedding": [float(x) for x in emb],
                "trend": [float(x) for x in tvec],
                "labels": {
                    "type": ctype.value,
                    "color": color.value,
                    **({"trend": trend.value} if trend else {}),
                    **({"layout": layout.value} if layout else {}),
                },
                "confidence": 0.95,
            }
            fixture["image_keys"][hashlib.sha256(img.data).hexdigest()] = cid

    labels_path = out_dir / "labels.csv"
    with open(labels_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=["id", "type", "color", "trend", "layout"])
        writer.writeheader()
        for e in entries:
            writer.writerow(e.labels)

    fixture_path = out_dir / "fixture.json"
    with open(fixture_path, "w", encoding="utf-8") as fh:
        json.dump(fixture, fh, sort_keys=True, separators=(",", ":"))

    return SynthResult(
        entries=tuple(entries),
        images_dir=str(images_dir),
        labels_path=str(labels_path),
        fixture_path=str(fixture_path),
    )


def _unit(v: np.ndarray) -> np.ndarray:
    return v / np.linalg.norm(v)
