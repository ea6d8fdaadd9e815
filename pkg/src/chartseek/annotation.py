"""Stage 1: disentangle the visual attributes of a query chart.

The chart type is classified first and gates which of the remaining primary
classifiers run; user-supplied zero-shot classifiers are applied last.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from chartseek.colorfeat import ForegroundMask, Palette, RasterImage, extract_palette
from chartseek.embedding import Provider
from chartseek.taxonomy import (
    ATTRIBUTE_KINDS,
    AttributeSet,
    ChartType,
    ExtendedClassifierSpec,
    KIND_CLASSES,
    applicable_attributes,
)


class AnnotationError(RuntimeError):
    def __init__(self, stage: str, cause: Exception):
        super().__init__(f"annotation stage {stage!r} failed: {cause}")
        self.stage = stage
        self.cause = cause


@dataclass(frozen=True)
class AnnotationResult:
    attributes: AttributeSet
    confidences: Mapping[str, float] = field(default_factory=dict)
    mask: ForegroundMask | None = None
    palette: Palette | None = None


def argmax_label(logits, labels: Sequence[str]) -> str:
    """Label of the maximal logit; ties go to the lowest index."""
    y = np.asarray(logits, dtype=np.float64)
    if y.size == 0 or y.size != len(labels):
        raise ValueError(f"{y.size} logits vs {len(labels)} labels")
    return labels[int(np.argmax(y))]


def annotate(
    img: RasterImage,
    provider: Provider,
    extended: Sequence[ExtendedClassifierSpec] = (),
    table=None,
) -> AnnotationResult:
    """Run segmentation, the four primary classifiers (where applicable),
    palette extraction, and any user-defined zero-shot classifiers."""
    try:
        mask = provider.segment(img)
    except Exception as exc:
        raise AnnotationError("segment", exc) from exc

    try:
        type_label, type_conf = provider.classify_primary(img, "type")
    except Exception as exc:
        raise AnnotationError("classify:type", exc) from exc
    ctype = ChartType(type_label)

    values: dict[str, object] = {}
    confidences: dict[str, float] = {"type": type_conf}
    applicable = applicable_attributes(ctype, table)
    for kind in ATTRIBUTE_KINDS:
        if kind not in applicable:
            continue
        try:
            label, conf = provider.classify_primary(img, kind)
        except Exception as exc:
            raise AnnotationError(f"classify:{kind}", exc) from exc
        values[kind] = KIND_CLASSES[kind](label)
        confidences[kind] = conf

    try:
        palette = extract_palette(img, mask)
    except Exception as exc:
        raise AnnotationError("palette", exc) from exc

    extended_labels: dict[str, str] = {}
    for spec in extended:
        try:
            logits = provider.zero_shot_logits(img, spec.labels)
        except Exception as exc:
            raise AnnotationError(f"zero_shot:{spec.name}", exc) from exc
        extended_labels[spec.name] = argmax_label(logits, spec.labels)

    attributes = AttributeSet(
        type=ctype,
        color=values.get("color"),
        trend=values.get("trend"),
        layout=values.get("layout"),
        extended=extended_labels,
    )
    return AnnotationResult(
        attributes=attributes, confidences=confidences, mask=mask, palette=palette
    )
