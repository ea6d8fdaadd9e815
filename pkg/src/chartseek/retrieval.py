"""Stage 2: intent-aware filtering, per-candidate score breakdowns, and
top-K ranking.

A candidate's total score is s_global * exp(nu * s_intent + mu * s_match):
global perception (cosine between image features), the intent-attribute
aggregate over trend/color/extended sub-scores, and multi-modal feature
matching against the fused image+prompt feature. Type and layout never
enter the score; they act only in the filter.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from chartseek.colorfeat import RasterImage, color_similarity, histogram_vector
from chartseek.corpus import ChartRecord, CorpusSnapshot
from chartseek.embedding import Provider, fuse
from chartseek.numerics import cosine_similarity, softmax_select, to_unit_interval
from chartseek.taxonomy import AttributeSelection, ExtendedClassifierSpec, attribute_match


class RetrievalError(ValueError):
    pass


@dataclass(frozen=True)
class ScoringWeights:
    """Exponent weights of the total score; defaults follow the reference
    setting (intent weight 1, matching weight 5)."""

    nu: float = 1.0
    mu: float = 5.0
    # "mean" keeps the intent aggregate in [0, 1] however many components
    # are active; "sum" is the literal three-term sum.
    intent_aggregation: str = "mean"

    def __post_init__(self):
        if self.intent_aggregation not in ("mean", "sum"):
            raise RetrievalError(f"unknown intent aggregation {self.intent_aggregation!r}")


@dataclass(frozen=True)
class RetrievalRequest:
    image: RasterImage
    selection: AttributeSelection = field(default_factory=AttributeSelection)
    prompt: Optional[str] = None
    extended: Optional[ExtendedClassifierSpec] = None
    k: int = 5

    def __post_init__(self):
        if self.k < 1:
            raise RetrievalError(f"k must be >= 1, got {self.k}")
        if self.prompt is not None and not self.prompt.strip():
            raise RetrievalError("prompt must be nonempty when given")


@dataclass(frozen=True)
class ScoreBreakdown:
    s_global: float
    s_match: float
    s_intent: float
    total: float
    s_trend: Optional[float] = None
    s_color: Optional[float] = None
    s_extended: Optional[float] = None

    def to_dict(self) -> dict:
        return {
            "s_global": self.s_global,
            "s_trend": self.s_trend,
            "s_color": self.s_color,
            "s_extended": self.s_extended,
            "s_intent": self.s_intent,
            "s_match": self.s_match,
            "total": self.total,
        }


def aggregate_intent(
    components: Sequence[float], aggregation: str = "mean"
) -> float:
    """Combine the active intent sub-scores; 0 when none are active."""
    if not components:
        return 0.0
    total = float(sum(components))
    return total / len(components) if aggregation == "mean" else total


def combine_scores(
    s_global: float,
    s_intent: float,
    s_match: float,
    weights: ScoringWeights,
    s_trend: Optional[float] = None,
    s_color: Optional[float] = None,
    s_extended: Optional[float] = None,
) -> ScoreBreakdown:
    total = s_global * math.exp(weights.nu * s_intent + weights.mu * s_match)
    return ScoreBreakdown(
        s_global=s_global,
        s_match=s_match,
        s_intent=s_intent,
        total=total,
        s_trend=s_trend,
        s_color=s_color,
        s_extended=s_extended,
    )


@dataclass(frozen=True)
class QueryFeatures:
    image_embedding: np.ndarray
    color_vector: np.ndarray
    fused: Optional[np.ndarray] = None
    trend: Optional[np.ndarray] = None


@dataclass(frozen=True)
class RankedItem:
    record: ChartRecord
    scores: ScoreBreakdown


def filter_candidates(
    snapshot: CorpusSnapshot, sel: AttributeSelection
) -> list[ChartRecord]:
    """Records matching every constraint of the selection, corpus order."""
    return [r for r in snapshot if attribute_match(r.attributes, sel)]


def default_image_loader(record: ChartRecord) -> RasterImage:
    return RasterImage.from_file(record.image_ref)


class RetrievalEngine:
    """Scores and ranks corpus candidates for a retrieval request.

    ``image_loader`` resolves a record to its bitmap; it is only invoked
    when an extended classifier requires per-candidate zero-shot logits.
    """

    def __init__(
        self,
        provider: Provider,
        image_loader: Callable[[ChartRecord], RasterImage] = default_image_loader,
    ):
        self.provider = provider
        self.image_loader = image_loader

    def prepare_query_features(self, req: RetrievalRequest) -> QueryFeatures:
        image_embedding = self.provider.embed_image(req.image)
        fused = None
        if req.prompt is not None:
            fused = fuse(image_embedding, self.provider.embed_text(req.prompt))
        mask = self.provider.segment(req.image)
        color_vector = histogram_vector(req.image, mask)
        trend = None
        if req.selection.trend is not None:
            trend = self.provider.trend_feature(req.image)
        return QueryFeatures(
            image_embedding=image_embedding,
            color_vector=color_vector,
            fused=fused,
            trend=trend,
        )

    def score_candidate(
        self,
        qf: QueryFeatures,
        cand: ChartRecord,
        req: RetrievalRequest,
        weights: ScoringWeights = ScoringWeights(),
    ) -> ScoreBreakdown:
        cand_embedding = cand.embedding.astype(np.float64)
        s_global = to_unit_interval(cosine_similarity(qf.image_embedding, cand_embedding))

        s_trend = s_color = s_extended = None
        if req.selection.trend is not None:
            if qf.trend is None:
                raise RetrievalError("query trend feature missing")
            if cand.trend_feature is None:
                raise RetrievalError(f"candidate {cand.id!r} has no trend feature")
            s_trend = to_unit_interval(
                cosine_similarity(qf.trend, cand.trend_feature.astype(np.float64))
            )
        if req.selection.color is not None:
            s_color = color_similarity(qf.color_vector, cand.color_vector.astype(np.float64))
        if req.extended is not None:
            logits = self.provider.zero_shot_logits(
                self.image_loader(cand), req.extended.labels
            )
            s_extended = softmax_select(logits, req.extended.selected_index)

        present = [s for s in (s_trend, s_color, s_extended) if s is not None]
        s_intent = aggregate_intent(present, weights.intent_aggregation)

        if qf.fused is not None:
            s_match = to_unit_interval(cosine_similarity(qf.fused, cand_embedding))
        else:
            s_match = to_unit_interval(cosine_similarity(qf.image_embedding, cand_embedding))

        return combine_scores(
            s_global,
            s_intent,
            s_match,
            weights,
            s_trend=s_trend,
            s_color=s_color,
            s_extended=s_extended,
        )

    def retrieve(
        self,
        snapshot: CorpusSnapshot,
        req: RetrievalRequest,
        weights: ScoringWeights = ScoringWeights(),
    ) -> list[RankedItem]:
        """Filter, score, sort (total desc, id asc), truncate to k."""
        candidates = filter_candidates(snapshot, req.selection)
        if not candidates:
            return []
        qf = self.prepare_query_features(req)
        scored = [
            RankedItem(record=c, scores=self.score_candidate(qf, c, req, weights))
            for c in candidates
        ]
        scored.sort(key=lambda item: (-item.scores.total, item.record.id))
        return scored[: req.k]
