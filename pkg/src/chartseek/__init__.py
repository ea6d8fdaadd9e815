"""Intent-aware chart retrieval engine.

Two-stage pipeline: an annotation stage disentangles visual attributes of a
query chart (type, colormap, trend, layout, plus user-defined zero-shot
attributes), and a retrieval stage filters a corpus by the user's selected
attributes and ranks candidates with a composite similarity score combining
global perception, intent attributes, and multi-modal feature matching.
"""

from chartseek.taxonomy import (
    AttributeSelection,
    AttributeSet,
    ChartType,
    ColormapClass,
    ExtendedClassifierSpec,
    LayoutClass,
    TrendClass,
    applicable_attributes,
    attribute_match,
)
from chartseek.embedding import MockProvider, RemoteProvider, ProviderDescriptor, fuse, make_provider
from chartseek.annotation import AnnotationResult, annotate
from chartseek.corpus import ChartRecord, CorpusSnapshot, CorpusBuilder
from chartseek.retrieval import (
    RankedItem,
    RetrievalEngine,
    RetrievalRequest,
    ScoreBreakdown,
    ScoringWeights,
)

__version__ = "0.1.0"

__all__ = [
    "AnnotationResult",
    "AttributeSelection",
    "AttributeSet",
    "ChartRecord",
    "ChartType",
    "ColormapClass",
    "CorpusBuilder",
    "CorpusSnapshot",
    "ExtendedClassifierSpec",
    "LayoutClass",
    "MockProvider",
    "ProviderDescriptor",
    "RankedItem",
    "RemoteProvider",
    "RetrievalEngine",
    "RetrievalRequest",
    "ScoreBreakdown",
    "ScoringWeights",
    "TrendClass",
    "annotate",
    "applicable_attributes",
    "attribute_match",
    "fuse",
    "make_provider",
]
