from chartseek.harness.synth import SynthSpec, generate_synthetic_corpus
from chartseek.harness.evaluation import (
    EvalReport,
    evaluate_annotation,
    evaluate_retrieval,
)

__all__ = [
    "EvalReport",
    "SynthSpec",
    "evaluate_annotation",
    "evaluate_retrieval",
    "generate_synthetic_corpus",
]
