"""Pure numeric kernels used across the scoring and evaluation paths.

Everything here is stateless, 64-bit, and deterministic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


class NumericsError(ValueError):
    pass


@dataclass(frozen=True)
class FocalLossParams:
    """Per-class weight and modulating exponent of the focal loss."""

    alpha_t: float = 1.0
    gamma: float = 0.0

    def __post_init__(self):
        if not 0.0 < self.alpha_t <= 1.0:
            raise NumericsError(f"alpha_t must be in (0, 1], got {self.alpha_t}")
        if self.gamma < 0.0:
            raise NumericsError(f"gamma must be >= 0, got {self.gamma}")


@dataclass(frozen=True)
class ConfusionCounts:
    tp: int
    fp: int
    fn: int
    tn: int = 0

    def __post_init__(self):
        if min(self.tp, self.fp, self.fn, self.tn) < 0:
            raise NumericsError("confusion counts must be non-negative")


def cosine_similarity(u, v) -> float:
    """Cosine of the angle between two same-dimension nonzero vectors."""
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if u.shape != v.shape or u.ndim != 1:
        raise NumericsError(f"dimension mismatch: {u.shape} vs {v.shape}")
    nu = np.linalg.norm(u)
    nv = np.linalg.norm(v)
    if nu == 0.0 or nv == 0.0:
        raise NumericsError("cosine similarity undefined for zero-norm vector")
    return float(np.dot(u, v) / (nu * nv))


def to_unit_interval(c: float) -> float:
    """Affine map [-1, 1] -> [0, 1]."""
    if not -1.0 - 1e-9 <= c <= 1.0 + 1e-9:
        raise NumericsError(f"expected value in [-1, 1], got {c}")
    return min(1.0, max(0.0, (c + 1.0) / 2.0))


def softmax_select(logits, s: int) -> float:
    """Softmax probability of the label at index ``s``.

    Computed with max-subtraction so large logits do not overflow.
    """
    y = np.asarray(logits, dtype=np.float64)
    if y.ndim != 1 or y.size == 0:
        raise NumericsError("logits must be a nonempty vector")
    if not 0 <= s < y.size:
        raise NumericsError(f"index {s} out of range for {y.size} logits")
    z = np.exp(y - y.max())
    return float(z[s] / z.sum())


def focal_loss(p_t: float, params: FocalLossParams) -> float:
    """-alpha_t * (1 - p_t)^gamma * ln(p_t), the class-imbalance-aware
    cross entropy; reduces to alpha-weighted cross entropy at gamma = 0."""
    if not 0.0 < p_t <= 1.0:
        raise NumericsError(f"p_t must be in (0, 1], got {p_t}")
    return -params.alpha_t * (1.0 - p_t) ** params.gamma * math.log(p_t)


def f1_score(c: ConfusionCounts) -> float:
    """2*tp / (2*tp + fp + fn). Raises when the denominator is zero."""
    denom = 2 * c.tp + c.fp + c.fn
    if denom == 0:
        raise NumericsError("f1 undefined: 2*tp + fp + fn == 0")
    return 2 * c.tp / denom


def l2_normalize(v) -> np.ndarray:
    """Unit-norm copy of ``v``; rejects zero vectors."""
    v = np.asarray(v, dtype=np.float64)
    n = np.linalg.norm(v)
    if n == 0.0:
        raise NumericsError("cannot normalize a zero vector")
    return v / n
