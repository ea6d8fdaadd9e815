"""Focal-loss fine-tuning of linear classifier heads over frozen features.

The class weighting follows inverse class frequency: rarer classes get
proportionally larger alpha, normalized to sum to 1 (a 2:1 split yields
alpha = [1/3, 2/3]).
"""

from __future__ import annotations

from collections import Counter
from typing import Mapping, Sequence

import numpy as np

from chartseek.numerics import FocalLossParams, focal_loss


def alpha_from_counts(counts: Mapping[str, int]) -> dict[str, float]:
    """Per-class alpha proportional to 1/count, normalized to sum to 1."""
    if not counts or any(c <= 0 for c in counts.values()):
        raise ValueError("need positive counts for every class")
    inverse = {label: 1.0 / c for label, c in counts.items()}
    total = sum(inverse.values())
    return {label: v / total for label, v in inverse.items()}


def _softmax(z: np.ndarray) -> np.ndarray:
    e = np.exp(z - z.max(axis=-1, keepdims=True))
    return e / e.sum(axis=-1, keepdims=True)


def batch_loss(
    features: np.ndarray,
    labels: Sequence[int],
    weights: np.ndarray,
    alpha: Sequence[float],
    gamma: float,
) -> float:
    """Mean focal loss of a linear head (features @ weights)."""
    probs = _softmax(features @ weights)
    return float(
        np.mean(
            [
                focal_loss(float(probs[i, y]), FocalLossParams(alpha[y], gamma))
                for i, y in enumerate(labels)
            ]
        )
    )


def finetune_classifier(
    features: np.ndarray,
    labels: Sequence[str],
    classes: Sequence[str],
    gamma: float = 2.0,
    lr: float = 0.5,
    epochs: int = 200,
    seed: int = 0,
) -> tuple[np.ndarray, list[float]]:
    """Gradient-descend a linear head under focal loss.

    Returns (weights of shape (dim, n_classes), per-epoch mean losses).
    """
    features = np.asarray(features, dtype=np.float64)
    index = {c: i for i, c in enumerate(classes)}
    y = np.array([index[l] for l in labels])
    alpha_map = alpha_from_counts(Counter(labels))
    alpha = np.array([alpha_map.get(c, 1.0 / len(classes)) for c in classes])

    rng = np.random.default_rng(seed)
    weights = 0.01 * rng.standard_normal((features.shape[1], len(classes)))
    history = []
    n = len(y)
    for _ in range(epochs):
        logits = features @ weights
        probs = _softmax(logits)
        p_t = probs[np.arange(n), y]
        p_t = np.clip(p_t, 1e-12, 1.0)
        # dL/dp_t for L = -alpha (1-p)^gamma ln p
        one_minus = np.clip(1.0 - p_t, 0.0, 1.0)
        dldp = alpha[y] * (
            gamma * np.where(one_minus > 0, one_minus ** max(gamma - 1.0, 0.0), 0.0) * np.log(p_t)
            - one_minus**gamma / p_t
        )
        # chain through softmax: dp_t/dz_j = p_t (delta_tj - p_j)
        dz = probs * -(p_t * dldp)[:, None]
        dz[np.arange(n), y] += p_t * dldp
        weights -= lr * (features.T @ dz) / n
        history.append(batch_loss(features, y, weights, alpha, gamma))
    return weights, history
