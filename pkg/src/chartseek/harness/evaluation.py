"""Top-K retrieval F1 evaluation and annotation accuracy.

Retrieval protocol, documented in every report header: each labeled query
is retrieved with no user intent (empty selection, no prompt). For an
attribute kind and cutoff K, tp counts retrieved charts whose label equals
the query's, fp = K - tp, and fn = min(K, relevant-in-corpus) - tp, so a
perfect top-K gives F1 = 1 even when far more than K charts are relevant.
Counts are micro-averaged over queries before applying the F1 formula.
"""

from __future__ import annotations

import csv
import io
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

from chartseek.annotation import annotate
from chartseek.colorfeat import RasterImage
from chartseek.corpus import ChartRecord, CorpusSnapshot
from chartseek.numerics import ConfusionCounts, f1_score
from chartseek.retrieval import RetrievalEngine, RetrievalRequest
from chartseek.taxonomy import AttributeSelection

logger = logging.getLogger(__name__)

EVAL_KINDS = ("type", "color", "trend", "layout")
DEFAULT_K_SET = (3, 5, 10)


class EvalError(ValueError):
    pass


@dataclass
class EvalReport:
    k_values: tuple[int, ...]
    # f1[kind][k] and counts[kind][k] = (tp, fp, fn)
    f1: dict = field(default_factory=dict)
    counts: dict = field(default_factory=dict)
    per_query: list = field(default_factory=list)
    corpus_descriptor: str = ""
    provider_descriptor: str = ""

    def to_dict(self) -> dict:
        return {
            "k_values": list(self.k_values),
            "f1": self.f1,
            "counts": {
                kind: {str(k): list(v) for k, v in by_k.items()}
                for kind, by_k in self.counts.items()
            },
            "corpus": self.corpus_descriptor,
            "provider": self.provider_descriptor,
        }

    def to_csv_text(self) -> str:
        """Delimited report: one row per attribute kind and K."""
        buf = io.StringIO()
        buf.write("# top-K retrieval F1 report\n")
        buf.write(
            "# protocol: tp=|top-K with query's label|, fp=K-tp,"
            " fn=min(K,relevant)-tp, micro-averaged\n"
        )
        buf.write(f"# corpus: {self.corpus_descriptor}\n")
        buf.write(f"# provider: {self.provider_descriptor}\n")
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["attribute", "k", "tp", "fp", "fn", "f1"])
        for kind in EVAL_KINDS:
            if kind not in self.f1:
                continue
            for k in self.k_values:
                tp, fp, fn = self.counts[kind][k]
                writer.writerow([kind, k, tp, fp, fn, f"{self.f1[kind][k]:.6f}"])
        return buf.getvalue()

    def write(self, out_dir: str | Path, stem: str = "report") -> dict:
        """Write the delimited report and a rendered F1 figure."""
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        csv_path = out_dir / f"{stem}.csv"
        csv_path.write_text(self.to_csv_text(), encoding="utf-8")
        fig_path = out_dir / f"{stem}.png"
        render_f1_figure(self, fig_path)
        return {"csv": str(csv_path), "figure": str(fig_path)}


def evaluate_retrieval(
    snapshot: CorpusSnapshot,
    engine: RetrievalEngine,
    queries: Sequence[ChartRecord],
    k_set: Sequence[int] = DEFAULT_K_SET,
    corpus_descriptor: str = "",
    provider_descriptor: str = "",
) -> EvalReport:
    """Top-K F1 per primary attribute over intent-free retrievals."""
    k_values = tuple(sorted(set(int(k) for k in k_set)))
    if not k_values or k_values[0] < 1:
        raise EvalError("k values must be positive")
    totals = {kind: {k: [0, 0, 0] for k in k_values} for kind in EVAL_KINDS}
    per_query = []

    relevant_cache: dict[tuple[str, str], int] = {}

    def relevant_count(kind: str, label: str) -> int:
        key = (kind, label)
        if key not in relevant_cache:
            relevant_cache[key] = sum(
                1
                for r in snapshot
                if (r.attributes.type.value if kind == "type" else _label(r, kind)) == label
            )
        return relevant_cache[key]

    k_max = max(k_values)
    for q in queries:
        img = engine.image_loader(q)
        ranked = engine.retrieve(
            snapshot,
            RetrievalRequest(image=img, selection=AttributeSelection(), k=k_max),
        )
        row = {"query": q.id}
        for kind in EVAL_KINDS:
            q_label = q.attributes.type.value if kind == "type" else _label(q, kind)
            if q_label is None:
                continue
            rel = relevant_count(kind, q_label)
            for k in k_values:
                top = ranked[:k]
                tp = sum(
                    1
                    for item in top
                    if (
                        item.record.attributes.type.value
                        if kind == "type"
                        else _label(item.record, kind)
                    )
                    == q_label
                )
                fp = k - tp
                fn = min(k, rel) - tp
                totals[kind][k][0] += tp
                totals[kind][k][1] += fp
                totals[kind][k][2] += max(fn, 0)
                row[f"{kind}@{k}"] = tp
        per_query.append(row)

    f1: dict = {}
    counts: dict = {}
    for kind in EVAL_KINDS:
        if all(sum(totals[kind][k]) == 0 for k in k_values):
            continue  # attribute never present among queries
        f1[kind] = {}
        counts[kind] = {}
        for k in k_values:
            tp, fp, fn = totals[kind][k]
            counts[kind][k] = (tp, fp, fn)
            if 2 * tp + fp + fn == 0:
                logger.warning("F1 undefined for %s@%d (no counts); reporting 0.0", kind, k)
                f1[kind][k] = 0.0
            else:
                f1[kind][k] = f1_score(ConfusionCounts(tp=tp, fp=fp, fn=fn))
    return EvalReport(
        k_values=k_values,
        f1=f1,
        counts=counts,
        per_query=per_query,
        corpus_descriptor=corpus_descriptor,
        provider_descriptor=provider_descriptor,
    )


def _label(r: ChartRecord, kind: str):
    value = r.attributes.get(kind)
    return value.value if value is not None else None


def evaluate_annotation(
    records: Sequence[ChartRecord],
    provider,
    image_loader: Callable[[ChartRecord], RasterImage] | None = None,
) -> dict:
    """Per-attribute annotation accuracy against ground-truth labels."""
    if image_loader is None:
        image_loader = lambda r: RasterImage.from_file(r.image_ref)
    correct = {kind: 0 for kind in EVAL_KINDS}
    total = {kind: 0 for kind in EVAL_KINDS}
    for r in records:
        result = annotate(image_loader(r), provider)
        predicted = result.attributes
        if r.attributes.type is not None:
            total["type"] += 1
            correct["type"] += int(predicted.type == r.attributes.type)
        for kind in ("color", "trend", "layout"):
            truth = r.attributes.get(kind)
            if truth is None:
                continue
            total[kind] += 1
            correct[kind] += int(predicted.get(kind) == truth)
    return {
        kind: (correct[kind] / total[kind]) for kind in EVAL_KINDS if total[kind] > 0
    }


def render_f1_figure(report: EvalReport, path: str | Path) -> None:
    """Grouped bar chart of F1 per attribute kind and K."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    kinds = [k for k in EVAL_KINDS if k in report.f1]
    fig, ax = plt.subplots(figsize=(7, 4))
    width = 0.8 / max(len(report.k_values), 1)
    for j, k in enumerate(report.k_values):
        xs = [i + j * width for i in range(len(kinds))]
        ys = [report.f1[kind][k] for kind in kinds]
        ax.bar(xs, ys, width=width, label=f"K={k}")
    ax.set_xticks([i + 0.4 - width / 2 for i in range(len(kinds))])
    ax.set_xticklabels(kinds)
    ax.set_ylim(0, 1.05)
    ax.set_ylabel("F1")
    ax.set_title("Top-K retrieval F1 by attribute")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
