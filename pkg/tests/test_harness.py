import csv
import json
from pathlib import Path

import numpy as np
import pytest

from chartseek.corpus import CorpusBuilder
from chartseek.embedding import MockProvider
from chartseek.harness import (
    EvalReport,
    SynthSpec,
    evaluate_annotation,
    evaluate_retrieval,
    generate_synthetic_corpus,
)
from chartseek.harness.evaluation import EvalError
from chartseek.colorfeat import RasterImage
from chartseek.retrieval import RetrievalEngine, RetrievalRequest
from chartseek.taxonomy import AttributeSelection, AttributeSet, ChartType

from conftest import noise_image


def ingest_synth(out_dir, spec):
    """Generate a synthetic corpus and ingest it through a fixture-backed
    mock provider. Returns (snapshot, engine, records)."""
    result = generate_synthetic_corpus(spec, out_dir)
    provider = MockProvider(dim=spec.dim, fixture=result.fixture_path)
    builder = CorpusBuilder(provider)
    images = {}
    for entry in result.entries:
        img = RasterImage.from_file(entry.image_path)
        images[entry.id] = img
        builder.ingest_image(
            entry.id,
            img,
            image_ref=entry.image_path,
            attributes=AttributeSet.from_dict(entry.labels),
            source="synthetic",
        )
    snapshot = builder.build()
    engine = RetrievalEngine(provider, image_loader=lambda r: images[r.id])
    return snapshot, engine, provider


class TestSynth:
    def test_counts_and_labels(self, tmp_path):
        spec = SynthSpec(seed=3, per_type={ChartType.BAR.value: 3, ChartType.PIE.value: 2}, dim=16)
        result = generate_synthetic_corpus(spec, tmp_path)
        assert len(result.entries) == 5
        assert sum(1 for e in result.entries if e.labels["type"] == "bar") == 3
        with open(result.labels_path) as fh:
            rows = list(csv.DictReader(fh))
        assert len(rows) == 5
        assert {r["id"] for r in rows} == {e.id for e in result.entries}

    def test_deterministic(self, tmp_path):
        spec = SynthSpec(seed=11, per_type={ChartType.LINE.value: 2, ChartType.SCATTER.value: 2}, dim=8)
        a = generate_synthetic_corpus(spec, tmp_path / "a")
        b = generate_synthetic_corpus(spec, tmp_path / "b")
        assert Path(a.fixture_path).read_bytes() == Path(b.fixture_path).read_bytes()
        assert Path(a.labels_path).read_text() == Path(b.labels_path).read_text()
        for ea, eb in zip(a.entries, b.entries):
            assert Path(ea.image_path).read_bytes() == Path(eb.image_path).read_bytes()

    def test_fixture_keys_match_images(self, tmp_path):
        spec = SynthSpec(seed=5, per_type={ChartType.HISTOGRAM.value: 2}, dim=8)
        result = generate_synthetic_corpus(spec, tmp_path)
        fixture = json.loads(Path(result.fixture_path).read_text())
        provider = MockProvider(dim=8, fixture=result.fixture_path)
        for entry in result.entries:
            img = RasterImage.from_file(entry.image_path)
            emb = provider.embed_image(img)
            assert np.allclose(emb, fixture["images"][entry.id]["embedding"], atol=1e-12)


class TestEvaluateRetrieval:
    def test_perfect_separation_gives_f1_one(self, tmp_path):
        # Two well-separated type clusters with no embedding noise: every
        # top-K neighbor shares the query's type label.
        spec = SynthSpec(
            seed=1,
            per_type={ChartType.BAR.value: 6, ChartType.PIE.value: 6},
            dim=16,
            embedding_noise=0.01,
        )
        snapshot, engine, _ = ingest_synth(tmp_path, spec)
        report = evaluate_retrieval(snapshot, engine, snapshot.records, k_set=(3, 5))
        for k in (3, 5):
            assert report.f1["type"][k] == pytest.approx(1.0)

    def test_tp_fp_fn_bookkeeping(self, tmp_path):
        spec = SynthSpec(seed=2, per_type={ChartType.BAR.value: 4, ChartType.PIE.value: 4}, dim=16)
        snapshot, engine, _ = ingest_synth(tmp_path, spec)
        report = evaluate_retrieval(snapshot, engine, snapshot.records, k_set=(3,))
        tp, fp, fn = report.counts["type"][3]
        assert tp + fp == 3 * len(snapshot.records)
        assert fn >= 0

    def test_brute_force_oracle_20_records(self, tmp_path):
        spec = SynthSpec(
            seed=9,
            per_type={ChartType.BAR.value: 7, ChartType.LINE.value: 7, ChartType.PIE.value: 6},
            dim=16,
        )
        snapshot, engine, _ = ingest_synth(tmp_path, spec)
        queries = snapshot.records[:5]
        k = 4
        report = evaluate_retrieval(snapshot, engine, queries, k_set=(k,))
        # independent recount from raw retrievals
        exp = [0, 0, 0]
        for q in queries:
            img = engine.image_loader(q)
            ranked = engine.retrieve(
                snapshot, RetrievalRequest(image=img, selection=AttributeSelection(), k=k)
            )
            rel = sum(1 for r in snapshot if r.attributes.type == q.attributes.type)
            tp = sum(1 for it in ranked if it.record.attributes.type == q.attributes.type)
            exp[0] += tp
            exp[1] += k - tp
            exp[2] += min(k, rel) - tp
        assert list(report.counts["type"][k]) == exp
        tp, fp, fn = exp
        assert report.f1["type"][k] == pytest.approx(2 * tp / (2 * tp + fp + fn), abs=1e-9)

    def test_skips_inapplicable_kinds(self, tmp_path):
        # Pie charts carry only a colormap label, so trend/layout rows are
        # absent from the report rather than reported as zero.
        spec = SynthSpec(seed=4, per_type={ChartType.PIE.value: 5}, dim=8)
        snapshot, engine, _ = ingest_synth(tmp_path, spec)
        report = evaluate_retrieval(snapshot, engine, snapshot.records, k_set=(3,))
        assert "trend" not in report.f1
        assert "layout" not in report.f1
        assert "color" in report.f1

    def test_invalid_k(self, tmp_path):
        spec = SynthSpec(seed=4, per_type={ChartType.PIE.value: 2}, dim=8)
        snapshot, engine, _ = ingest_synth(tmp_path, spec)
        with pytest.raises(EvalError):
            evaluate_retrieval(snapshot, engine, snapshot.records, k_set=(0,))


class TestEvaluateAnnotation:
    def test_fixture_labels_give_perfect_accuracy(self, tmp_path):
        spec = SynthSpec(seed=6, per_type={ChartType.BAR.value: 3, ChartType.HEATMAP.value: 3}, dim=16)
        result = generate_synthetic_corpus(spec, tmp_path)
        provider = MockProvider(dim=16, fixture=result.fixture_path)
        builder = CorpusBuilder(provider)
        images = {}
        for entry in result.entries:
            img = RasterImage.from_file(entry.image_path)
            images[entry.id] = img
            builder.ingest_image(
                entry.id, img, image_ref=entry.image_path,
                attributes=AttributeSet.from_dict(entry.labels), source="synthetic",
            )
        snapshot = builder.build()
        acc = evaluate_annotation(
            snapshot.records, provider, image_loader=lambda r: images[r.id]
        )
        assert acc["type"] == pytest.approx(1.0)
        assert acc["color"] == pytest.approx(1.0)
        assert acc["trend"] == pytest.approx(1.0)
        assert acc["layout"] == pytest.approx(1.0)


class TestReportOutput:
    def test_write_csv_and_figure(self, tmp_path):
        spec = SynthSpec(seed=8, per_type={ChartType.BAR.value: 4, ChartType.LINE.value: 4}, dim=16)
        snapshot, engine, _ = ingest_synth(tmp_path / "corpus", spec)
        report = evaluate_retrieval(
            snapshot, engine, snapshot.records, k_set=(3, 5),
            corpus_descriptor="synthetic-8", provider_descriptor="mock",
        )
        paths = report.write(tmp_path / "out")
        csv_text = (tmp_path / "out" / "report.csv").read_text()
        assert "attribute,k,tp,fp,fn,f1" in csv_text
        assert "# corpus: synthetic-8" in csv_text
        png = (tmp_path / "out" / "report.png").read_bytes()
        assert png[:8] == b"\x89PNG\r\n\x1a\n"
        assert paths["csv"].endswith("report.csv")

    def test_csv_values_parse_back(self, tmp_path):
        spec = SynthSpec(seed=8, per_type={ChartType.BAR.value: 4}, dim=8)
        snapshot, engine, _ = ingest_synth(tmp_path, spec)
        report = evaluate_retrieval(snapshot, engine, snapshot.records, k_set=(3,))
        lines = [l for l in report.to_csv_text().splitlines() if not l.startswith("#")]
        rows = list(csv.DictReader(lines))
        for row in rows:
            kind, k = row["attribute"], int(row["k"])
            assert abs(float(row["f1"]) - report.f1[kind][k]) < 1e-6
            assert (int(row["tp"]), int(row["fp"]), int(row["fn"])) == report.counts[kind][k]

    def test_to_dict_round_trips_through_json(self, tmp_path):
        spec = SynthSpec(seed=8, per_type={ChartType.BAR.value: 4}, dim=8)
        snapshot, engine, _ = ingest_synth(tmp_path, spec)
        report = evaluate_retrieval(snapshot, engine, snapshot.records, k_set=(3,))
        blob = json.dumps(report.to_dict(), sort_keys=True)
        assert json.loads(blob)["f1"]["type"]["3"] == report.f1["type"][3]
