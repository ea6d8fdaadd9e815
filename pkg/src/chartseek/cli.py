"""Command-line interface: corpus ingestion, retrieval, evaluation,
synthetic corpus generation, corpus stats, and the HTTP service.

The provider endpoint can be set with --endpoint or the CHARTSEEK_ENDPOINT
environment variable; CHARTSEEK_CREATED pins the snapshot timestamp for
reproducible runs.
"""

from __future__ import annotations

import csv
import json
import os
import sys
from pathlib import Path

import click

from chartseek.colorfeat import RasterImage
from chartseek.corpus import CorpusBuilder, CorpusSnapshot, stats as corpus_stats
from chartseek.embedding import ProviderDescriptor, make_provider
from chartseek.harness.evaluation import DEFAULT_K_SET, evaluate_retrieval
from chartseek.harness.synth import SynthSpec, generate_synthetic_corpus
from chartseek.retrieval import RetrievalEngine, RetrievalRequest, ScoringWeights
from chartseek.taxonomy import (
    AttributeSelection,
    AttributeSet,
    ChartType,
    ColormapClass,
    ExtendedClassifierSpec,
    LayoutClass,
    TrendClass,
)

IMAGE_EXTS = (".png", ".jpg", ".jpeg")


def _provider_options(fn):
    fn = click.option("--provider", "provider_kind", type=click.Choice(["mock", "remote"]), default="mock", show_default=True)(fn)
    fn = click.option("--endpoint", default=None, help="Remote provider URL (or CHARTSEEK_ENDPOINT).")(fn)
    fn = click.option("--fixture", default=None, type=click.Path(exists=True), help="Mock provider fixture JSON.")(fn)
    fn = click.option("--dim", default=512, show_default=True, help="Embedding dimension.")(fn)
    return fn


def _build_provider(provider_kind: str, endpoint: str | None, fixture: str | None, dim: int):
    endpoint = endpoint or os.environ.get("CHARTSEEK_ENDPOINT")
    desc = ProviderDescriptor(kind=provider_kind, endpoint=endpoint, dim=dim, fixture=fixture)
    return make_provider(desc), desc


def _read_labels(path: str) -> dict[str, AttributeSet]:
    out: dict[str, AttributeSet] = {}
    with open(path, newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            out[row["id"]] = AttributeSet(
                type=ChartType(row["type"]),
                color=ColormapClass(row["color"]) if row.get("color") else None,
                trend=TrendClass(row["trend"]) if row.get("trend") else None,
                layout=LayoutClass(row["layout"]) if row.get("layout") else None,
            )
    return out


@click.group()
def main():
    """Intent-aware chart retrieval."""


@main.command()
@click.option("--images", "images_dir", required=True, type=click.Path(exists=True, file_okay=False))
@click.option("--labels", "labels_file", default=None, type=click.Path(exists=True))
@click.option("--out", "out_path", required=True, type=click.Path())
@click.option("--source", default="manual", type=click.Choice(["beagle", "manual", "synthetic"]), show_default=True)
@click.option("--created", default=None, help="Snapshot timestamp (or CHARTSEEK_CREATED).")
@_provider_options
def ingest(images_dir, labels_file, out_path, source, created, provider_kind, endpoint, fixture, dim):
    """Ingest a directory of chart images into a corpus snapshot."""
    provider, _ = _build_provider(provider_kind, endpoint, fixture, dim)
    labels = _read_labels(labels_file) if labels_file else {}
    builder = CorpusBuilder(provider)
    paths = sorted(p for p in Path(images_dir).iterdir() if p.suffix.lower() in IMAGE_EXTS)
    if not paths:
        raise click.ClickException(f"no images found under {images_dir}")
    for path in paths:
        record_id = path.stem
        builder.ingest_image(
            record_id,
            RasterImage.from_file(path),
            image_ref=str(path),
            source=source,
            attributes=labels.get(record_id),
        )
    created = created if created is not None else os.environ.get("CHARTSEEK_CREATED", "")
    snapshot = builder.build(created=created)
    snapshot.save(out_path)
    click.echo(f"ingested {len(snapshot)} charts -> {out_path}")


def _parse_attr(pairs: tuple[str, ...]) -> AttributeSelection:
    values: dict = {}
    parsers = {"type": ChartType, "color": ColormapClass, "trend": TrendClass, "layout": LayoutClass}
    for pair in pairs:
        if "=" not in pair:
            raise click.ClickException(f"--attr expects kind=value, got {pair!r}")
        kind, value = pair.split("=", 1)
        if kind not in parsers:
            raise click.ClickException(f"unknown attribute kind {kind!r}")
        try:
            values[kind] = parsers[kind](value)
        except ValueError:
            raise click.ClickException(f"invalid {kind} value {value!r}")
    return AttributeSelection(**values)


@main.command()
@click.option("--snapshot", "snapshot_path", required=True, type=click.Path(exists=True))
@click.option("--image", "image_path", required=True, type=click.Path(exists=True))
@click.option("--prompt", default=None)
@click.option("--attr", "attrs", multiple=True, help="Required attribute, kind=value; repeatable.")
@click.option("--ext-labels", default=None, help="Comma-separated zero-shot labels.")
@click.option("--ext-select", default=0, type=int, help="Index of the intended label.")
@click.option("--ext-name", default="custom", show_default=True)
@click.option("--k", default=5, show_default=True)
@click.option("--nu", default=1.0, show_default=True)
@click.option("--mu", default=5.0, show_default=True)
@click.option("--json", "as_json", is_flag=True)
@_provider_options
def retrieve(snapshot_path, image_path, prompt, attrs, ext_labels, ext_select, ext_name,
             k, nu, mu, as_json, provider_kind, endpoint, fixture, dim):
    """Rank corpus charts against a query image and optional intent."""
    provider, _ = _build_provider(provider_kind, endpoint, fixture, dim)
    snapshot = CorpusSnapshot.load(snapshot_path)
    extended = None
    if ext_labels:
        extended = ExtendedClassifierSpec(
            name=ext_name, labels=[s.strip() for s in ext_labels.split(",")], selected_index=ext_select
        )
    req = RetrievalRequest(
        image=RasterImage.from_file(image_path),
        selection=_parse_attr(attrs),
        prompt=prompt,
        extended=extended,
        k=k,
    )
    engine = RetrievalEngine(provider)
    ranked = engine.retrieve(snapshot, req, ScoringWeights(nu=nu, mu=mu))
    if as_json:
        click.echo(json.dumps(
            [{"id": it.record.id, "image_ref": it.record.image_ref,
              "attributes": it.record.attributes.to_dict(), "scores": it.scores.to_dict()}
             for it in ranked], indent=2))
        return
    click.echo(f"{'rank':<5}{'id':<24}{'total':>12}{'s_global':>10}{'s_intent':>10}{'s_match':>10}")
    for i, it in enumerate(ranked, 1):
        s = it.scores
        click.echo(f"{i:<5}{it.record.id:<24}{s.total:>12.4f}{s.s_global:>10.4f}{s.s_intent:>10.4f}{s.s_match:>10.4f}")


@main.command("eval")
@click.option("--snapshot", "snapshot_path", required=True, type=click.Path(exists=True))
@click.option("--queries", "queries_file", required=True, type=click.Path(exists=True),
              help="File with one query record id per line.")
@click.option("--k", "k_spec", default="3,5,10", show_default=True)
@click.option("--out", "out_dir", default=".", type=click.Path(), show_default=True)
@_provider_options
def eval_cmd(snapshot_path, queries_file, k_spec, out_dir, provider_kind, endpoint, fixture, dim):
    """Top-K F1 evaluation; writes report.csv and report.png to --out."""
    provider, desc = _build_provider(provider_kind, endpoint, fixture, dim)
    snapshot = CorpusSnapshot.load(snapshot_path)
    ids = [ln.strip() for ln in Path(queries_file).read_text(encoding="utf-8").splitlines() if ln.strip()]
    queries = []
    for qid in ids:
        record = snapshot.get(qid)
        if record is None:
            raise click.ClickException(f"query id {qid!r} not in snapshot")
        queries.append(record)
    k_set = [int(s) for s in k_spec.split(",")] if k_spec else list(DEFAULT_K_SET)
    engine = RetrievalEngine(provider)
    report = evaluate_retrieval(
        snapshot, engine, queries, k_set=k_set,
        corpus_descriptor=f"{snapshot_path} ({len(snapshot)} records, dim {snapshot.dim})",
        provider_descriptor=f"{desc.kind} dim={desc.dim}",
    )
    paths = report.write(out_dir)
    click.echo(report.to_csv_text(), nl=False)
    click.echo(f"wrote {paths['csv']} and {paths['figure']}")


@main.command()
@click.option("--spec", "spec_file", default=None, type=click.Path(exists=True))
@click.option("--out", "out_dir", required=True, type=click.Path())
def synth(spec_file, out_dir):
    """Generate a labeled synthetic chart corpus plus a mock fixture."""
    spec = SynthSpec.from_file(spec_file) if spec_file else SynthSpec()
    result = generate_synthetic_corpus(spec, out_dir)
    click.echo(f"rendered {len(result.entries)} charts under {result.images_dir}")
    click.echo(f"labels: {result.labels_path}")
    click.echo(f"fixture: {result.fixture_path}")


@main.command("stats")
@click.option("--snapshot", "snapshot_path", required=True, type=click.Path(exists=True))
@click.option("--json", "as_json", is_flag=True)
def stats_cmd(snapshot_path, as_json):
    """Per-type and per-attribute counts of a snapshot."""
    snapshot = CorpusSnapshot.load(snapshot_path)
    info = corpus_stats(snapshot)
    if as_json:
        click.echo(json.dumps(info, indent=2))
        return
    click.echo(f"records: {info['total']}  dim: {info['dim']}")
    for name, count in info["by_type"].items():
        click.echo(f"  {name:<18}{count}")
    for kind, values in info["by_attribute"].items():
        if values:
            click.echo(f"{kind}: " + ", ".join(f"{v}={c}" for v, c in values.items()))


@main.command()
@click.option("--snapshot", "snapshot_path", default=None, type=click.Path(exists=True))
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8000, show_default=True)
@click.option("--nu", default=1.0, show_default=True)
@click.option("--mu", default=5.0, show_default=True)
@_provider_options
def serve(snapshot_path, host, port, nu, mu, provider_kind, endpoint, fixture, dim):
    """Run the HTTP retrieval service."""
    import uvicorn

    from chartseek.service import ApiSession, create_app

    provider, _ = _build_provider(provider_kind, endpoint, fixture, dim)
    session = ApiSession(provider=provider, weights=ScoringWeights(nu=nu, mu=mu))
    if snapshot_path:
        session.reload(snapshot_path)
    uvicorn.run(create_app(session), host=host, port=port)


if __name__ == "__main__":
    sys.exit(main())
