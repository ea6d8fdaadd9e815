"""HTTP service exposing annotation, retrieval, corpus management, and
custom classifier registration.

All responses are JSON; images arrive as multipart uploads or base64
fields (both accepted). Result charts are served by reference through
/v1/images/{id}. The snapshot reference swaps atomically, so concurrent
retrievals during a reload each see one consistent snapshot.
"""

from __future__ import annotations

import base64
import binascii
import tempfile
import threading
from pathlib import Path
from typing import Optional

from fastapi import FastAPI, HTTPException, Request
from fastapi.responses import FileResponse

from chartseek.annotation import AnnotationError, annotate
from chartseek.colorfeat import ColorFeatError, RasterImage, histogram_vector
from chartseek.corpus import ChartRecord, CorpusError, CorpusSnapshot
from chartseek.embedding import Provider, ProviderError
from chartseek.retrieval import RetrievalEngine, RetrievalRequest, ScoringWeights
from chartseek.taxonomy import (
    AttributeSelection,
    AttributeSet,
    ExtendedClassifierSpec,
    TaxonomyError,
)

DEFAULT_K = 5


class ApiSession:
    """Shared server state: the active snapshot (atomic reference), the
    classifier registry (write-locked), the provider, and weight defaults."""

    def __init__(
        self,
        provider: Provider,
        weights: ScoringWeights = ScoringWeights(),
        snapshot: Optional[CorpusSnapshot] = None,
        upload_dir: Optional[str] = None,
    ):
        self.provider = provider
        self.weights = weights
        self.snapshot = snapshot
        self.snapshot_path: Optional[str] = None
        self.classifiers: dict[str, ExtendedClassifierSpec] = {}
        self.upload_dir = Path(upload_dir) if upload_dir else Path(tempfile.mkdtemp(prefix="chartseek-"))
        self._lock = threading.Lock()

    def reload(self, path: str) -> CorpusSnapshot:
        snapshot = CorpusSnapshot.load(path)
        self.snapshot_path = path
        self.snapshot = snapshot  # single reference assignment: atomic
        return snapshot

    def register_classifier(self, spec: ExtendedClassifierSpec) -> None:
        with self._lock:
            if spec.name in self.classifiers:
                raise KeyError(spec.name)
            self.classifiers[spec.name] = spec

    def add_chart(self, record: ChartRecord) -> CorpusSnapshot:
        with self._lock:
            current = self.snapshot
            records = list(current.records) if current is not None else []
            dim = current.dim if current is not None else self.provider.dim
            created = current.created if current is not None else ""
            if any(r.id == record.id for r in records):
                raise CorpusError(f"duplicate record id {record.id!r}")
            snapshot = CorpusSnapshot(records + [record], dim=dim, created=created)
            self.snapshot = snapshot
            return snapshot


async def _read_image_payload(request: Request) -> tuple[RasterImage, dict]:
    """Decode the uploaded chart from multipart or base64 JSON."""
    content_type = request.headers.get("content-type", "")
    if content_type.startswith("multipart/"):
        form = await request.form()
        upload = form.get("image")
        if upload is None:
            raise HTTPException(400, "missing 'image' file field")
        blob = await upload.read()
        extras = {key: form.get(key) for key in form.keys() if key != "image"}
    else:
        try:
            body = await request.json()
        except Exception:
            raise HTTPException(400, "expected multipart form or JSON body")
        encoded = body.get("image_base64")
        if not encoded:
            raise HTTPException(400, "missing image_base64")
        try:
            blob = base64.b64decode(encoded, validate=True)
        except (binascii.Error, ValueError):
            raise HTTPException(400, "invalid base64 image")
        extras = body
    try:
        img = RasterImage.from_bytes(blob)
    except Exception:
        raise HTTPException(400, "cannot decode image")
    return img, extras


def _parse_selection(data) -> AttributeSelection:
    if not data:
        return AttributeSelection()
    try:
        return AttributeSelection.from_dict(data)
    except (ValueError, TaxonomyError) as exc:
        raise HTTPException(400, f"malformed attribute selection: {exc}")


def create_app(session: ApiSession) -> FastAPI:
    app = FastAPI(title="chartseek", version="0.1.0")
    engine = RetrievalEngine(session.provider)

    @app.post("/v1/annotate")
    async def annotate_chart(request: Request):
        img, extras = await _read_image_payload(request)
        names = extras.get("classifiers") or []
        if isinstance(names, str):
            names = [n.strip() for n in names.split(",") if n.strip()]
        specs = []
        for name in names:
            spec = session.classifiers.get(name)
            if spec is None:
                raise HTTPException(400, f"unknown classifier {name!r}")
            specs.append(spec)
        try:
            result = annotate(img, session.provider, extended=specs)
        except AnnotationError as exc:
            if isinstance(exc.cause, ColorFeatError):
                raise HTTPException(400, str(exc))
            raise HTTPException(502, str(exc))
        return {
            "attributes": result.attributes.to_dict(),
            "confidences": dict(result.confidences),
            "palette": result.palette.to_list() if result.palette else [],
        }

    @app.post("/v1/retrieve")
    async def retrieve(request: Request):
        if session.snapshot is None:
            raise HTTPException(409, "no corpus snapshot loaded")
        snapshot = session.snapshot
        img, body = await _read_image_payload(request)
        selection = _parse_selection(body.get("attributes"))
        prompt = body.get("prompt") or None
        extended = None
        ext = body.get("extended")
        if ext:
            try:
                if ext.get("labels"):
                    extended = ExtendedClassifierSpec(
                        name=ext.get("name", "custom"),
                        labels=ext["labels"],
                        selected_index=int(ext.get("selected_index", 0)),
                    )
                else:
                    registered = session.classifiers.get(ext.get("name", ""))
                    if registered is None:
                        raise HTTPException(400, f"unknown classifier {ext.get('name')!r}")
                    extended = ExtendedClassifierSpec(
                        name=registered.name,
                        labels=registered.labels,
                        selected_index=int(ext.get("selected_index", registered.selected_index)),
                    )
            except TaxonomyError as exc:
                raise HTTPException(400, str(exc))
        try:
            k = int(body.get("k", DEFAULT_K))
            weights = ScoringWeights(
                nu=float(body.get("nu", session.weights.nu)),
                mu=float(body.get("mu", session.weights.mu)),
                intent_aggregation=session.weights.intent_aggregation,
            )
            req = RetrievalRequest(
                image=img, selection=selection, prompt=prompt, extended=extended, k=k
            )
        except (ValueError, TaxonomyError) as exc:
            raise HTTPException(400, str(exc))
        try:
            ranked = engine.retrieve(snapshot, req, weights)
        except ProviderError as exc:
            raise HTTPException(502, str(exc))
        return {
            "k": req.k,
            "results": [
                {
                    "id": item.record.id,
                    "image_url": f"/v1/images/{item.record.id}",
                    "attributes": item.record.attributes.to_dict(),
                    "scores": item.scores.to_dict(),
                }
                for item in ranked
            ],
        }

    @app.post("/v1/classifiers", status_code=201)
    async def register_classifier(request: Request):
        body = await request.json()
        try:
            spec = ExtendedClassifierSpec(
                name=body.get("name", ""),
                labels=body.get("labels", []),
                selected_index=int(body.get("selected_index", 0)),
            )
        except TaxonomyError as exc:
            raise HTTPException(400, str(exc))
        try:
            session.register_classifier(spec)
        except KeyError:
            raise HTTPException(409, f"classifier {spec.name!r} already registered")
        return {"name": spec.name, "labels": list(spec.labels)}

    @app.get("/v1/classifiers")
    async def list_classifiers():
        return {
            name: {"labels": list(s.labels), "selected_index": s.selected_index}
            for name, s in session.classifiers.items()
        }

    @app.post("/v1/corpus/charts", status_code=201)
    async def add_chart(request: Request):
        img, body = await _read_image_payload(request)
        record_id = body.get("id")
        if not record_id:
            raise HTTPException(400, "missing record id")
        try:
            attributes = (
                AttributeSet.from_dict(body["labels"]) if body.get("labels") else None
            )
        except (ValueError, KeyError) as exc:
            raise HTTPException(400, f"bad labels: {exc}")
        try:
            if attributes is None:
                attributes = annotate(img, session.provider).attributes
            mask = session.provider.segment(img)
            image_path = session.upload_dir / f"{record_id}.png"
            image_path.write_bytes(img.to_png_bytes())
            record = ChartRecord(
                id=record_id,
                image_ref=str(image_path),
                attributes=attributes,
                embedding=session.provider.embed_image(img),
                color_vector=histogram_vector(img, mask),
                trend_feature=session.provider.trend_feature(img),
                source=body.get("source", "manual"),
            )
            snapshot = session.add_chart(record)
        except CorpusError as exc:
            raise HTTPException(409, str(exc))
        except (ProviderError, AnnotationError) as exc:
            raise HTTPException(502, str(exc))
        return {"id": record_id, "corpus_size": len(snapshot)}

    @app.get("/v1/corpus/stats")
    async def get_stats():
        if session.snapshot is None:
            raise HTTPException(409, "no corpus snapshot loaded")
        from chartseek.corpus import stats as corpus_stats

        return corpus_stats(session.snapshot)

    @app.post("/v1/corpus/reload")
    async def reload_corpus(request: Request):
        body = await request.json()
        path = body.get("path") or session.snapshot_path
        if not path:
            raise HTTPException(400, "no snapshot path given or remembered")
        try:
            snapshot = session.reload(path)
        except CorpusError as exc:
            raise HTTPException(400, f"cannot load snapshot: {exc}")
        return {"count": len(snapshot), "dim": snapshot.dim}

    @app.get("/v1/images/{record_id}")
    async def get_image(record_id: str):
        snapshot = session.snapshot
        record = snapshot.get(record_id) if snapshot is not None else None
        if record is None:
            raise HTTPException(404, f"unknown chart {record_id!r}")
        path = Path(record.image_ref)
        if not path.is_file():
            raise HTTPException(404, f"image for {record_id!r} not on disk")
        return FileResponse(path)

    return app
