"""FastAPI app implementing the provider wire protocol over a backend."""

from __future__ import annotations

import base64
import binascii
import threading

from fastapi import FastAPI, HTTPException, Request

from chartseek_sidecar.backend import Backend, BackendError, decode_png, encode_mask_rle


async def _image_from_body(body: dict):
    encoded = body.get("png_base64")
    if not encoded:
        raise HTTPException(400, "missing png_base64")
    try:
        blob = base64.b64decode(encoded, validate=True)
    except (binascii.Error, ValueError):
        raise HTTPException(400, "invalid base64")
    try:
        return decode_png(blob)
    except BackendError as exc:
        raise HTTPException(400, str(exc))


def create_app(backend: Backend) -> FastAPI:
    app = FastAPI(title="chartseek-sidecar", version="0.1.0")
    # single inference lock: model forward passes are not assumed
    # thread-safe; responses depend only on inputs, not arrival order
    lock = threading.Lock()

    def run(fn, *args):
        with lock:
            try:
                return fn(*args)
            except BackendError as exc:
                raise HTTPException(422, str(exc))

    @app.post("/embed/image")
    async def embed_image(request: Request):
        rgba = await _image_from_body(await request.json())
        values = run(backend.embed_image, rgba)
        return {"dim": backend.dim, "values": [float(x) for x in values]}

    @app.post("/embed/text")
    async def embed_text(request: Request):
        body = await request.json()
        text = body.get("text", "")
        values = run(backend.embed_text, text)
        return {"dim": backend.dim, "values": [float(x) for x in values]}

    @app.post("/zero_shot")
    async def zero_shot(request: Request):
        body = await request.json()
        rgba = await _image_from_body(body)
        labels = body.get("labels") or []
        if len(labels) < 2:
            raise HTTPException(400, "need at least 2 labels")
        logits = run(backend.zero_shot_logits, rgba, labels)
        return {"logits": [float(x) for x in logits]}

    @app.post("/classify")
    async def classify(request: Request):
        body = await request.json()
        rgba = await _image_from_body(body)
        kind = body.get("kind", "")
        label, confidence = run(backend.classify, rgba, kind)
        return {"label": label, "confidence": confidence}

    @app.post("/trend_feature")
    async def trend_feature(request: Request):
        rgba = await _image_from_body(await request.json())
        values = run(backend.trend_feature, rgba)
        return {"dim": backend.dim, "values": [float(x) for x in values]}

    @app.post("/segment")
    async def segment(request: Request):
        rgba = await _image_from_body(await request.json())
        mask = run(backend.segment, rgba)
        height, width = mask.shape
        return {"width": width, "height": height, "mask_rle": encode_mask_rle(mask)}

    return app
