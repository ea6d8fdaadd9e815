"""Provider contract for every learned function in the pipeline.

A provider supplies image/text encoders, zero-shot logits, the four primary
attribute classifiers, the trend-feature extractor, and segmentation. Two
implementations ship here: a deterministic in-process mock (fixtures plus a
hash-seeded PRNG fallback) and an HTTP client speaking the wire protocol.
Both satisfy the same contracts; the conformance tests run against both.
"""

from __future__ import annotations

import base64
import hashlib
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Protocol, Sequence

import numpy as np

from chartseek.colorfeat import ForegroundMask, RasterImage
from chartseek.numerics import cosine_similarity, l2_normalize
from chartseek.taxonomy import ATTRIBUTE_KINDS, ChartType, KIND_CLASSES

DEFAULT_DIM = 512
PRIMARY_KINDS = ("type",) + ATTRIBUTE_KINDS


class ProviderError(RuntimeError):
    pass


class Provider(Protocol):
    """Operations every provider must implement."""

    dim: int

    def embed_image(self, img: RasterImage) -> np.ndarray: ...

    def embed_text(self, prompt: str) -> np.ndarray: ...

    def zero_shot_logits(self, img: RasterImage, labels: Sequence[str]) -> np.ndarray: ...

    def classify_primary(self, img: RasterImage, kind: str) -> tuple[str, float]: ...

    def trend_feature(self, img: RasterImage) -> np.ndarray: ...

    def segment(self, img: RasterImage) -> ForegroundMask: ...


def fuse(fi: np.ndarray, ft: np.ndarray) -> np.ndarray:
    """Elementwise mean of an image feature and a text feature.

    Deliberately not re-normalized; a cancellation producing a zero vector
    surfaces later as a zero-norm error in cosine similarity.
    """
    fi = np.asarray(fi, dtype=np.float64)
    ft = np.asarray(ft, dtype=np.float64)
    if fi.shape != ft.shape:
        raise ProviderError(f"dimension mismatch: {fi.shape} vs {ft.shape}")
    return (fi + ft) / 2.0


def _labels_for_kind(kind: str) -> list[str]:
    if kind == "type":
        return [t.value for t in ChartType]
    if kind in KIND_CLASSES:
        return [v.value for v in KIND_CLASSES[kind]]
    raise ProviderError(f"unknown classifier kind {kind!r}")


def _check_labels(labels: Sequence[str]) -> list[str]:
    labels = list(labels)
    if len(labels) < 2:
        raise ProviderError("zero-shot needs at least 2 labels")
    if len(set(labels)) != len(labels):
        raise ProviderError("duplicate labels")
    return labels


def _validated(values: np.ndarray, dim: int) -> np.ndarray:
    values = np.asarray(values, dtype=np.float64)
    if values.shape != (dim,):
        raise ProviderError(f"expected dim {dim}, got shape {values.shape}")
    if not np.all(np.isfinite(values)):
        raise ProviderError("non-finite values in embedding")
    return l2_normalize(values)


def normalize_text_key(text: str) -> str:
    return text.strip().lower()


class MockProvider:
    """Deterministic provider with zero ML dependencies.

    Known inputs resolve through a fixture table; anything else falls back
    to a vector drawn from a PRNG seeded with the SHA-256 of the input
    bytes, so two runs are byte-identical.

    Fixture layout (JSON)::

        {
          "dim": 512,
          "images": {
            "bar_A": {"embedding": [...], "trend": [...],
                       "labels": {"type": "bar", "color": "categorical"},
                       "confidence": 0.99}
          },
          "texts": {"fancy style": [...]},
          "image_keys": {"<sha256 of RGBA bytes>": "bar_A"}
        }
    """

    def __init__(self, dim: int = DEFAULT_DIM, fixture: dict | str | Path | None = None):
        if isinstance(fixture, (str, Path)):
            with open(fixture, "r", encoding="utf-8") as fh:
                fixture = json.load(fh)
        fixture = fixture or {}
        self.dim = int(fixture.get("dim", dim))
        self._images: dict[str, dict] = dict(fixture.get("images", {}))
        self._texts: dict[str, list[float]] = {
            normalize_text_key(k): v for k, v in fixture.get("texts", {}).items()
        }
        self._image_keys: dict[str, str] = dict(fixture.get("image_keys", {}))

    def register_image(self, name: str, img: RasterImage, entry: dict | None = None) -> None:
        """Bind an image's content hash to a fixture entry name."""
        self._image_keys[_sha_hex(img.data)] = name
        if entry is not None:
            self._images[name] = entry

    def _image_entry(self, img: RasterImage) -> Optional[dict]:
        key = self._image_keys.get(_sha_hex(img.data))
        if key is None:
            return None
        return self._images.get(key)

    def _hash_vector(self, domain: bytes, payload: bytes) -> np.ndarray:
        seed = int.from_bytes(hashlib.sha256(domain + payload).digest()[:8], "big")
        rng = np.random.default_rng(seed)
        return l2_normalize(rng.standard_normal(self.dim))

    def embed_image(self, img: RasterImage) -> np.ndarray:
        entry = self._image_entry(img)
        if entry is not None and "embedding" in entry:
            return _validated(np.asarray(entry["embedding"]), self.dim)
        return self._hash_vector(b"image:", img.data)

    def embed_text(self, prompt: str) -> np.ndarray:
        if not prompt or not prompt.strip():
            raise ProviderError("empty text prompt")
        key = normalize_text_key(prompt)
        if key in self._texts:
            return _validated(np.asarray(self._texts[key]), self.dim)
        return self._hash_vector(b"text:", key.encode("utf-8"))

    def zero_shot_logits(self, img: RasterImage, labels: Sequence[str]) -> np.ndarray:
        labels = _check_labels(labels)
        fi = self.embed_image(img)
        # Scaled by dim so the downstream softmax is not near-uniform.
        return np.array(
            [self.dim * cosine_similarity(fi, self.embed_text(lab)) for lab in labels],
            dtype=np.float64,
        )

    def classify_primary(self, img: RasterImage, kind: str) -> tuple[str, float]:
        options = _labels_for_kind(kind)
        entry = self._image_entry(img)
        if entry is not None:
            label = entry.get("labels", {}).get(kind)
            if label is not None:
                if label not in options:
                    raise ProviderError(f"fixture label {label!r} is not a {kind} label")
                return label, float(entry.get("confidence", 0.99))
        seed = int.from_bytes(
            hashlib.sha256(b"classify:" + kind.encode() + b":" + img.data).digest()[:8], "big"
        )
        return options[seed % len(options)], 0.5

    def trend_feature(self, img: RasterImage) -> np.ndarray:
        entry = self._image_entry(img)
        if entry is not None and "trend" in entry:
            return _validated(np.asarray(entry["trend"]), self.dim)
        return self._hash_vector(b"trend:", img.data)

    def segment(self, img: RasterImage) -> ForegroundMask:
        entry = self._image_entry(img)
        if entry is not None and "mask_rle" in entry:
            return decode_mask_rle(img.width, img.height, entry["mask_rle"])
        return ForegroundMask.all_true(img.width, img.height)


def _sha_hex(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def encode_mask_rle(mask: ForegroundMask) -> list[int]:
    """Row-major run lengths, alternating and starting with a false run."""
    flat = mask.to_array().reshape(-1)
    runs: list[int] = []
    current = False
    count = 0
    for v in flat:
        if bool(v) == current:
            count += 1
        else:
            runs.append(count)
            current = bool(v)
            count = 1
    runs.append(count)
    return runs


def decode_mask_rle(width: int, height: int, runs: Sequence[int]) -> ForegroundMask:
    flat = np.zeros(width * height, dtype=bool)
    pos = 0
    value = False
    for run in runs:
        if run:
            flat[pos : pos + run] = value
        pos += run
        value = not value
    if pos != width * height:
        raise ProviderError(f"mask RLE covers {pos} pixels, expected {width * height}")
    return ForegroundMask.from_array(flat.reshape(height, width))


class RemoteProvider:
    """HTTP+JSON client for an external model server.

    ``client`` may be any object with ``post(url, json=...)`` returning a
    response with ``status_code`` and ``json()`` (a requests session, an
    httpx client, or a FastAPI test client).
    """

    def __init__(self, endpoint: str, dim: int = DEFAULT_DIM, client=None):
        if not endpoint:
            raise ProviderError("remote provider requires an endpoint")
        self.endpoint = endpoint.rstrip("/")
        self.dim = dim
        if client is None:
            import requests

            client = requests.Session()
        self._client = client

    def _post(self, path: str, payload: dict) -> dict:
        try:
            resp = self._client.post(self.endpoint + path, json=payload)
        except Exception as exc:  # connection-level failure
            raise ProviderError(f"provider unreachable at {self.endpoint}{path}: {exc}") from exc
        if resp.status_code != 200:
            raise ProviderError(f"provider error {resp.status_code} at {path}")
        return resp.json()

    @staticmethod
    def _png_b64(img: RasterImage) -> str:
        return base64.b64encode(img.to_png_bytes()).decode("ascii")

    def embed_image(self, img: RasterImage) -> np.ndarray:
        out = self._post("/embed/image", {"png_base64": self._png_b64(img)})
        return _validated(np.asarray(out["values"]), self.dim)

    def embed_text(self, prompt: str) -> np.ndarray:
        if not prompt or not prompt.strip():
            raise ProviderError("empty text prompt")
        out = self._post("/embed/text", {"text": prompt})
        return _validated(np.asarray(out["values"]), self.dim)

    def zero_shot_logits(self, img: RasterImage, labels: Sequence[str]) -> np.ndarray:
        labels = _check_labels(labels)
        out = self._post("/zero_shot", {"png_base64": self._png_b64(img), "labels": labels})
        logits = np.asarray(out["logits"], dtype=np.float64)
        if logits.shape != (len(labels),):
            raise ProviderError("logit count does not match label count")
        return logits

    def classify_primary(self, img: RasterImage, kind: str) -> tuple[str, float]:
        options = _labels_for_kind(kind)
        out = self._post("/classify", {"png_base64": self._png_b64(img), "kind": kind})
        label = out["label"]
        if label not in options:
            raise ProviderError(f"remote returned label {label!r} outside the {kind} taxonomy")
        confidence = float(out.get("confidence", 0.0))
        if not 0.0 <= confidence <= 1.0:
            raise ProviderError(f"confidence {confidence} out of [0, 1]")
        return label, confidence

    def trend_feature(self, img: RasterImage) -> np.ndarray:
        out = self._post("/trend_feature", {"png_base64": self._png_b64(img)})
        return _validated(np.asarray(out["values"]), self.dim)

    def segment(self, img: RasterImage) -> ForegroundMask:
        out = self._post("/segment", {"png_base64": self._png_b64(img)})
        if (out["width"], out["height"]) != (img.width, img.height):
            raise ProviderError("segmentation mask dimensions do not match image")
        return decode_mask_rle(out["width"], out["height"], out["mask_rle"])


@dataclass(frozen=True)
class ProviderDescriptor:
    kind: str = "mock"  # mock | remote
    endpoint: Optional[str] = None
    dim: int = DEFAULT_DIM
    fixture: Optional[str] = None

    def __post_init__(self):
        if self.kind not in ("mock", "remote"):
            raise ProviderError(f"unknown provider kind {self.kind!r}")
        if self.kind == "remote" and not self.endpoint:
            raise ProviderError("remote provider requires an endpoint")

    def to_dict(self) -> dict:
        return {"kind": self.kind, "endpoint": self.endpoint, "dim": self.dim, "fixture": self.fixture}


def make_provider(desc: ProviderDescriptor) -> Provider:
    if desc.kind == "mock":
        return MockProvider(dim=desc.dim, fixture=desc.fixture)
    return RemoteProvider(endpoint=desc.endpoint, dim=desc.dim)
