"""Inference backends: a deterministic stub and a lazy real-model wrapper."""

from __future__ import annotations

import hashlib
import io
from typing import Protocol, Sequence

import numpy as np
from PIL import Image

from chartseek.taxonomy import ChartType, KIND_CLASSES

DEFAULT_DIM = 512

TAXONOMY_LABELS: dict[str, list[str]] = {
    "type": [t.value for t in ChartType],
    **{kind: [v.value for v in enum] for kind, enum in KIND_CLASSES.items()},
}


class BackendError(RuntimeError):
    pass


class Backend(Protocol):
    dim: int

    def embed_image(self, rgba: np.ndarray) -> np.ndarray: ...

    def embed_text(self, text: str) -> np.ndarray: ...

    def zero_shot_logits(self, rgba: np.ndarray, labels: Sequence[str]) -> np.ndarray: ...

    def classify(self, rgba: np.ndarray, kind: str) -> tuple[str, float]: ...

    def trend_feature(self, rgba: np.ndarray) -> np.ndarray: ...

    def segment(self, rgba: np.ndarray) -> np.ndarray: ...


def decode_png(blob: bytes) -> np.ndarray:
    try:
        with Image.open(io.BytesIO(blob)) as im:
            return np.asarray(im.convert("RGBA"), dtype=np.uint8)
    except Exception as exc:
        raise BackendError(f"cannot decode image: {exc}") from exc


def _unit(v: np.ndarray) -> np.ndarray:
    norm = float(np.linalg.norm(v))
    if norm == 0.0:
        raise BackendError("zero-norm vector")
    return v / norm


class StubBackend:
    """Weightless backend: every answer is a unit vector drawn from a PRNG
    seeded with the SHA-256 of the input, so responses are stable across
    processes and runs."""

    def __init__(self, dim: int = DEFAULT_DIM):
        self.dim = int(dim)

    def _vector(self, domain: bytes, payload: bytes) -> np.ndarray:
        seed = int.from_bytes(hashlib.sha256(domain + payload).digest()[:8], "big")
        rng = np.random.default_rng(seed)
        return _unit(rng.standard_normal(self.dim))

    def embed_image(self, rgba: np.ndarray) -> np.ndarray:
        return self._vector(b"image:", rgba.tobytes())

    def embed_text(self, text: str) -> np.ndarray:
        if not text or not text.strip():
            raise BackendError("empty text")
        return self._vector(b"text:", text.strip().lower().encode("utf-8"))

    def zero_shot_logits(self, rgba: np.ndarray, labels: Sequence[str]) -> np.ndarray:
        emb = self.embed_image(rgba)
        return np.array(
            [self.dim * float(np.dot(emb, self.embed_text(label))) for label in labels]
        )

    def classify(self, rgba: np.ndarray, kind: str) -> tuple[str, float]:
        options = TAXONOMY_LABELS.get(kind)
        if options is None:
            raise BackendError(f"unknown classifier kind {kind!r}")
        seed = int.from_bytes(
            hashlib.sha256(b"classify:" + kind.encode() + b":" + rgba.tobytes()).digest()[:8],
            "big",
        )
        return options[seed % len(options)], 0.5

    def trend_feature(self, rgba: np.ndarray) -> np.ndarray:
        return self._vector(b"trend:", rgba.tobytes())

    def segment(self, rgba: np.ndarray) -> np.ndarray:
        # foreground = non-transparent pixels
        return (rgba[..., 3] > 0).astype(bool)


class ClipBackend:
    """Real-model backend. Encoders and classifier heads load on first use,
    so constructing the server never requires the weights up front. Any
    CLIP-class dual encoder satisfies the contract."""

    def __init__(
        self,
        dim: int = DEFAULT_DIM,
        model_name: str = "ViT-B-32",
        pretrained: str = "openai",
        device: str = "cpu",
        classifier_paths: dict[str, str] | None = None,
    ):
        self.dim = int(dim)
        self.model_name = model_name
        self.pretrained = pretrained
        self.device = device
        self.classifier_paths = dict(classifier_paths or {})
        self._model = None
        self._tokenizer = None
        self._preprocess = None
        self._heads: dict[str, np.ndarray] = {}

    def _load(self):
        if self._model is not None:
            return
        try:
            import open_clip
            import torch  # noqa: F401
        except ImportError as exc:
            raise BackendError(
                "model dependencies not installed; run with --stub or install "
                "the 'models' extra"
            ) from exc
        self._model, _, self._preprocess = open_clip.create_model_and_transforms(
            self.model_name, pretrained=self.pretrained, device=self.device
        )
        self._tokenizer = open_clip.get_tokenizer(self.model_name)
        self._model.eval()

    def _to_pil(self, rgba: np.ndarray):
        return Image.fromarray(rgba, mode="RGBA").convert("RGB")

    def embed_image(self, rgba: np.ndarray) -> np.ndarray:
        import torch

        self._load()
        batch = self._preprocess(self._to_pil(rgba)).unsqueeze(0).to(self.device)
        with torch.no_grad():
            feat = self._model.encode_image(batch)[0].cpu().numpy().astype(np.float64)
        return _unit(feat[: self.dim])

    def embed_text(self, text: str) -> np.ndarray:
        import torch

        if not text or not text.strip():
            raise BackendError("empty text")
        self._load()
        tokens = self._tokenizer([text]).to(self.device)
        with torch.no_grad():
            feat = self._model.encode_text(tokens)[0].cpu().numpy().astype(np.float64)
        return _unit(feat[: self.dim])

    def zero_shot_logits(self, rgba: np.ndarray, labels: Sequence[str]) -> np.ndarray:
        emb = self.embed_image(rgba)
        return np.array(
            [self.dim * float(np.dot(emb, self.embed_text(label))) for label in labels]
        )

    def _head(self, kind: str) -> np.ndarray:
        if kind not in self._heads:
            path = self.classifier_paths.get(kind)
            if path is None:
                raise BackendError(f"no classifier weights configured for {kind!r}")
            self._heads[kind] = np.load(path)
        return self._heads[kind]

    def classify(self, rgba: np.ndarray, kind: str) -> tuple[str, float]:
        options = TAXONOMY_LABELS.get(kind)
        if options is None:
            raise BackendError(f"unknown classifier kind {kind!r}")
        weights = self._head(kind)  # (dim, n_classes)
        logits = self.embed_image(rgba) @ weights
        if logits.shape != (len(options),):
            raise BackendError(
                f"{kind} head emits {logits.shape[0]} outputs, taxonomy has {len(options)}"
            )
        probs = np.exp(logits - logits.max())
        probs /= probs.sum()
        idx = int(np.argmax(probs))
        return options[idx], float(probs[idx])

    def trend_feature(self, rgba: np.ndarray) -> np.ndarray:
        # shares the image encoder; the trend head sees the same features
        return self.embed_image(rgba)

    def segment(self, rgba: np.ndarray) -> np.ndarray:
        # without a dedicated segmentation model, treat opaque non-white
        # pixels as foreground
        opaque = rgba[..., 3] > 0
        non_white = rgba[..., :3].astype(int).sum(axis=-1) < 3 * 250
        return (opaque & non_white).astype(bool)


def encode_mask_rle(mask: np.ndarray) -> list[int]:
    """Row-major run lengths, alternating and starting with a false run."""
    flat = np.asarray(mask, dtype=bool).ravel()
    runs: list[int] = []
    current = False
    count = 0
    for bit in flat:
        if bit == current:
            count += 1
        else:
            runs.append(count)
            current = bool(bit)
            count = 1
    runs.append(count)
    return runs
