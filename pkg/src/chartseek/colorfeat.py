"""Deterministic color pipeline.

Masked pixels are quantized to a coarse palette, colors covering less than
10% of the content are pruned as noise, and the surviving proportional
palette is turned into a 384-entry color vector (128-bin histograms for R,
G, B concatenated) used by the color similarity sub-score.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image

from chartseek.numerics import cosine_similarity, to_unit_interval

PRUNE_SHARE = 0.10
QUANT_BITS = 4  # uniform quantization cells per channel: 2**QUANT_BITS
BINS_PER_CHANNEL = 128
COLOR_VECTOR_LEN = 3 * BINS_PER_CHANNEL


class ColorFeatError(ValueError):
    pass


@dataclass(frozen=True)
class RasterImage:
    """RGBA bitmap, 8 bits per channel, row-major."""

    width: int
    height: int
    data: bytes

    def __post_init__(self):
        if self.width <= 0 or self.height <= 0:
            raise ColorFeatError(f"invalid dimensions {self.width}x{self.height}")
        if len(self.data) != 4 * self.width * self.height:
            raise ColorFeatError(
                f"expected {4 * self.width * self.height} bytes, got {len(self.data)}"
            )

    def to_array(self) -> np.ndarray:
        return np.frombuffer(self.data, dtype=np.uint8).reshape(self.height, self.width, 4)

    @classmethod
    def from_array(cls, arr: np.ndarray) -> "RasterImage":
        arr = np.asarray(arr, dtype=np.uint8)
        if arr.ndim != 3 or arr.shape[2] != 4:
            raise ColorFeatError(f"expected HxWx4 array, got shape {arr.shape}")
        return cls(width=arr.shape[1], height=arr.shape[0], data=arr.tobytes())

    @classmethod
    def from_pil(cls, im: Image.Image) -> "RasterImage":
        return cls.from_array(np.asarray(im.convert("RGBA")))

    @classmethod
    def from_file(cls, path: str | Path) -> "RasterImage":
        with Image.open(path) as im:
            return cls.from_pil(im)

    @classmethod
    def from_bytes(cls, blob: bytes) -> "RasterImage":
        import io

        with Image.open(io.BytesIO(blob)) as im:
            return cls.from_pil(im)

    def to_png_bytes(self) -> bytes:
        import io

        buf = io.BytesIO()
        Image.fromarray(self.to_array(), mode="RGBA").save(buf, format="PNG")
        return buf.getvalue()


@dataclass(frozen=True)
class ForegroundMask:
    """Boolean chart-content mask paired with an image of the same size."""

    width: int
    height: int
    data: bytes  # one byte per pixel, 0 or 1, row-major

    def __post_init__(self):
        if len(self.data) != self.width * self.height:
            raise ColorFeatError("mask size does not match dimensions")

    def to_array(self) -> np.ndarray:
        return np.frombuffer(self.data, dtype=np.uint8).reshape(self.height, self.width).astype(bool)

    @classmethod
    def from_array(cls, arr: np.ndarray) -> "ForegroundMask":
        arr = np.asarray(arr, dtype=bool)
        return cls(width=arr.shape[1], height=arr.shape[0], data=arr.astype(np.uint8).tobytes())

    @classmethod
    def all_true(cls, width: int, height: int) -> "ForegroundMask":
        return cls(width=width, height=height, data=b"\x01" * (width * height))


@dataclass(frozen=True)
class Palette:
    """Pruned proportional palette: (rgb, proportion) in descending share."""

    colors: tuple[tuple[float, float, float], ...]
    proportions: tuple[float, ...]

    def __post_init__(self):
        if len(self.colors) != len(self.proportions):
            raise ColorFeatError("colors and proportions must align")

    def to_list(self) -> list[dict]:
        return [
            {"rgb": [round(c, 4) for c in rgb], "proportion": p}
            for rgb, p in zip(self.colors, self.proportions)
        ]


def _masked_pixels(img: RasterImage, mask: ForegroundMask) -> np.ndarray:
    if (mask.width, mask.height) != (img.width, img.height):
        raise ColorFeatError(
            f"mask {mask.width}x{mask.height} does not match image {img.width}x{img.height}"
        )
    arr = img.to_array().reshape(-1, 4)
    keep = mask.to_array().reshape(-1) & (arr[:, 3] > 0)
    return arr[keep, :3]


def extract_palette(img: RasterImage, mask: ForegroundMask) -> Palette:
    """Quantize masked-in non-transparent pixels, drop colors under the 10%
    share threshold, and renormalize the survivors.

    Quantization is uniform at 4 bits per channel; each surviving cell is
    represented by the mean RGB of its pixels.
    """
    px = _masked_pixels(img, mask)
    if px.shape[0] == 0:
        raise ColorFeatError("no masked-in, non-transparent pixels")
    shift = 8 - QUANT_BITS
    q = px >> shift
    cells = (q[:, 0].astype(np.int64) << (2 * QUANT_BITS)) | (
        q[:, 1].astype(np.int64) << QUANT_BITS
    ) | q[:, 2].astype(np.int64)
    n_cells = 1 << (3 * QUANT_BITS)
    counts = np.bincount(cells, minlength=n_cells)
    shares = counts / px.shape[0]
    survivors = np.flatnonzero(shares >= PRUNE_SHARE)
    if survivors.size == 0:
        raise ColorFeatError("all quantized colors fell under the 10% threshold")
    sums = np.zeros((n_cells, 3), dtype=np.float64)
    np.add.at(sums, cells, px.astype(np.float64))
    means = sums[survivors] / counts[survivors, None]
    props = shares[survivors]
    props = props / props.sum()
    order = np.lexsort((survivors, -props))
    return Palette(
        colors=tuple(tuple(float(c) for c in means[i]) for i in order),
        proportions=tuple(float(props[i]) for i in order),
    )


def histogram_from_palette(palette: Palette) -> np.ndarray:
    """384-entry color vector: per-channel 128-bin histograms of the palette
    colors weighted by their proportions, concatenated R then G then B."""
    if not palette.colors:
        raise ColorFeatError("empty palette")
    vec = np.zeros(COLOR_VECTOR_LEN, dtype=np.float64)
    for rgb, p in zip(palette.colors, palette.proportions):
        for ch in range(3):
            b = int(rgb[ch] // 2)
            b = min(b, BINS_PER_CHANNEL - 1)
            vec[ch * BINS_PER_CHANNEL + b] += p
    return vec


def histogram_vector(img: RasterImage, mask: ForegroundMask) -> np.ndarray:
    return histogram_from_palette(extract_palette(img, mask))


def color_similarity(vq: np.ndarray, vc: np.ndarray) -> float:
    """Cosine similarity between two color vectors, mapped to [0, 1]."""
    vq = np.asarray(vq, dtype=np.float64)
    vc = np.asarray(vc, dtype=np.float64)
    if vq.shape != (COLOR_VECTOR_LEN,) or vc.shape != (COLOR_VECTOR_LEN,):
        raise ColorFeatError(f"color vectors must have length {COLOR_VECTOR_LEN}")
    return to_unit_interval(cosine_similarity(vq, vc))
