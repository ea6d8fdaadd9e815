"""Chart corpus: records with precomputed features, immutable snapshots,
and a lossless two-file persistence format.

A snapshot saves as a line-delimited manifest (one JSON object per record,
first line a header) plus a companion binary file holding every feature as
little-endian float32 in record order. Features are stored as float32 from
ingestion onward, so save/load round-trips are bit-exact.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Optional, Sequence

import numpy as np

from chartseek.annotation import annotate
from chartseek.colorfeat import COLOR_VECTOR_LEN, RasterImage, histogram_vector
from chartseek.embedding import Provider
from chartseek.taxonomy import AttributeSet, ExtendedClassifierSpec

FORMAT_NAME = "chartseek-corpus"
FORMAT_VERSION = 1
SOURCES = ("beagle", "manual", "synthetic")


class CorpusError(ValueError):
    pass


def _as_feature(values, length: int | None, what: str) -> np.ndarray:
    arr = np.ascontiguousarray(np.asarray(values, dtype=np.float32))
    if arr.ndim != 1:
        raise CorpusError(f"{what} must be a vector")
    if length is not None and arr.shape[0] != length:
        raise CorpusError(f"{what} must have length {length}, got {arr.shape[0]}")
    return arr


@dataclass(frozen=True)
class ChartRecord:
    """One corpus chart with its precomputed features (float32)."""

    id: str
    image_ref: str
    attributes: AttributeSet
    embedding: np.ndarray
    color_vector: np.ndarray
    trend_feature: Optional[np.ndarray] = None
    source: str = "manual"
    metadata: Mapping[str, str] = field(default_factory=dict)

    def __post_init__(self):
        if not self.id:
            raise CorpusError("record id must be nonempty")
        if self.source not in SOURCES:
            raise CorpusError(f"source must be one of {SOURCES}, got {self.source!r}")
        object.__setattr__(self, "embedding", _as_feature(self.embedding, None, "embedding"))
        object.__setattr__(
            self, "color_vector", _as_feature(self.color_vector, COLOR_VECTOR_LEN, "color_vector")
        )
        if self.trend_feature is not None:
            object.__setattr__(
                self, "trend_feature", _as_feature(self.trend_feature, None, "trend_feature")
            )


class CorpusSnapshot:
    """Read-only, ordered collection of chart records with a fixed dim."""

    def __init__(self, records: Sequence[ChartRecord], dim: int, created: str = ""):
        records = tuple(records)
        seen: set[str] = set()
        for r in records:
            if r.id in seen:
                raise CorpusError(f"duplicate record id {r.id!r}")
            seen.add(r.id)
            if r.embedding.shape[0] != dim:
                raise CorpusError(
                    f"record {r.id!r} embedding dim {r.embedding.shape[0]} != corpus dim {dim}"
                )
            if r.trend_feature is not None and r.trend_feature.shape[0] != dim:
                raise CorpusError(f"record {r.id!r} trend feature dim mismatch")
        self._records = records
        self._by_id = {r.id: r for r in records}
        self.dim = dim
        self.created = created

    @property
    def records(self) -> tuple[ChartRecord, ...]:
        return self._records

    def __len__(self) -> int:
        return len(self._records)

    def __iter__(self):
        return iter(self._records)

    def get(self, record_id: str) -> Optional[ChartRecord]:
        return self._by_id.get(record_id)

    def type_counts(self) -> dict[str, int]:
        counts: dict[str, int] = {}
        for r in self._records:
            counts[r.attributes.type.value] = counts.get(r.attributes.type.value, 0) + 1
        return counts

    def save(self, path: str | Path) -> None:
        path = Path(path)
        feat_path = path.with_suffix(path.suffix + ".feat")
        chunks: list[bytes] = []
        offset = 0
        lines: list[str] = []
        header = {
            "format": FORMAT_NAME,
            "version": FORMAT_VERSION,
            "dim": self.dim,
            "created": self.created,
            "count": len(self._records),
        }
        lines.append(json.dumps(header, separators=(",", ":")))
        for r in self._records:
            feats: dict[str, list[int] | None] = {}
            for name, arr in (
                ("embedding", r.embedding),
                ("color", r.color_vector),
                ("trend", r.trend_feature),
            ):
                if arr is None:
                    feats[name] = None
                    continue
                raw = arr.astype("<f4", copy=False).tobytes()
                chunks.append(raw)
                feats[name] = [offset, arr.shape[0]]
                offset += arr.shape[0]
            line = {
                "id": r.id,
                "image_ref": r.image_ref,
                "attributes": r.attributes.to_dict(),
                "source": r.source,
                "metadata": dict(r.metadata),
                "feat": feats,
            }
            lines.append(json.dumps(line, separators=(",", ":"), sort_keys=True))
        path.write_text("\n".join(lines) + "\n", encoding="utf-8")
        feat_path.write_bytes(b"".join(chunks))

    @classmethod
    def load(cls, path: str | Path) -> "CorpusSnapshot":
        path = Path(path)
        feat_path = path.with_suffix(path.suffix + ".feat")
        try:
            text = path.read_text(encoding="utf-8")
            blob = feat_path.read_bytes()
        except OSError as exc:
            raise CorpusError(f"cannot read snapshot: {exc}") from exc
        lines = [ln for ln in text.splitlines() if ln.strip()]
        if not lines:
            raise CorpusError("empty manifest")
        try:
            header = json.loads(lines[0])
        except json.JSONDecodeError as exc:
            raise CorpusError(f"corrupt manifest header: {exc}") from exc
        if header.get("format") != FORMAT_NAME:
            raise CorpusError(f"not a {FORMAT_NAME} file")
        if header.get("version") != FORMAT_VERSION:
            raise CorpusError(f"unsupported version {header.get('version')}")
        if len(lines) - 1 != header.get("count"):
            raise CorpusError(
                f"manifest truncated: {len(lines) - 1} records, header says {header.get('count')}"
            )
        floats = np.frombuffer(blob, dtype="<f4")

        def slice_feat(ref) -> Optional[np.ndarray]:
            if ref is None:
                return None
            off, length = ref
            if off + length > floats.shape[0]:
                raise CorpusError("feature file truncated")
            return floats[off : off + length].copy()

        records = []
        for ln in lines[1:]:
            try:
                obj = json.loads(ln)
            except json.JSONDecodeError as exc:
                raise CorpusError(f"corrupt manifest line: {exc}") from exc
            records.append(
                ChartRecord(
                    id=obj["id"],
                    image_ref=obj["image_ref"],
                    attributes=AttributeSet.from_dict(obj["attributes"]),
                    embedding=slice_feat(obj["feat"]["embedding"]),
                    color_vector=slice_feat(obj["feat"]["color"]),
                    trend_feature=slice_feat(obj["feat"]["trend"]),
                    source=obj.get("source", "manual"),
                    metadata=obj.get("metadata", {}),
                )
            )
        return cls(records, dim=header["dim"], created=header.get("created", ""))


def stats(snapshot: CorpusSnapshot) -> dict:
    """Per-type and per-attribute-value counts."""
    by_type = snapshot.type_counts()
    by_attr: dict[str, dict[str, int]] = {"color": {}, "trend": {}, "layout": {}}
    for r in snapshot:
        for kind in by_attr:
            value = r.attributes.get(kind)
            if value is not None:
                by_attr[kind][value.value] = by_attr[kind].get(value.value, 0) + 1
    return {
        "total": len(snapshot),
        "dim": snapshot.dim,
        "created": snapshot.created,
        "by_type": dict(sorted(by_type.items())),
        "by_attribute": {k: dict(sorted(v.items())) for k, v in by_attr.items()},
    }


class CorpusBuilder:
    """Accumulates records (from images or precomputed features) and builds
    an immutable snapshot. Building never mutates previous snapshots."""

    def __init__(self, provider: Provider, dim: Optional[int] = None):
        self.provider = provider
        self.dim = dim if dim is not None else provider.dim
        self._records: list[ChartRecord] = []
        self._ids: set[str] = set()

    def add_record(self, record: ChartRecord) -> ChartRecord:
        if record.id in self._ids:
            raise CorpusError(f"duplicate record id {record.id!r}")
        if record.embedding.shape[0] != self.dim:
            raise CorpusError(
                f"embedding dim {record.embedding.shape[0]} != corpus dim {self.dim}"
            )
        self._ids.add(record.id)
        self._records.append(record)
        return record

    def ingest_image(
        self,
        record_id: str,
        img: RasterImage,
        image_ref: str,
        source: str = "manual",
        attributes: Optional[AttributeSet] = None,
        extended: Sequence[ExtendedClassifierSpec] = (),
        metadata: Optional[Mapping[str, str]] = None,
    ) -> ChartRecord:
        """Annotate (unless labels are supplied), embed, and store a chart."""
        if record_id in self._ids:
            raise CorpusError(f"duplicate record id {record_id!r}")
        if attributes is None:
            result = annotate(img, self.provider, extended=extended)
            attributes = result.attributes
            mask = result.mask
        else:
            mask = self.provider.segment(img)
        record = ChartRecord(
            id=record_id,
            image_ref=image_ref,
            attributes=attributes,
            embedding=self.provider.embed_image(img),
            color_vector=histogram_vector(img, mask),
            trend_feature=self.provider.trend_feature(img),
            source=source,
            metadata=metadata or {},
        )
        return self.add_record(record)

    def build(self, created: str = "") -> CorpusSnapshot:
        return CorpusSnapshot(list(self._records), dim=self.dim, created=created)


def from_records(records: Iterable[ChartRecord], dim: int, created: str = "") -> CorpusSnapshot:
    return CorpusSnapshot(list(records), dim=dim, created=created)
