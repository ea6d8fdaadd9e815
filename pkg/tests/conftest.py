import numpy as np
import pytest

from chartseek.colorfeat import ForegroundMask, RasterImage
from chartseek.corpus import ChartRecord, CorpusSnapshot
from chartseek.embedding import MockProvider
from chartseek.numerics import l2_normalize
from chartseek.taxonomy import (
    ATTRIBUTE_KINDS,
    AttributeSet,
    ChartType,
    KIND_CLASSES,
    applicable_attributes,
)


def solid_image(width, height, rgb, alpha=255):
    arr = np.zeros((height, width, 4), dtype=np.uint8)
    arr[..., 0], arr[..., 1], arr[..., 2] = rgb
    arr[..., 3] = alpha
    return RasterImage.from_array(arr)


def noise_image(rng, width=16, height=12):
    # Draw each pixel from a small palette so the quantized color cells stay
    # above the 10% pruning threshold.
    palette = np.array(
        [[200, 40, 40], [40, 170, 60], [40, 80, 200], [230, 200, 50]], dtype=np.uint8
    )
    idx = rng.integers(0, len(palette), size=(height, width))
    arr = np.empty((height, width, 4), dtype=np.uint8)
    arr[..., :3] = palette[idx]
    arr[..., 3] = 255
    return RasterImage.from_array(arr)


def full_mask(img):
    return ForegroundMask.all_true(img.width, img.height)


def random_attribute_set(rng):
    ctype = list(ChartType)[int(rng.integers(len(ChartType)))]
    applicable = applicable_attributes(ctype)
    values = {}
    for kind in ATTRIBUTE_KINDS:
        if kind in applicable:
            options = list(KIND_CLASSES[kind])
            values[kind] = options[int(rng.integers(len(options)))]
    return AttributeSet(type=ctype, **values)


def random_record(rng, rid, dim=16, with_trend=True):
    color = np.abs(rng.random(384))
    return ChartRecord(
        id=rid,
        image_ref=f"mem:{rid}",
        attributes=random_attribute_set(rng),
        embedding=l2_normalize(rng.standard_normal(dim)),
        color_vector=color / color.sum() * 3.0,
        trend_feature=l2_normalize(rng.standard_normal(dim)) if with_trend else None,
        source="synthetic",
    )


def random_snapshot(rng, n, dim=16):
    return CorpusSnapshot([random_record(rng, f"c{i:05d}", dim) for i in range(n)], dim=dim)


@pytest.fixture
def mock_provider():
    return MockProvider(dim=16)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    """One pass/fail line per acceptance criterion."""
    lines = []
    for outcome in ("passed", "failed", "error"):
        for rep in terminalreporter.getreports(outcome):
            if "test_acceptance.py" not in rep.nodeid or rep.when != "call":
                continue
            name = rep.nodeid.split("::")[-1].replace("test_criterion_", "")
            lines.append((name, "PASS" if rep.passed else "FAIL"))
    if lines:
        terminalreporter.section("acceptance criteria")
        for name, status in sorted(lines):
            terminalreporter.write_line(f"{status}  {name}")
