import json

import pytest
from hypothesis import given, strategies as st

from chartseek.taxonomy import (
    ATTRIBUTE_KINDS,
    AttributeSelection,
    AttributeSet,
    ChartType,
    ColormapClass,
    ExtendedClassifierSpec,
    LayoutClass,
    TaxonomyError,
    TrendClass,
    applicable_attributes,
    attribute_match,
    load_applicability,
    validate_attribute_set,
)

from conftest import random_attribute_set


def test_chart_type_has_exactly_18_variants():
    assert len(ChartType) == 18


@pytest.mark.parametrize("enum_cls", [ColormapClass, TrendClass, LayoutClass])
def test_three_way_attributes(enum_cls):
    assert len(enum_cls) == 3


@pytest.mark.parametrize("enum_cls", [ChartType, ColormapClass, TrendClass, LayoutClass])
def test_string_round_trip(enum_cls):
    for variant in enum_cls:
        assert enum_cls(variant.value) is variant


def test_applicability_examples():
    assert applicable_attributes(ChartType.HEATMAP) == {"color"}
    assert applicable_attributes(ChartType.SCATTER) == {"color", "trend"}
    assert applicable_attributes(ChartType.BAR) == {"color", "trend", "layout"}


def test_applicability_covers_all_types():
    for t in ChartType:
        kinds = applicable_attributes(t)
        assert kinds <= set(ATTRIBUTE_KINDS)
        assert "color" in kinds  # every chart has a colormap


def test_load_applicability_overrides(tmp_path):
    cfg = tmp_path / "applicability.json"
    cfg.write_text(json.dumps({"heatmap": ["color", "layout"]}))
    table = load_applicability(cfg)
    assert table[ChartType.HEATMAP] == {"color", "layout"}
    assert table[ChartType.BAR] == {"color", "trend", "layout"}  # default kept


def test_load_applicability_rejects_unknown_kind(tmp_path):
    cfg = tmp_path / "bad.json"
    cfg.write_text(json.dumps({"bar": ["sparkle"]}))
    with pytest.raises(TaxonomyError):
        load_applicability(cfg)


def test_attribute_match_examples():
    a = AttributeSet(
        type=ChartType.BAR,
        color=ColormapClass.CATEGORICAL,
        trend=TrendClass.INCREASING,
        layout=LayoutClass.HORIZONTAL,
    )
    assert attribute_match(a, AttributeSelection(type=ChartType.BAR, layout=LayoutClass.HORIZONTAL))
    assert not attribute_match(a, AttributeSelection(type=ChartType.LINE))
    assert attribute_match(a, AttributeSelection())


def test_attribute_match_extended():
    a = AttributeSet(type=ChartType.BAR, extended={"style": "3D style"})
    assert attribute_match(a, AttributeSelection(extended_name="style", extended_label="3D style"))
    assert not attribute_match(a, AttributeSelection(extended_name="style", extended_label="Flat style"))
    assert not attribute_match(a, AttributeSelection(extended_name="bg", extended_label="3D style"))


def test_extended_classifier_spec_validation():
    spec = ExtendedClassifierSpec("style", ["3D style", "Flat style"], 1)
    assert spec.selected_label == "Flat style"
    with pytest.raises(TaxonomyError):
        ExtendedClassifierSpec("style", ["only one"])
    with pytest.raises(TaxonomyError):
        ExtendedClassifierSpec("style", ["a", "a"])
    with pytest.raises(TaxonomyError):
        ExtendedClassifierSpec("style", ["a", "b"], 2)
    with pytest.raises(TaxonomyError):
        ExtendedClassifierSpec("", ["a", "b"])


def test_validate_attribute_set():
    validate_attribute_set(AttributeSet(type=ChartType.HEATMAP, color=ColormapClass.SEQUENTIAL))
    with pytest.raises(TaxonomyError):
        validate_attribute_set(
            AttributeSet(type=ChartType.HEATMAP, color=ColormapClass.SEQUENTIAL, trend=TrendClass.MIXED)
        )
    with pytest.raises(TaxonomyError):
        validate_attribute_set(AttributeSet(type=ChartType.BAR, color=ColormapClass.CATEGORICAL))


def test_attribute_set_dict_round_trip(rng):
    for _ in range(50):
        a = random_attribute_set(rng)
        assert AttributeSet.from_dict(a.to_dict()) == a


_seed = st.integers(min_value=0, max_value=2**31 - 1)


@given(_seed)
def test_self_selection_always_matches(seed):
    import numpy as np

    a = random_attribute_set(np.random.default_rng(seed))
    sel = AttributeSelection(type=a.type, color=a.color, trend=a.trend, layout=a.layout)
    assert attribute_match(a, sel)
    # and every sub-selection of a's own values also matches
    assert attribute_match(a, AttributeSelection(type=a.type))
    assert attribute_match(a, AttributeSelection(color=a.color, trend=a.trend))


@given(_seed, _seed)
def test_adding_constraints_is_monotone(seed_a, seed_sel):
    import numpy as np

    a = random_attribute_set(np.random.default_rng(seed_a))
    other = random_attribute_set(np.random.default_rng(seed_sel))
    weak = AttributeSelection(type=other.type)
    strong = AttributeSelection(type=other.type, color=other.color, trend=other.trend)
    # strengthening a selection can never turn a non-match into a match
    if not attribute_match(a, weak):
        assert not attribute_match(a, strong)
