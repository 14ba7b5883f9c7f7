import json
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from docforge.layout import (
    IdMismatch,
    ManifestSyntaxError,
    ManifestValidationError,
    ReadingOrder,
    SchemaError,
    dump_manifest,
    infer_reading_order,
    parse_manifest,
    reading_order_edit,
)
from docforge.model import Category, Page, Region

MINIMAL = {"pages": [{"page_id": "p1", "width": 100, "height": 100,
                      "regions": [{"id": "r1", "bbox": [0, 0, 10, 10], "category": "text"}]}]}


def manifest(**region_overrides):
    doc = json.loads(json.dumps(MINIMAL))
    doc["pages"][0]["regions"][0].update(region_overrides)
    return json.dumps(doc).encode()


def test_parse_minimal():
    ps = parse_manifest(json.dumps(MINIMAL).encode())
    assert len(ps.pages) == 1
    assert ps.pages[0].regions[0] == Region("r1", (0, 0, 10, 10), Category.TEXT)


def test_missing_bbox_is_schema_error():
    doc = json.loads(json.dumps(MINIMAL))
    del doc["pages"][0]["regions"][0]["bbox"]
    with pytest.raises(SchemaError) as err:
        parse_manifest(json.dumps(doc))
    assert err.value.path == "pages[0].regions[0].bbox"


def test_degenerate_bbox_is_validation_error():
    with pytest.raises(ManifestValidationError) as err:
        parse_manifest(manifest(bbox=[5, 5, 5, 9]))
    assert [v.kind for v in err.value.violations] == ["DegenerateBox"]


def test_syntax_error_position():
    with pytest.raises(ManifestSyntaxError) as err:
        parse_manifest(b'{"pages": [}')
    assert err.value.position == 11


def test_unknown_top_level_key_rejected():
    doc = dict(MINIMAL, extra=1)
    with pytest.raises(SchemaError):
        parse_manifest(json.dumps(doc))


@pytest.mark.parametrize("bbox", [[0, 0, 10], [0, 0, 10, 10.5], [0, 0, 10, True], "0,0,10,10"])
def test_bbox_shape(bbox):
    with pytest.raises(SchemaError):
        parse_manifest(manifest(bbox=bbox))


def test_unknown_category_maps_to_other(caplog):
    ps = parse_manifest(manifest(category="stamp"))
    assert ps.pages[0].regions[0].category is Category.OTHER
    assert "stamp" in caplog.text


def test_optional_fields_and_round_trip():
    raw = manifest(image="crops/r1.png", order=3)
    ps = parse_manifest(raw)
    assert ps.pages[0].regions[0].image_ref == "crops/r1.png"
    assert ps.pages[0].regions[0].order == 3
    canonical = dump_manifest(ps)
    assert dump_manifest(parse_manifest(canonical)) == canonical
    assert parse_manifest(canonical) == ps


def _page(*boxes, orders=None):
    regions = []
    for i, box in enumerate(boxes):
        order = orders[i] if orders else None
        regions.append(Region(f"r{i}", box, Category.TEXT, order=order))
    return Page("p", 200, 200, tuple(regions))


def test_explicit_order_wins():
    page = _page((0, 0, 10, 10), (0, 50, 10, 60), (0, 100, 10, 110), orders=[2, 0, 1])
    assert infer_reading_order(page).ordered_region_ids == ("r1", "r2", "r0")


def test_stacked_regions_top_first():
    page = _page((0, 100, 200, 150), (0, 10, 200, 60))
    assert infer_reading_order(page).ordered_region_ids == ("r1", "r0")


def test_two_columns():
    # Hand-run of the cut: y-projection [10,100] has no gap (right column rows
    # overlap the left column's gap), x-projection splits at 90..110, then each
    # column is cut horizontally.
    page = _page(
        (110, 80, 190, 100),  # right bottom
        (10, 60, 90, 100),  # left bottom
        (110, 10, 190, 70),  # right top
        (10, 10, 90, 50),  # left top
    )
    assert infer_reading_order(page).ordered_region_ids == ("r3", "r1", "r2", "r0")


def test_partial_orders_fall_back_to_geometry():
    page = _page((0, 100, 200, 150), (0, 10, 200, 60), orders=[0, None])
    assert infer_reading_order(page).ordered_region_ids == ("r1", "r0")


def test_gap_threshold():
    # A and B share a band that sits 1 px above C, and C spans both columns.
    a, b, c = (100, 0, 150, 50), (0, 10, 50, 50), (0, 51, 200, 100)
    # 1 px is below the default 2 px threshold: no cut anywhere, sort by y0
    assert infer_reading_order(_page(a, b, c)).ordered_region_ids == ("r0", "r1", "r2")
    # with a 1 px threshold the band is cut off and split into columns
    assert infer_reading_order(_page(a, b, c), min_gap=1).ordered_region_ids == ("r1", "r0", "r2")


boxes = st.tuples(
    st.integers(0, 190), st.integers(0, 190), st.integers(1, 60), st.integers(1, 60)
).map(lambda t: (t[0], t[1], min(200, t[0] + t[2]), min(200, t[1] + t[3])))


@settings(max_examples=200, deadline=None)
@given(st.lists(boxes, max_size=12))
def test_reading_order_is_a_deterministic_permutation(bs):
    page = _page(*bs)
    order = infer_reading_order(page)
    assert sorted(order.ordered_region_ids) == sorted(r.id for r in page.regions)
    assert infer_reading_order(page) == order


def test_reading_order_edit_examples():
    assert reading_order_edit(["a", "b"], ["a", "b"]) == 0.0
    assert reading_order_edit(["r1", "r2"], ["r2", "r1"]) == 1.0
    assert reading_order_edit(["a", "b", "c", "d"], ["a", "c", "b", "d"]) == 0.5
    assert reading_order_edit(ReadingOrder("p", ()), ReadingOrder("p", ())) == 0.0


def test_reading_order_edit_id_mismatch():
    with pytest.raises(IdMismatch):
        reading_order_edit(["a", "b"], ["a", "c"])


@given(st.permutations(list("abcdefg")), st.permutations(list("abcdefg")))
def test_reading_order_edit_properties(x, y):
    d = reading_order_edit(x, y)
    assert 0.0 <= d <= 1.0
    assert d == reading_order_edit(y, x)
    assert reading_order_edit(x, x) == 0.0
