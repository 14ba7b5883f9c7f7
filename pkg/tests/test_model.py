from docforge.model import (
    Category,
    OutputFormat,
    Page,
    PageSet,
    Region,
    format_for_category,
    validate_page_set,
)


def page(*regions, width=100, height=100, page_id="p1"):
    return Page(page_id, width, height, tuple(regions))


def test_minimal_set_is_valid():
    ps = PageSet((page(Region("r1", (0, 0, 10, 10), Category.TEXT)),))
    assert validate_page_set(ps) == []


def test_degenerate_box():
    ps = PageSet((page(Region("r1", (10, 10, 10, 40), Category.TEXT)),))
    assert [v.kind for v in validate_page_set(ps)] == ["DegenerateBox"]


def test_duplicate_region_id():
    ps = PageSet(
        (page(Region("r1", (0, 0, 10, 10), Category.TEXT), Region("r1", (20, 20, 30, 30), Category.TEXT)),)
    )
    violations = validate_page_set(ps)
    assert [v.kind for v in violations] == ["DuplicateId"]
    assert violations[0].region_id == "r1"


def test_out_of_bounds_and_page_checks():
    ps = PageSet(
        (
            page(Region("r1", (50, 50, 120, 60), Category.TEXT)),
            page(page_id="p1", width=0),
        )
    )
    kinds = sorted(v.kind for v in validate_page_set(ps))
    assert kinds == ["DuplicatePageId", "NonPositiveSize", "OutOfBounds"]


def test_negative_order():
    ps = PageSet((page(Region("r1", (0, 0, 10, 10), Category.TEXT, order=-1)),))
    assert [v.kind for v in validate_page_set(ps)] == ["NegativeOrder"]


def test_validation_is_pure():
    ps = PageSet((page(Region("r1", (10, 10, 10, 40), Category.TEXT), Region("r1", (0, 0, 5, 5), Category.TABLE)),))
    assert validate_page_set(ps) == validate_page_set(ps)


def test_format_mapping():
    assert format_for_category(Category.TABLE) is OutputFormat.HTML_TABLE
    assert format_for_category(Category.FORMULA) is OutputFormat.LATEX_FORMULA
    assert format_for_category(Category.TEXT) is OutputFormat.MARKDOWN
