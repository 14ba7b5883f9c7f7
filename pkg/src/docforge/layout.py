"""Layout manifest I/O and reading-order restoration."""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from typing import Any, Sequence, Union

from docforge.metrics.edit import levenshtein
from docforge.model import Category, Page, PageSet, Region, Violation, validate_page_set

logger = logging.getLogger(__name__)

DEFAULT_MIN_GAP = 2

_TOP_LEVEL_KEYS = {"pages", "source"}
_PAGE_KEYS = {"page_id", "width", "height", "regions"}
_REGION_KEYS = {"id", "bbox", "category", "image", "order"}


class ManifestError(Exception):
    pass


class ManifestSyntaxError(ManifestError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} at position {position}")
        self.position = position


class SchemaError(ManifestError):
    def __init__(self, path: str, expected: str):
        super().__init__(f"{path}: expected {expected}")
        self.path = path
        self.expected = expected


class ManifestValidationError(ManifestError):
    def __init__(self, violations: list[Violation]):
        kinds = ", ".join(sorted({v.kind for v in violations}))
        super().__init__(f"{len(violations)} layout violation(s): {kinds}")
        self.violations = violations


class IdMismatch(ValueError):
    pass


@dataclass(frozen=True)
class ReadingOrder:
    page_id: str
    ordered_region_ids: tuple[str, ...]


# -- manifest ---------------------------------------------------------------


def _reject_constant(name: str) -> Any:
    raise ValueError(f"non-standard JSON constant {name}")


def parse_manifest(data: Union[bytes, str]) -> PageSet:
    """Parse a layout manifest into a validated :class:`PageSet`.

    Raises ManifestSyntaxError for malformed JSON, SchemaError for shape
    problems and ManifestValidationError when the layout breaks invariants.
    """
    if isinstance(data, bytes):
        try:
            text = data.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise ManifestSyntaxError("invalid UTF-8", exc.start) from exc
    else:
        text = data
    try:
        doc = json.loads(text, parse_constant=_reject_constant)
    except json.JSONDecodeError as exc:
        raise ManifestSyntaxError(exc.msg, exc.pos) from exc
    except ValueError as exc:
        raise ManifestSyntaxError(str(exc), 0) from exc

    if not isinstance(doc, dict):
        raise SchemaError("$", "object")
    unknown = set(doc) - _TOP_LEVEL_KEYS
    if unknown:
        raise SchemaError(f"$.{sorted(unknown)[0]}", "no such key")
    pages_raw = _require(doc, "pages", list, "pages")
    source = doc.get("source")
    if source is not None and not isinstance(source, str):
        raise SchemaError("source", "string")

    pages = tuple(_parse_page(p, f"pages[{i}]") for i, p in enumerate(pages_raw))
    ps = PageSet(pages=pages, source=source)
    violations = validate_page_set(ps)
    if violations:
        raise ManifestValidationError(violations)
    return ps


def _require(obj: dict, key: str, typ: type, path: str) -> Any:
    if key not in obj:
        raise SchemaError(path, _type_name(typ))
    value = obj[key]
    if not _is_type(value, typ):
        raise SchemaError(path, _type_name(typ))
    return value


def _is_type(value: Any, typ: type) -> bool:
    if typ is int:
        return isinstance(value, int) and not isinstance(value, bool)
    return isinstance(value, typ)


def _type_name(typ: type) -> str:
    return {int: "integer", str: "string", list: "array", dict: "object"}[typ]


def _drop_unknown(obj: dict, allowed: set, path: str) -> None:
    for key in sorted(set(obj) - allowed):
        logger.warning("ignoring unknown key %s.%s", path, key)


def _parse_page(raw: Any, path: str) -> Page:
    if not isinstance(raw, dict):
        raise SchemaError(path, "object")
    _drop_unknown(raw, _PAGE_KEYS, path)
    page_id = _require(raw, "page_id", str, f"{path}.page_id")
    width = _require(raw, "width", int, f"{path}.width")
    height = _require(raw, "height", int, f"{path}.height")
    regions_raw = _require(raw, "regions", list, f"{path}.regions")
    regions = tuple(
        _parse_region(r, f"{path}.regions[{i}]") for i, r in enumerate(regions_raw)
    )
    return Page(page_id=page_id, width=width, height=height, regions=regions)


def _parse_region(raw: Any, path: str) -> Region:
    if not isinstance(raw, dict):
        raise SchemaError(path, "object")
    _drop_unknown(raw, _REGION_KEYS, path)
    region_id = _require(raw, "id", str, f"{path}.id")
    bbox = _require(raw, "bbox", list, f"{path}.bbox")
    if len(bbox) != 4 or not all(_is_type(v, int) for v in bbox):
        raise SchemaError(f"{path}.bbox", "array of 4 integers")
    cat_name = _require(raw, "category", str, f"{path}.category")
    try:
        category = Category(cat_name)
    except ValueError:
        logger.warning("%s: unknown category %r mapped to 'other'", path, cat_name)
        category = Category.OTHER
    image = raw.get("image")
    if image is not None and not isinstance(image, str):
        raise SchemaError(f"{path}.image", "string")
    order = raw.get("order")
    if order is not None and not _is_type(order, int):
        raise SchemaError(f"{path}.order", "integer")
    return Region(
        id=region_id,
        bbox=(bbox[0], bbox[1], bbox[2], bbox[3]),
        category=category,
        image_ref=image,
        order=order,
    )


def manifest_dict(ps: PageSet) -> dict:
    pages = []
    for page in ps.pages:
        regions = []
        for r in page.regions:
            entry: dict[str, Any] = {"id": r.id, "bbox": list(r.bbox), "category": r.category.value}
            if r.image_ref is not None:
                entry["image"] = r.image_ref
            if r.order is not None:
                entry["order"] = r.order
            regions.append(entry)
        pages.append(
            {"page_id": page.page_id, "width": page.width, "height": page.height, "regions": regions}
        )
    doc: dict[str, Any] = {"pages": pages}
    if ps.source is not None:
        doc["source"] = ps.source
    return doc


def dump_manifest(ps: PageSet) -> bytes:
    """Canonical manifest bytes: sorted keys, compact separators, UTF-8."""
    return json.dumps(
        manifest_dict(ps), sort_keys=True, separators=(",", ":"), ensure_ascii=False
    ).encode("utf-8")


# -- reading order ----------------------------------------------------------


def infer_reading_order(page: Page, min_gap: int = DEFAULT_MIN_GAP) -> ReadingOrder:
    """Order a page's regions for reading.

    Detector ranks win when every region has one. Otherwise a recursive
    XY-cut: split at the widest horizontal gap first, then the widest
    vertical gap, and order unsplittable groups by (y0, x0, id).
    """
    regions = list(page.regions)
    if regions and all(r.order is not None for r in regions):
        ordered = sorted(regions, key=lambda r: (r.order, r.id))
    else:
        ordered = _xy_cut(regions, min_gap)
    return ReadingOrder(page.page_id, tuple(r.id for r in ordered))


def _widest_gap(regions: list[Region], axis: int, min_gap: int):
    # axis 1 -> gaps along y (horizontal cut line), axis 0 -> gaps along x
    spans = sorted((r.bbox[axis], r.bbox[axis + 2]) for r in regions)
    best = None
    cur_end = spans[0][1]
    for start, end in spans[1:]:
        gap = start - cur_end
        if gap >= min_gap and (best is None or gap > best[1] - best[0]):
            best = (cur_end, start)
        cur_end = max(cur_end, end)
    return best


def _xy_cut(regions: list[Region], min_gap: int) -> list[Region]:
    if len(regions) <= 1:
        return list(regions)
    for axis in (1, 0):
        gap = _widest_gap(regions, axis, min_gap)
        if gap is not None:
            before = [r for r in regions if r.bbox[axis + 2] <= gap[0]]
            after = [r for r in regions if r.bbox[axis + 2] > gap[0]]
            return _xy_cut(before, min_gap) + _xy_cut(after, min_gap)
    return sorted(regions, key=lambda r: (r.y0, r.x0, r.id))


def reading_order_edit(
    pred: Union[ReadingOrder, Sequence[str]], gold: Union[ReadingOrder, Sequence[str]]
) -> float:
    """Levenshtein distance between id sequences over the longer length."""
    p = list(pred.ordered_region_ids if isinstance(pred, ReadingOrder) else pred)
    g = list(gold.ordered_region_ids if isinstance(gold, ReadingOrder) else gold)
    if sorted(p) != sorted(g):
        raise IdMismatch(f"id sets differ: {sorted(set(p) ^ set(g))}")
    if not p:
        return 0.0
    return levenshtein(p, g) / max(len(p), len(g))
