"""Layout data model shared by the pipeline stages.

Coordinates are integer pixels, origin at the top-left corner, y growing
downward. All types are frozen value objects.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Optional


class Category(str, enum.Enum):
    TEXT = "text"
    TITLE = "title"
    TABLE = "table"
    FORMULA = "formula"
    FIGURE = "figure"
    CODE = "code"
    SEAL = "seal"
    OTHER = "other"


class OutputFormat(str, enum.Enum):
    PLAIN = "plain"
    MARKDOWN = "markdown"
    LATEX_FORMULA = "latex_formula"
    HTML_TABLE = "html_table"
    JSON = "json"


_FORMAT_BY_CATEGORY = {
    Category.TEXT: OutputFormat.MARKDOWN,
    Category.TITLE: OutputFormat.MARKDOWN,
    Category.TABLE: OutputFormat.HTML_TABLE,
    Category.FORMULA: OutputFormat.LATEX_FORMULA,
    Category.FIGURE: OutputFormat.PLAIN,
    Category.CODE: OutputFormat.PLAIN,
    Category.SEAL: OutputFormat.PLAIN,
    Category.OTHER: OutputFormat.PLAIN,
}


def format_for_category(category: Category) -> OutputFormat:
    return _FORMAT_BY_CATEGORY[category]


@dataclass(frozen=True)
class Region:
    id: str
    bbox: tuple[int, int, int, int]
    category: Category
    image_ref: Optional[str] = None
    order: Optional[int] = None

    @property
    def x0(self) -> int:
        return self.bbox[0]

    @property
    def y0(self) -> int:
        return self.bbox[1]

    @property
    def x1(self) -> int:
        return self.bbox[2]

    @property
    def y1(self) -> int:
        return self.bbox[3]


@dataclass(frozen=True)
class Page:
    page_id: str
    width: int
    height: int
    regions: tuple[Region, ...] = ()

    def region(self, region_id: str) -> Region:
        for r in self.regions:
            if r.id == region_id:
                return r
        raise KeyError(region_id)


@dataclass(frozen=True)
class PageSet:
    pages: tuple[Page, ...] = ()
    source: Optional[str] = None


class StatusKind(str, enum.Enum):
    OK = "ok"
    BACKEND_ERROR = "backend_error"
    SKIPPED = "skipped"


@dataclass(frozen=True)
class Status:
    kind: StatusKind = StatusKind.OK
    detail: str = ""

    @classmethod
    def ok(cls) -> "Status":
        return cls(StatusKind.OK)

    @classmethod
    def backend_error(cls, message: str) -> "Status":
        return cls(StatusKind.BACKEND_ERROR, message)

    @classmethod
    def skipped(cls, reason: str) -> "Status":
        return cls(StatusKind.SKIPPED, reason)

    @property
    def is_ok(self) -> bool:
        return self.kind is StatusKind.OK


@dataclass(frozen=True)
class RecognizedRegion:
    region_id: str
    category: Category
    content: str
    format: OutputFormat
    status: Status = field(default_factory=Status.ok)


@dataclass(frozen=True)
class Violation:
    page_id: str
    region_id: Optional[str]
    kind: str
    detail: str = ""


def validate_page_set(ps: PageSet) -> list[Violation]:
    """Collect every invariant breach in ``ps``; an empty list means valid."""
    violations: list[Violation] = []
    seen_pages: set[str] = set()
    for page in ps.pages:
        if page.page_id in seen_pages:
            violations.append(Violation(page.page_id, None, "DuplicatePageId"))
        seen_pages.add(page.page_id)
        if page.width <= 0 or page.height <= 0:
            violations.append(
                Violation(page.page_id, None, "NonPositiveSize", f"{page.width}x{page.height}")
            )
        seen_ids: set[str] = set()
        for region in page.regions:
            violations.extend(_region_violations(page, region))
            if region.id in seen_ids:
                violations.append(Violation(page.page_id, region.id, "DuplicateId"))
            seen_ids.add(region.id)
    return violations


def _region_violations(page: Page, region: Region) -> list[Violation]:
    out = []
    x0, y0, x1, y1 = region.bbox
    if x0 >= x1 or y0 >= y1:
        out.append(Violation(page.page_id, region.id, "DegenerateBox", str(list(region.bbox))))
    if x0 < 0 or y0 < 0 or x1 > page.width or y1 > page.height:
        out.append(
            Violation(
                page.page_id,
                region.id,
                "OutOfBounds",
                f"{list(region.bbox)} not within {page.width}x{page.height}",
            )
        )
    if region.order is not None and region.order < 0:
        out.append(Violation(page.page_id, region.id, "NegativeOrder", str(region.order)))
    return out
