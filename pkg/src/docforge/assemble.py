"""Merge recognized regions into Markdown and JSON page documents."""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Sequence, Union

from docforge.layout import ReadingOrder
from docforge.model import Category, OutputFormat, Page, RecognizedRegion, Status, StatusKind
from docforge.strict_json import dumps_canonical


class CoverageMismatch(ValueError):
    pass


@dataclass(frozen=True)
class Block:
    region_id: str
    category: Category
    content: str
    format: OutputFormat
    status: StatusKind = StatusKind.OK


@dataclass(frozen=True)
class AssembledDocument:
    page_id: str
    blocks: tuple[Block, ...]

    @property
    def markdown(self) -> str:
        return emit_markdown(self)

    @property
    def json_doc(self) -> dict:
        return {
            "page_id": self.page_id,
            "blocks": [
                {
                    "id": b.region_id,
                    "category": b.category.value,
                    "format": b.format.value,
                    "content": b.content,
                    "status": b.status.value,
                }
                for b in self.blocks
            ],
        }


def merge(page: Page, order: ReadingOrder, recognized: Sequence[RecognizedRegion]) -> AssembledDocument:
    """Lay recognized regions out in reading order.

    Failed or skipped regions keep their slot with empty content.
    """
    by_id = {r.region_id: r for r in recognized}
    if set(by_id) != set(order.ordered_region_ids) or len(by_id) != len(recognized):
        raise CoverageMismatch(
            f"recognized ids {sorted(by_id)} do not match reading order "
            f"{sorted(order.ordered_region_ids)}"
        )
    blocks = []
    for rid in order.ordered_region_ids:
        r = by_id[rid]
        content = r.content if r.status.is_ok else ""
        blocks.append(Block(rid, r.category, content, r.format, r.status.kind))
    return AssembledDocument(page.page_id, tuple(blocks))


def _render(block: Block) -> str:
    if block.status is not StatusKind.OK:
        return f"<!-- {block.region_id}: {block.status.value} -->"
    c = block.content
    cat = block.category
    if cat is Category.TITLE:
        return "# " + c
    if cat is Category.CODE:
        return f"```\n{c}\n```"
    if cat is Category.FORMULA:
        return f"$$\n{c}\n$$"
    if cat is Category.SEAL:
        lines = c.split("\n")
        return "\n".join(["> [seal] " + lines[0]] + ["> " + line for line in lines[1:]])
    if cat is Category.FIGURE:
        ref = f"<!-- figure: {block.region_id} -->"
        return f"{ref}\n{c}" if c else ref
    return c


def emit_markdown(doc: AssembledDocument) -> str:
    """Blocks rendered by category, one blank line apart, newline-terminated."""
    parts = [p for p in (_render(b) for b in doc.blocks) if p]
    return "\n\n".join(parts) + "\n" if parts else ""


def emit_json(doc: AssembledDocument) -> bytes:
    return dumps_canonical(doc.json_doc).encode("utf-8")


def parse_document_json(data: Union[bytes, str]) -> AssembledDocument:
    raw = json.loads(data)
    blocks = tuple(
        Block(
            region_id=b["id"],
            category=Category(b["category"]),
            content=b["content"],
            format=OutputFormat(b["format"]),
            status=StatusKind(b["status"]),
        )
        for b in raw["blocks"]
    )
    return AssembledDocument(raw["page_id"], blocks)


def to_recognized(doc: AssembledDocument) -> list[RecognizedRegion]:
    return [
        RecognizedRegion(b.region_id, b.category, b.content, b.format, Status(b.status))
        for b in doc.blocks
    ]
