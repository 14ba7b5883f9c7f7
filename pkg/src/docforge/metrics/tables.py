"""HTML table parsing and TEDS / TEDS-S scoring."""

from __future__ import annotations

import bisect
from dataclasses import dataclass
from html.parser import HTMLParser
from typing import Optional

from docforge.metrics.edit import normalized_edit_distance
from docforge.metrics.ted import CostModel, Node, tree_edit_distance

STRUCTURAL_TAGS = frozenset({"table", "thead", "tbody", "tr", "td", "th"})
CELL_TAGS = frozenset({"td", "th"})

_ALLOWED_CHILDREN = {
    "table": {"thead", "tbody"},
    "thead": {"tr"},
    "tbody": {"tr"},
    "tr": {"td", "th"},
}


class TableParseError(ValueError):
    def __init__(self, message: str, tag: Optional[str] = None, position: int = 0):
        super().__init__(message)
        self.tag = tag
        self.position = position


class UnclosedTag(TableParseError):
    def __init__(self, tag: str, position: int):
        super().__init__(f"unclosed <{tag}> at position {position}", tag, position)


class UnexpectedTag(TableParseError):
    def __init__(self, tag: str, position: int):
        super().__init__(f"unexpected {tag!r} at position {position}", tag, position)


class EmptyInput(TableParseError):
    def __init__(self):
        super().__init__("empty table markup")


class GoldParseError(ValueError):
    pass


@dataclass(eq=False)
class TableNode(Node):
    content: str = ""
    colspan: int = 1
    rowspan: int = 1
    implicit: bool = False

    def __repr__(self) -> str:
        if self.label in CELL_TAGS:
            return f"{self.label}({self.content!r})"
        return f"{self.label}{self.children!r}"


def _span(attrs: list[tuple[str, Optional[str]]], name: str) -> int:
    for key, value in attrs:
        if key == name and value is not None:
            try:
                n = int(value.strip())
            except ValueError:
                return 1
            return n if n > 0 else 1
    return 1


class _TableBuilder(HTMLParser):
    def __init__(self, source: str):
        super().__init__(convert_charrefs=True)
        self._line_starts = [0]
        for i, ch in enumerate(source):
            if ch == "\n":
                self._line_starts.append(i + 1)
        self.root: Optional[TableNode] = None
        self.stack: list[TableNode] = []
        self._closed = False
        self._cell_text: list[str] = []

    def _char_pos(self) -> int:
        line, col = self.getpos()
        return self._line_starts[line - 1] + col

    def _in_cell(self) -> bool:
        return bool(self.stack) and self.stack[-1].label in CELL_TAGS

    def handle_starttag(self, tag, attrs):
        pos = self._char_pos()
        if tag not in STRUCTURAL_TAGS:
            if self._in_cell():
                return
            raise UnexpectedTag(tag, pos)
        if self._in_cell():
            if tag == "table":
                raise UnexpectedTag(tag, pos)
            raise UnclosedTag(self.stack[-1].label, pos)
        if tag == "table":
            if self.root is not None:
                raise UnexpectedTag(tag, pos)
            self.root = TableNode("table")
            self.stack.append(self.root)
            return
        if not self.stack:
            raise UnexpectedTag(tag, pos)
        parent = self.stack[-1]
        if parent.label == "table" and tag == "tr":
            body = TableNode("tbody", implicit=True)
            parent.add(body)
            self.stack.append(body)
            parent = body
        elif tag in {"thead", "tbody"} and parent.implicit:
            # a tr run directly under <table> ends when an explicit section starts
            self.stack.pop()
            parent = self.stack[-1]
        if tag not in _ALLOWED_CHILDREN.get(parent.label, ()):
            raise UnexpectedTag(tag, pos)
        node = TableNode(tag)
        if tag in CELL_TAGS:
            node.colspan = _span(attrs, "colspan")
            node.rowspan = _span(attrs, "rowspan")
            self._cell_text = []
        parent.add(node)
        self.stack.append(node)

    def handle_startendtag(self, tag, attrs):
        if tag in STRUCTURAL_TAGS:
            raise UnexpectedTag(tag, self._char_pos())
        self.handle_starttag(tag, attrs)

    def handle_endtag(self, tag):
        pos = self._char_pos()
        if tag not in STRUCTURAL_TAGS:
            if self._in_cell():
                return
            raise UnexpectedTag(f"/{tag}", pos)
        if self.stack and self.stack[-1].implicit and tag == "table":
            self.stack.pop()
        if not self.stack:
            raise UnexpectedTag(f"/{tag}", pos)
        top = self.stack[-1]
        if top.label != tag or top.implicit:
            if any(n.label == tag and not n.implicit for n in self.stack):
                raise UnclosedTag(top.label, pos)
            raise UnexpectedTag(f"/{tag}", pos)
        if tag in CELL_TAGS:
            top.content = "".join(self._cell_text).strip()
        self.stack.pop()
        if tag == "table":
            self._closed = True

    def handle_data(self, data):
        if self._in_cell():
            self._cell_text.append(data)
        elif data.strip():
            raise UnexpectedTag("#text", self._char_pos())


def parse_html_table(s: str) -> TableNode:
    """Parse one ``<table>`` into a tree of table/thead/tbody/tr/td/th nodes.

    Whitespace between structural tags is ignored, a missing ``<tbody>`` is
    inserted, and inline markup inside cells is dropped in favour of its
    text. Any structural irregularity raises a :class:`TableParseError`.
    """
    if not s or not s.strip():
        raise EmptyInput()
    builder = _TableBuilder(s)
    builder.feed(s)
    builder.close()
    if builder.root is None:
        raise EmptyInput()
    open_tags = [n for n in builder.stack if not n.implicit]
    if open_tags:
        raise UnclosedTag(open_tags[-1].label, len(s))
    return builder.root


def content_rename(a: Node, b: Node) -> float:
    if a.label != b.label:
        return 1.0
    if a.label in CELL_TAGS:
        if (a.colspan, a.rowspan) != (b.colspan, b.rowspan):
            return 1.0
        return normalized_edit_distance(a.content, b.content)
    return 0.0


def structure_rename(a: Node, b: Node) -> float:
    if a.label != b.label:
        return 1.0
    if a.label in CELL_TAGS and (a.colspan, a.rowspan) != (b.colspan, b.rowspan):
        return 1.0
    return 0.0


CONTENT_COSTS = CostModel(rename=content_rename)
STRUCTURE_COSTS = CostModel(rename=structure_rename)


def _similarity(pred_html: str, gold_html: str, cm: CostModel) -> float:
    try:
        gold = parse_html_table(gold_html)
    except (TableParseError, RecursionError) as exc:
        raise GoldParseError(str(exc)) from exc
    try:
        pred = parse_html_table(pred_html)
    except (TableParseError, RecursionError):
        return 0.0
    n = max(pred.size(), gold.size())
    return 1.0 - tree_edit_distance(pred, gold, cm) / n


def teds(pred_html: str, gold_html: str) -> float:
    """Tree-edit similarity of two tables, cell text included."""
    return _similarity(pred_html, gold_html, CONTENT_COSTS)


def teds_s(pred_html: str, gold_html: str) -> float:
    """Structure-only TEDS: cell text is ignored, spans are not."""
    return _similarity(pred_html, gold_html, STRUCTURE_COSTS)
