import pytest

from docforge.metrics import (
    EmptyInput,
    GoldParseError,
    UnclosedTag,
    UnexpectedTag,
    parse_html_table,
    teds,
    teds_s,
)
from docforge.metrics.ted import Node
from oracles import ted_by_mapping_enumeration
from docforge.metrics.tables import content_rename, structure_rename


def shape(t):
    return (t.label, [shape(c) for c in t.children]) if t.children else t.label


def test_minimal_table():
    t = parse_html_table("<table><tr><td>a</td></tr></table>")
    assert shape(t) == ("table", [("tbody", [("tr", ["td"])])])
    assert t.children[0].children[0].children[0].content == "a"
    assert t.size() == 4


def test_unclosed_cell():
    with pytest.raises(UnclosedTag) as err:
        parse_html_table("<table><tr><td>a</tr></table>")
    assert err.value.tag == "td"


def test_colspan():
    t = parse_html_table('<table><tr><td colspan="2">a</td></tr></table>')
    cell = t.children[0].children[0].children[0]
    assert (cell.colspan, cell.rowspan) == (2, 1)


def test_empty_input():
    with pytest.raises(EmptyInput):
        parse_html_table("  \n ")


def test_whitespace_and_sections():
    html = """
    <table>
      <thead><tr><th>h</th></tr></thead>
      <tbody><tr><td> <b>x</b> &amp; y </td></tr></tbody>
    </table>"""
    t = parse_html_table(html)
    assert shape(t) == ("table", [("thead", [("tr", ["th"])]), ("tbody", [("tr", ["td"])])])
    assert t.children[1].children[0].children[0].content == "x & y"


@pytest.mark.parametrize(
    "html, error, tag",
    [
        ("<table><tr><td>a</td></tr>", UnclosedTag, "table"),
        ("<table><tr><td>a</td>", UnclosedTag, "tr"),
        ("<table><td>a</td></table>", UnexpectedTag, "td"),
        ("<table><tr><td>a</td></tr></table><table></table>", UnexpectedTag, "table"),
        ("<table><tr><td><table></table></td></tr></table>", UnexpectedTag, "table"),
        ("<table>stray<tr><td>a</td></tr></table>", UnexpectedTag, "#text"),
        ("<table><tr><td>a</td></tr></tbody></table>", UnexpectedTag, "/tbody"),
        ("<div>x</div>", UnexpectedTag, "div"),
    ],
)
def test_structure_errors(html, error, tag):
    with pytest.raises(error) as err:
        parse_html_table(html)
    assert err.value.tag == tag


ONE_CELL_B = "<table><tr><td>b</td></tr></table>"
ONE_CELL_C = "<table><tr><td>c</td></tr></table>"
GRID_2x2 = "<table><tr><td>a</td><td>b</td></tr><tr><td>c</td><td>d</td></tr></table>"
GRID_2x1 = "<table><tr><td>a</td></tr><tr><td>c</td></tr></table>"


def test_teds_examples():
    assert teds(ONE_CELL_B, ONE_CELL_B) == 1.0
    # brute-force mapping search: only the cell differs, rename cost 1/1
    d = ted_by_mapping_enumeration(parse_html_table(ONE_CELL_C), parse_html_table(ONE_CELL_B), content_rename)
    assert d == 1.0
    assert teds(ONE_CELL_C, ONE_CELL_B) == pytest.approx(1 - d / 4, abs=1e-12)
    assert teds("<table><tr><td>c</tr></table>", ONE_CELL_B) == 0.0


def test_teds_gold_must_parse():
    with pytest.raises(GoldParseError):
        teds(ONE_CELL_B, "<table><tr>")


def test_teds_s_examples():
    other_text = "<table><tr><td>w</td><td>x</td></tr><tr><td>y</td><td>z</td></tr></table>"
    assert teds_s(other_text, GRID_2x2) == 1.0
    assert teds_s(GRID_2x2, GRID_2x2) == 1.0
    # 2x2 gold has 8 nodes (implicit tbody included); the brute-force search
    # finds two cell deletions
    d = ted_by_mapping_enumeration(parse_html_table(GRID_2x1), parse_html_table(GRID_2x2), structure_rename)
    assert d == 2.0
    assert teds_s(GRID_2x1, GRID_2x2) == pytest.approx(1 - 2 / 8, abs=1e-12)


def test_teds_s_sees_spans():
    spanned = '<table><tr><td colspan="2">a</td></tr></table>'
    plain = "<table><tr><td>a</td></tr></table>"
    assert teds_s(spanned, plain) == pytest.approx(0.75)


def test_teds_partial_content():
    gold = "<table><tr><td>abcd</td><td>x</td></tr></table>"
    pred = "<table><tr><td>abce</td><td>x</td></tr></table>"
    # one cell off by 1/4 over 5 nodes
    assert teds(pred, gold) == pytest.approx(1 - 0.25 / 5)


def test_teds_invariant_under_cell_rewrite():
    rewritten = GRID_2x2.replace(">a<", ">zzz<").replace(">d<", ">q<")
    assert teds_s(rewritten, GRID_2x1) == teds_s(GRID_2x2, GRID_2x1)
