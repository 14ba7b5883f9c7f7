"""Evaluation metrics: edit distances, TEDS, field F1, repetition."""

from docforge.metrics.edit import levenshtein, normalized_edit_distance
from docforge.metrics.fields import F1Report, field_f1, flatten
from docforge.metrics.repetition import repetition_ratio
from docforge.metrics.ted import CostModel, Node, tree_edit_distance
from docforge.metrics.tables import (
    EmptyInput,
    GoldParseError,
    TableNode,
    TableParseError,
    UnclosedTag,
    UnexpectedTag,
    parse_html_table,
    teds,
    teds_s,
)

__all__ = [
    "CostModel",
    "EmptyInput",
    "F1Report",
    "GoldParseError",
    "Node",
    "TableNode",
    "TableParseError",
    "UnclosedTag",
    "UnexpectedTag",
    "field_f1",
    "flatten",
    "levenshtein",
    "normalized_edit_distance",
    "parse_html_table",
    "repetition_ratio",
    "teds",
    "teds_s",
    "tree_edit_distance",
]
