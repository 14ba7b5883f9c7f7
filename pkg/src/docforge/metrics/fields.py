from __future__ import annotations

import json
import unicodedata
from dataclasses import dataclass, field
from typing import Any, Optional, Union

from docforge import strict_json
from docforge.metrics.tables import GoldParseError
from docforge.strict_json import join_path


@dataclass
class FieldMatch:
    pred: Optional[str]
    gold: Optional[str]
    match: bool


@dataclass
class F1Report:
    true_positives: int = 0
    false_positives: int = 0
    false_negatives: int = 0
    precision: float = 0.0
    recall: float = 0.0
    f1: float = 0.0
    per_field: dict[str, FieldMatch] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "true_positives": self.true_positives,
            "false_positives": self.false_positives,
            "false_negatives": self.false_negatives,
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
            "per_field": {
                k: {"pred": v.pred, "gold": v.gold, "match": v.match}
                for k, v in self.per_field.items()
            },
        }


def normalize_leaf(value: Any) -> str:
    # IDs and codes are case-sensitive, so no case folding here
    if isinstance(value, str):
        return unicodedata.normalize("NFC", value.strip())
    return json.dumps(value, ensure_ascii=False)


def flatten(value: Any, prefix: str = "") -> dict[str, str]:
    """Map dot paths to normalized leaf strings; empty containers are leaves."""
    out: dict[str, str] = {}
    if isinstance(value, dict) and value:
        for k, v in value.items():
            out.update(flatten(v, join_path(prefix, k)))
    elif isinstance(value, list) and value:
        for i, v in enumerate(value):
            out.update(flatten(v, join_path(prefix, i)))
    elif isinstance(value, dict):
        out[prefix] = "{}"
    elif isinstance(value, list):
        out[prefix] = "[]"
    else:
        out[prefix] = normalize_leaf(value)
    return out


def f1_from_maps(pred: dict[str, str], gold: dict[str, str]) -> F1Report:
    report = F1Report()
    for path in sorted(set(pred) | set(gold)):
        p, g = pred.get(path), gold.get(path)
        match = p is not None and p == g
        report.per_field[path] = FieldMatch(p, g, match)
        if match:
            report.true_positives += 1
            continue
        if p is not None:
            report.false_positives += 1
        if g is not None:
            report.false_negatives += 1
    tp = report.true_positives
    if tp + report.false_positives:
        report.precision = tp / (tp + report.false_positives)
    if tp + report.false_negatives:
        report.recall = tp / (tp + report.false_negatives)
    if report.precision + report.recall > 0:
        report.f1 = 2 * report.precision * report.recall / (report.precision + report.recall)
    return report


def field_f1(pred_json: Union[bytes, str], gold_json: Union[bytes, str]) -> F1Report:
    """Field-level precision/recall/F1 over flattened JSON leaves.

    An unparseable prediction scores zero with every gold field a false
    negative; an unparseable gold raises :class:`GoldParseError`.
    """
    try:
        gold = flatten(strict_json.loads(gold_json))
    except (strict_json.JsonParseError, RecursionError) as exc:
        raise GoldParseError(str(exc)) from exc
    try:
        pred = flatten(strict_json.loads(pred_json))
    except (strict_json.JsonParseError, RecursionError):
        pred = {}
    return f1_from_maps(pred, gold)
