"""Task-aware rewards: an accuracy term, hard validity gates, soft penalties.

``reward = clamp(accuracy_term * gate - sum(penalties), 0, 1)`` where the
gate is 0 as soon as one hard check fails.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Optional, Union

from docforge.metrics.edit import normalized_edit_distance
from docforge.metrics.fields import f1_from_maps, flatten
from docforge.metrics.repetition import repetition_ratio
from docforge.metrics.tables import (
    CONTENT_COSTS,
    GoldParseError,
    TableParseError,
    parse_html_table,
)
from docforge.metrics.ted import tree_edit_distance
from docforge.reward.validators import (
    KieSchema,
    canonical_latex_tokens,
    validate_json_strict,
    validate_latex,
    validate_tag_closure,
)

Text = Union[str, bytes]


class Task(str, enum.Enum):
    TEXT = "text"
    FORMULA = "formula"
    TABLE = "table"
    KIE = "kie"


class GoldInvalid(ValueError):
    pass


@dataclass(frozen=True)
class RewardWeights:
    lambda_rep: float = 1.0
    repetition_threshold: float = 0.3
    missing_field: float = 0.05
    duplicate_key: float = 0.05
    malformed: float = 0.2
    kie_penalty_cap: float = 0.5

    def __post_init__(self):
        for name in ("lambda_rep", "missing_field", "duplicate_key", "malformed", "kie_penalty_cap"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")
        if not 0.0 <= self.repetition_threshold <= 1.0:
            raise ValueError("repetition_threshold must lie in [0, 1]")


DEFAULT_WEIGHTS = RewardWeights()


@dataclass
class RewardReport:
    task: Task
    accuracy_term: float
    accuracy_metric: str
    validity: dict[str, bool] = field(default_factory=dict)
    penalties: dict[str, float] = field(default_factory=dict)
    reward: float = 0.0
    details: dict = field(default_factory=dict)

    @property
    def gate(self) -> int:
        return int(all(self.validity.values()))

    def to_dict(self) -> dict:
        return {
            "task": self.task.value,
            "accuracy_term": self.accuracy_term,
            "accuracy_metric": self.accuracy_metric,
            "validity": dict(self.validity),
            "penalties": dict(self.penalties),
            "reward": self.reward,
            "details": self.details,
        }


def _text(s: Text) -> str:
    if isinstance(s, (bytes, bytearray)):
        return bytes(s).decode("utf-8", errors="replace")
    return s


def _finish(report: RewardReport) -> RewardReport:
    raw = report.accuracy_term * report.gate - sum(report.penalties.values())
    report.reward = min(1.0, max(0.0, raw))
    return report


def _regularize(pred: str, malformed: bool, weights: RewardWeights) -> dict[str, float]:
    excess = repetition_ratio(pred) - weights.repetition_threshold
    return {
        "repetition": weights.lambda_rep * max(0.0, excess),
        "malformed": weights.malformed if malformed else 0.0,
    }


def _table_malformed(pred: str) -> tuple[bool, bool]:
    closure = validate_tag_closure(pred).ok
    try:
        parse_html_table(pred)
        parsed = True
    except (TableParseError, RecursionError):
        parsed = False
    return closure, parsed


def global_regularization(pred: Text, task: Optional[Union[Task, str]] = None,
                          weights: RewardWeights = DEFAULT_WEIGHTS) -> dict[str, float]:
    """Repetition and malformed-structure penalties shared by every task.

    ``task`` picks the structural validator; without one only repetition
    is measured.
    """
    s = _text(pred)
    task = Task(task) if task is not None else None
    if task is Task.TABLE:
        malformed = not all(_table_malformed(s))
    elif task is Task.FORMULA:
        malformed = not validate_latex(s).ok
    elif task is Task.KIE:
        malformed = validate_json_strict(pred).parse_error is not None
    else:
        malformed = False
    return _regularize(s, malformed, weights)


def reward_text(pred: Text, gold: Text, weights: RewardWeights = DEFAULT_WEIGHTS) -> RewardReport:
    p, g = _text(pred), _text(gold)
    ned = normalized_edit_distance(p, g)
    report = RewardReport(
        Task.TEXT,
        accuracy_term=1.0 - ned,
        accuracy_metric="normalized_edit_distance",
        penalties=_regularize(p, False, weights),
        details={"normalized_edit_distance": ned, "repetition_ratio": repetition_ratio(p)},
    )
    return _finish(report)


def reward_formula(pred: Text, gold: Text, weights: RewardWeights = DEFAULT_WEIGHTS) -> RewardReport:
    """Formula reward with a token-level stand-in for CDM.

    CDM needs rendered glyph matching; the accuracy term here is one minus
    the normalized edit distance between canonical LaTeX token streams.
    """
    p, g = _text(pred), _text(gold)
    check = validate_latex(p)
    ned = normalized_edit_distance(canonical_latex_tokens(p), canonical_latex_tokens(g))
    report = RewardReport(
        Task.FORMULA,
        accuracy_term=1.0 - ned,
        accuracy_metric="cdm_proxy_token_edit",
        validity={"latex_structure": check.ok},
        penalties=_regularize(p, not check.ok, weights),
        details={"token_edit_distance": ned, "latex_errors": check.errors},
    )
    return _finish(report)


def reward_table(pred: Text, gold: Text, weights: RewardWeights = DEFAULT_WEIGHTS) -> RewardReport:
    p, g = _text(pred), _text(gold)
    try:
        gold_tree = parse_html_table(g)
    except (TableParseError, RecursionError) as exc:
        raise GoldParseError(str(exc)) from exc
    closure = validate_tag_closure(p)
    try:
        pred_tree = parse_html_table(p)
    except (TableParseError, RecursionError):
        pred_tree = None
    if pred_tree is None:
        score = 0.0
    else:
        n = max(pred_tree.size(), gold_tree.size())
        score = 1.0 - tree_edit_distance(pred_tree, gold_tree, CONTENT_COSTS) / n
    validity = {"tag_closure": closure.ok, "structural_parse": pred_tree is not None}
    report = RewardReport(
        Task.TABLE,
        accuracy_term=score,
        accuracy_metric="teds",
        validity=validity,
        penalties=_regularize(p, not all(validity.values()), weights),
        details={"tag_errors": closure.errors},
    )
    return _finish(report)


def _capped(items: list[tuple[str, float]], cap: float) -> dict[str, float]:
    out, budget = {}, cap
    for name, value in items:
        take = min(value, budget)
        out[name] = take
        budget -= take
    return out


def reward_kie(pred: Text, gold: Text, schema: KieSchema,
               weights: RewardWeights = DEFAULT_WEIGHTS) -> RewardReport:
    gold_check = validate_json_strict(gold, schema)
    if not gold_check.ok:
        raise GoldInvalid(f"gold does not satisfy the schema: {gold_check.to_dict()}")
    check = validate_json_strict(pred, schema)
    parsed = check.parse_error is None
    if parsed:
        try:
            f1 = f1_from_maps(flatten(check.value), flatten(gold_check.value))
        except RecursionError:
            parsed = False
    if not parsed:
        f1 = f1_from_maps({}, flatten(gold_check.value))
    soft = _regularize(_text(pred), not parsed, weights)
    penalties = _capped(
        [
            ("duplicate_keys", weights.duplicate_key * len(check.duplicates)),
            ("missing_fields", weights.missing_field * len(check.missing)),
            ("malformed", soft["malformed"]),
            ("repetition", soft["repetition"]),
        ],
        weights.kie_penalty_cap,
    )
    report = RewardReport(
        Task.KIE,
        accuracy_term=f1.f1,
        accuracy_metric="field_f1",
        validity={"json_parse": parsed},
        penalties=penalties,
        details={
            "precision": f1.precision,
            "recall": f1.recall,
            "schema_check": check.to_dict(),
        },
    )
    return _finish(report)
