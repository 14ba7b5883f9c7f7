"""Structural validators for table markup, LaTeX and schema-bound JSON."""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Any, Optional, Union

from docforge import strict_json
from docforge.strict_json import join_path

_TAG_RE = re.compile(r"<\s*(/?)\s*(table|thead|tbody|tr|td|th)\b[^>]*?(/?)\s*>", re.IGNORECASE)


@dataclass
class CheckReport:
    ok: bool
    errors: list[dict] = field(default_factory=list)


def validate_tag_closure(s: str) -> CheckReport:
    """Stack scan over table tags; reports unclosed opens and stray closes."""
    errors: list[dict] = []
    stack: list[tuple[str, int]] = []
    for m in _TAG_RE.finditer(s):
        closing, tag, self_closing = m.group(1), m.group(2).lower(), m.group(3)
        if self_closing and not closing:
            continue
        if not closing:
            stack.append((tag, m.start()))
            continue
        if any(t == tag for t, _ in stack):
            while stack[-1][0] != tag:
                open_tag, open_pos = stack.pop()
                errors.append({"kind": "unclosed", "tag": open_tag, "position": open_pos})
            stack.pop()
        else:
            errors.append({"kind": "close_without_open", "tag": tag, "position": m.start()})
    for open_tag, open_pos in reversed(stack):
        errors.append({"kind": "unclosed", "tag": open_tag, "position": open_pos})
    errors.sort(key=lambda e: e["position"])
    return CheckReport(not errors, errors)


_LATEX_TOKEN_RE = re.compile(r"\\[A-Za-z]+|\\.|\\$|\s+|.", re.DOTALL)
_ENV_NAME_RE = re.compile(r"\s*\{([^{}]*)\}")


def latex_tokens(s: str) -> list[tuple[str, int]]:
    return [(m.group(0), m.start()) for m in _LATEX_TOKEN_RE.finditer(s)]


def canonical_latex_tokens(s: str) -> list[str]:
    """Commands as single tokens, whitespace dropped, braces kept."""
    return [tok for tok, _ in latex_tokens(s) if not tok.isspace()]


def validate_latex(s: str) -> CheckReport:
    """Brace balance, \\left/\\right pairing and \\begin/\\end environment matching."""
    errors: list[dict] = []
    # one stack so that crossing constructs like "{\left(}\right)" are caught
    stack: list[tuple[str, str, int]] = []

    def close(kind: str, name: str, pos: int) -> None:
        if not stack:
            errors.append({"kind": f"unmatched_{kind}_close", "detail": name, "position": pos})
            return
        top_kind, top_name, top_pos = stack[-1]
        if top_kind != kind:
            errors.append({"kind": f"unmatched_{kind}_close", "detail": name, "position": pos})
            return
        stack.pop()
        if kind == "env" and top_name != name:
            errors.append(
                {"kind": "env_mismatch", "detail": f"{top_name} != {name}", "position": pos}
            )

    for tok, pos in latex_tokens(s):
        if tok == "{":
            stack.append(("brace", "{", pos))
        elif tok == "}":
            close("brace", "}", pos)
        elif tok == "\\left":
            stack.append(("delim", "\\left", pos))
        elif tok == "\\right":
            close("delim", "\\right", pos)
        elif tok in ("\\begin", "\\end"):
            m = _ENV_NAME_RE.match(s, pos + len(tok))
            if m is None:
                errors.append({"kind": "missing_env_name", "detail": tok, "position": pos})
            elif tok == "\\begin":
                stack.append(("env", m.group(1).strip(), pos))
            else:
                close("env", m.group(1).strip(), pos)
    for kind, name, pos in stack:
        errors.append({"kind": f"unclosed_{kind}", "detail": name, "position": pos})
    errors.sort(key=lambda e: e["position"])
    return CheckReport(not errors, errors)


# -- KIE schema -------------------------------------------------------------

FIELD_TYPES = ("string", "number", "object", "array")


class SchemaDefinitionError(ValueError):
    pass


@dataclass(frozen=True)
class SchemaField:
    type: str
    required: bool = True
    properties: Optional[dict] = None  # name -> SchemaField, for objects
    items: Optional["SchemaField"] = None  # for arrays


@dataclass(frozen=True)
class KieSchema:
    """Tree of expected fields, read from a JSON-Schema subset.

    Supported keywords: ``type`` (string, number, object, array),
    ``properties``, ``required`` and ``items``.
    """

    root: SchemaField

    @classmethod
    def from_json(cls, data: Union[bytes, str]) -> "KieSchema":
        try:
            raw, dups = strict_json.loads_with_duplicates(data)
        except strict_json.JsonParseError as exc:
            raise SchemaDefinitionError(f"schema is not valid JSON: {exc}") from exc
        if dups:
            raise SchemaDefinitionError(f"duplicate field names in schema: {dups}")
        return cls.from_dict(raw)

    @classmethod
    def from_dict(cls, raw: Any) -> "KieSchema":
        root = _schema_field(raw, "$", required=True)
        if root.type != "object" or not root.properties:
            raise SchemaDefinitionError("schema root must be an object with at least one field")
        return cls(root)

    def to_dict(self) -> dict:
        return _field_dict(self.root)

    def required_paths(self) -> list[str]:
        out: list[str] = []
        _required(self.root, "", out)
        return out


def _schema_field(raw: Any, path: str, required: bool) -> SchemaField:
    if not isinstance(raw, dict) or raw.get("type") not in FIELD_TYPES:
        raise SchemaDefinitionError(f"{path}: expected an object with type in {FIELD_TYPES}")
    typ = raw["type"]
    if typ == "object":
        props = raw.get("properties", {})
        if not isinstance(props, dict):
            raise SchemaDefinitionError(f"{path}.properties: expected object")
        req = raw.get("required", [])
        if not isinstance(req, list) or not all(isinstance(r, str) for r in req):
            raise SchemaDefinitionError(f"{path}.required: expected list of names")
        unknown = set(req) - set(props)
        if unknown:
            raise SchemaDefinitionError(f"{path}.required names unknown fields {sorted(unknown)}")
        fields = {
            name: _schema_field(sub, join_path(path, name), name in req)
            for name, sub in props.items()
        }
        return SchemaField("object", required, properties=fields)
    if typ == "array":
        if "items" not in raw:
            raise SchemaDefinitionError(f"{path}.items: required for arrays")
        return SchemaField("array", required, items=_schema_field(raw["items"], f"{path}[]", True))
    return SchemaField(typ, required)


def _field_dict(f: SchemaField) -> dict:
    out: dict[str, Any] = {"type": f.type}
    if f.properties is not None:
        out["properties"] = {k: _field_dict(v) for k, v in f.properties.items()}
        req = [k for k, v in f.properties.items() if v.required]
        if req:
            out["required"] = req
    if f.items is not None:
        out["items"] = _field_dict(f.items)
    return out


def _required(f: SchemaField, prefix: str, out: list[str]) -> None:
    for name, sub in (f.properties or {}).items():
        if sub.required:
            path = join_path(prefix, name)
            out.append(path)
            if sub.type == "object":
                _required(sub, path, out)


@dataclass
class JsonCheckReport:
    ok: bool
    duplicates: list[str] = field(default_factory=list)
    missing: list[str] = field(default_factory=list)
    extra: list[str] = field(default_factory=list)
    type_errors: list[str] = field(default_factory=list)
    parse_error: Optional[str] = None
    value: Any = None

    def to_dict(self) -> dict:
        return {
            "ok": self.ok,
            "duplicates": self.duplicates,
            "missing": self.missing,
            "extra": self.extra,
            "type_errors": self.type_errors,
            "parse_error": self.parse_error,
        }


def _type_ok(value: Any, typ: str) -> bool:
    if typ == "string":
        return isinstance(value, str)
    if typ == "number":
        return isinstance(value, (int, float)) and not isinstance(value, bool)
    if typ == "object":
        return isinstance(value, dict)
    return isinstance(value, list)


def _check(value: Any, expected: SchemaField, path: str, report: JsonCheckReport) -> None:
    if not _type_ok(value, expected.type):
        report.type_errors.append(path or "$")
        return
    if expected.type == "object":
        props = expected.properties or {}
        for name, sub in props.items():
            sub_path = join_path(path, name)
            if name in value:
                _check(value[name], sub, sub_path, report)
            elif sub.required:
                report.missing.append(sub_path)
        report.extra.extend(join_path(path, k) for k in value if k not in props)
    elif expected.type == "array":
        for i, item in enumerate(value):
            _check(item, expected.items, join_path(path, i), report)


def validate_json_strict(data: Union[bytes, str], schema: Optional[KieSchema] = None) -> JsonCheckReport:
    """Parse with duplicate-key detection, then check schema coverage."""
    report = JsonCheckReport(ok=False)
    try:
        value, dups = strict_json.loads_with_duplicates(data)
    except strict_json.JsonParseError as exc:
        report.parse_error = str(exc)
        return report
    report.value = value
    report.duplicates = dups
    if schema is not None:
        try:
            _check(value, schema.root, "", report)
        except RecursionError:
            report.type_errors.append("$")
    report.ok = not (report.duplicates or report.missing or report.extra or report.type_errors)
    return report
