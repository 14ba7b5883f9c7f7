"""Strict JSON loading that keeps track of duplicated object keys.

``json`` silently keeps the last value of a repeated key; the pairs hook
sees every member first, so duplicates are recorded there and reported as
dot paths (array items by index) once the document is built.
"""

from __future__ import annotations

import json
from typing import Any, Union


class JsonParseError(ValueError):
    def __init__(self, message: str, position: int = 0):
        super().__init__(f"{message} (position {position})")
        self.position = position


class _Members(dict):
    __slots__ = ("duplicates",)


def _collect_pairs(pairs: list[tuple[str, Any]]) -> _Members:
    obj = _Members()
    obj.duplicates = []
    for key, value in pairs:
        if key in obj and key not in obj.duplicates:
            obj.duplicates.append(key)
        obj[key] = value
    return obj


def _reject_constant(name: str) -> Any:
    raise ValueError(f"{name} is not valid JSON")


def join_path(prefix: str, key: Union[str, int]) -> str:
    return f"{prefix}.{key}" if prefix else str(key)


def _normalize(value: Any, path: str, dups: list[str]) -> Any:
    if isinstance(value, _Members):
        dups.extend(join_path(path, k) for k in value.duplicates)
        return {k: _normalize(v, join_path(path, k), dups) for k, v in value.items()}
    if isinstance(value, list):
        return [_normalize(v, join_path(path, i), dups) for i, v in enumerate(value)]
    return value


def loads_with_duplicates(data: Union[bytes, str]) -> tuple[Any, list[str]]:
    """Parse strict JSON; return the value and the paths of repeated keys.

    Rejects invalid UTF-8, NaN/Infinity and trailing garbage.
    """
    if isinstance(data, (bytes, bytearray)):
        try:
            text = bytes(data).decode("utf-8")
        except UnicodeDecodeError as exc:
            raise JsonParseError("invalid UTF-8", exc.start) from exc
    else:
        text = data
    try:
        raw = json.loads(text, object_pairs_hook=_collect_pairs, parse_constant=_reject_constant)
    except json.JSONDecodeError as exc:
        raise JsonParseError(exc.msg, exc.pos) from exc
    except RecursionError as exc:
        raise JsonParseError("nesting too deep") from exc
    except ValueError as exc:
        raise JsonParseError(str(exc)) from exc
    dups: list[str] = []
    try:
        value = _normalize(raw, "", dups)
    except RecursionError as exc:
        raise JsonParseError("nesting too deep") from exc
    return value, dups


def loads(data: Union[bytes, str]) -> Any:
    return loads_with_duplicates(data)[0]


def dumps_canonical(value: Any) -> str:
    return json.dumps(value, sort_keys=True, separators=(",", ":"), ensure_ascii=False)
