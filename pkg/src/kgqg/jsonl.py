"""Streaming JSON Lines reading and deterministic writing."""
from __future__ import annotations

import json
from pathlib import Path
from typing import Any, Iterable, Iterator

from .errors import MalformedRecord


def iter_jsonl(path: str | Path) -> Iterator[tuple[int, dict[str, Any]]]:
    """Yield ``(line_number, object)`` pairs, skipping blank lines.

    Lines are read one at a time so memory stays bounded by the longest record.
    """
    path = Path(path)
    with path.open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise MalformedRecord(f"invalid JSON ({exc.msg})", lineno, str(path)) from None
            if not isinstance(obj, dict):
                raise MalformedRecord("record is not a JSON object", lineno, str(path))
            yield lineno, obj


def dumps(obj: Any) -> str:
    return json.dumps(obj, ensure_ascii=False, separators=(", ", ": "))


def write_jsonl(path: str | Path, records: Iterable[dict[str, Any]]) -> int:
    count = 0
    with Path(path).open("w", encoding="utf-8", newline="\n") as fh:
        for rec in records:
            fh.write(dumps(rec))
            fh.write("\n")
            count += 1
    return count


def require(obj: dict[str, Any], key: str, lineno: int, path: str | Path, kind: type = str) -> Any:
    if key not in obj:
        raise MalformedRecord(f"missing field {key!r}", lineno, str(path))
    value = obj[key]
    if kind is str and not isinstance(value, str):
        raise MalformedRecord(f"field {key!r} must be a string", lineno, str(path))
    if kind is int and (not isinstance(value, int) or isinstance(value, bool)):
        raise MalformedRecord(f"field {key!r} must be an integer", lineno, str(path))
    if kind is list and not isinstance(value, list):
        raise MalformedRecord(f"field {key!r} must be a list", lineno, str(path))
    return value
