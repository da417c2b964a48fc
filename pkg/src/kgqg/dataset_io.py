"""Dialog, prediction and human-annotation files (all JSON Lines)."""
from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Iterator

from .errors import LengthViolation, MalformedDialog, MalformedRecord
from .jsonl import iter_jsonl, require, write_jsonl
from .kb import Triple, normalize_text

logger = logging.getLogger(__name__)

MIN_TURNS = 5
MAX_TURNS = 19

BINARY_LABELS = ("yes", "no")
COHERENCE_LABELS = ("high", "medium", "low")
CRITERIA = {"fluency": BINARY_LABELS, "repetition": BINARY_LABELS, "coherence": COHERENCE_LABELS}


@dataclass(frozen=True)
class Turn:
    triple: Triple
    question: str
    answer: str

    def __post_init__(self) -> None:
        question = normalize_text(self.question)
        if not question:
            raise ValueError("turn question is empty")
        object.__setattr__(self, "question", question)
        object.__setattr__(self, "answer", normalize_text(self.answer))

    def to_dict(self) -> dict[str, str]:
        return {**self.triple.to_dict(), "q": self.question, "a": self.answer}

    @classmethod
    def from_dict(cls, obj: dict) -> "Turn":
        return cls(Triple(obj["s"], obj["p"], obj["o"]), obj["q"], obj.get("a", ""))


@dataclass(frozen=True)
class Dialog:
    id: str
    root_entity: str
    category: str
    turns: tuple[Turn, ...]

    def __post_init__(self) -> None:
        if not self.turns:
            raise MalformedDialog(self.id, "dialog has no turns")
        root = normalize_text(self.root_entity)
        if self.turns[0].triple.subject != root:
            raise MalformedDialog(
                self.id,
                f"root entity {root!r} differs from first turn subject {self.turns[0].triple.subject!r}",
            )
        object.__setattr__(self, "root_entity", root)

    @property
    def graph(self) -> frozenset[Triple]:
        """K_D: the set of triples grounding the turns."""
        return frozenset(turn.triple for turn in self.turns)

    def to_dict(self) -> dict:
        return {"id": self.id, "root_entity": self.root_entity, "category": self.category,
                "turns": [t.to_dict() for t in self.turns]}


@dataclass(frozen=True)
class PredictionRecord:
    instance_id: str
    raw_output: str

    def to_dict(self) -> dict[str, str]:
        return {"id": self.instance_id, "output": self.raw_output}


@dataclass(frozen=True)
class AnnotationRecord:
    item_id: str
    annotator_id: str
    fluency: str
    repetition: str
    coherence: str
    model: str = ""

    def label(self, criterion: str) -> str:
        return getattr(self, criterion)

    def to_dict(self) -> dict[str, str]:
        out = {"item": self.item_id, "annotator": self.annotator_id, "fluency": self.fluency,
               "repetition": self.repetition, "coherence": self.coherence}
        if self.model:
            out["model"] = self.model
        return out


def _dialog_from_record(obj: dict, lineno: int, path: Path) -> Dialog:
    dialog_id = require(obj, "id", lineno, path)
    root = require(obj, "root_entity", lineno, path)
    category = require(obj, "category", lineno, path)
    raw_turns = require(obj, "turns", lineno, path, list)
    turns = []
    for i, raw in enumerate(raw_turns):
        if not isinstance(raw, dict):
            raise MalformedDialog(dialog_id, f"turn {i} is not an object")
        missing = [k for k in ("s", "p", "o", "q", "a") if k not in raw]
        if missing:
            raise MalformedDialog(dialog_id, f"turn {i} lacks field(s) {', '.join(missing)}")
        try:
            turns.append(Turn.from_dict(raw))
        except (ValueError, TypeError) as exc:
            raise MalformedDialog(dialog_id, f"turn {i}: {exc}") from None
    return Dialog(dialog_id, root, category, tuple(turns))


def iter_dialogs(
    path: str | Path,
    min_turns: int = MIN_TURNS,
    max_turns: int = MAX_TURNS,
    enforce_bounds: bool = False,
) -> Iterator[Dialog]:
    """Stream dialogs from ``path``.

    Turn-count bounds only log a warning unless ``enforce_bounds`` is set, in
    which case a :class:`LengthViolation` is raised.
    """
    path = Path(path)
    for lineno, obj in iter_jsonl(path):
        dialog = _dialog_from_record(obj, lineno, path)
        n = len(dialog.turns)
        if not min_turns <= n <= max_turns:
            msg = f"{n} turns outside [{min_turns}, {max_turns}]"
            if enforce_bounds:
                raise LengthViolation(dialog.id, msg)
            logger.warning("dialog %s: %s", dialog.id, msg)
        yield dialog


def load_dialogs(path: str | Path, **kwargs) -> list[Dialog]:
    return list(iter_dialogs(path, **kwargs))


def write_dialogs(path: str | Path, dialogs: Iterable[Dialog]) -> int:
    return write_jsonl(path, (d.to_dict() for d in dialogs))


def iter_predictions(path: str | Path) -> Iterator[PredictionRecord]:
    path = Path(path)
    for lineno, obj in iter_jsonl(path):
        yield PredictionRecord(require(obj, "id", lineno, path), require(obj, "output", lineno, path))


def load_predictions(path: str | Path) -> list[PredictionRecord]:
    return list(iter_predictions(path))


def write_predictions(path: str | Path, records: Iterable[PredictionRecord]) -> int:
    return write_jsonl(path, (r.to_dict() for r in records))


def iter_annotations(path: str | Path) -> Iterator[AnnotationRecord]:
    path = Path(path)
    for lineno, obj in iter_jsonl(path):
        values = {}
        for criterion, allowed in CRITERIA.items():
            value = require(obj, criterion, lineno, path)
            if value not in allowed:
                raise MalformedRecord(f"{criterion} must be one of {allowed}, got {value!r}",
                                      lineno, str(path))
            values[criterion] = value
        model = obj.get("model", "")
        if not isinstance(model, str):
            raise MalformedRecord("field 'model' must be a string", lineno, str(path))
        yield AnnotationRecord(require(obj, "item", lineno, path),
                               require(obj, "annotator", lineno, path), model=model, **values)


def load_annotations(path: str | Path) -> list[AnnotationRecord]:
    return list(iter_annotations(path))


def write_annotations(path: str | Path, records: Iterable[AnnotationRecord]) -> int:
    return write_jsonl(path, (r.to_dict() for r in records))
