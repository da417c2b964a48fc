"""Immutable triple store with the lookups the evaluators rely on.

Triples compare after whitespace normalization (trim, collapse internal runs)
but stay case-sensitive. Objects are plain strings; an object counts as an
entity when it matches a registered entity id or label.
"""
from __future__ import annotations

import enum
import logging
from collections import defaultdict
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, NamedTuple

from .errors import MalformedRecord
from .jsonl import iter_jsonl, require, write_jsonl

logger = logging.getLogger(__name__)

TRIPLES_FILE = "triples.jsonl"
ENTITIES_FILE = "entities.jsonl"
VERBALIZATIONS_FILE = "verbalizations.jsonl"


def normalize_text(text: str) -> str:
    return " ".join(text.split())


class Gender(enum.Enum):
    MASCULINE = "M"
    FEMININE = "F"
    OTHER = "O"
    NEUTRAL = "N"

    @classmethod
    def from_code(cls, code: str | None) -> "Gender":
        if code is None:
            return cls.NEUTRAL
        return cls(code)

    def to_code(self) -> str | None:
        return None if self is Gender.NEUTRAL else self.value


@dataclass(frozen=True, order=True)
class Triple:
    subject: str
    property: str
    object: str

    def __post_init__(self) -> None:
        for name in ("subject", "property", "object"):
            value = getattr(self, name)
            if not isinstance(value, str):
                raise ValueError(f"triple {name} must be a string, got {type(value).__name__}")
            value = normalize_text(value)
            if not value:
                raise ValueError(f"triple {name} is empty")
            object.__setattr__(self, name, value)

    def to_dict(self) -> dict[str, str]:
        return {"s": self.subject, "p": self.property, "o": self.object}

    @classmethod
    def from_dict(cls, obj: Mapping[str, object]) -> "Triple":
        return cls(obj["s"], obj["p"], obj["o"])  # type: ignore[arg-type]


@dataclass(frozen=True)
class EntityMeta:
    id: str
    label: str
    category: str = ""
    gender: Gender = Gender.NEUTRAL

    def to_dict(self) -> dict[str, object]:
        return {"id": self.id, "label": self.label, "category": self.category,
                "gender": self.gender.to_code()}


class VocabFlags(NamedTuple):
    subj_known: bool
    prop_known: bool
    obj_known: bool


@dataclass(frozen=True, eq=False)
class KnowledgeBase:
    triples: frozenset[Triple]
    entity_meta: Mapping[str, EntityMeta]
    verbalizations: Mapping[Triple, tuple[str, ...]]
    duplicate_count: int = 0
    _by_subject: Mapping[str, tuple[Triple, ...]] = field(default_factory=dict, repr=False)
    _by_property: Mapping[str, tuple[Triple, ...]] = field(default_factory=dict, repr=False)
    _by_category: Mapping[str, tuple[Triple, ...]] = field(default_factory=dict, repr=False)
    _label_index: Mapping[str, str] = field(default_factory=dict, repr=False)
    subjects: tuple[str, ...] = ()
    properties: tuple[str, ...] = ()
    objects: tuple[str, ...] = ()
    _object_set: frozenset[str] = field(default=frozenset(), repr=False)

    @classmethod
    def build(
        cls,
        triples: Iterable[Triple],
        entities: Iterable[EntityMeta] = (),
        verbalizations: Mapping[Triple, Iterable[str]] | None = None,
        duplicate_count: int = 0,
    ) -> "KnowledgeBase":
        triple_set = frozenset(triples)
        meta: dict[str, EntityMeta] = {}
        for ent in entities:
            if ent.id in meta and meta[ent.id] != ent:
                raise ValueError(f"conflicting metadata for entity {ent.id!r}")
            meta[ent.id] = ent
        labels = {m.label: m.id for m in sorted(meta.values(), key=lambda m: m.id)}
        for t in triple_set:
            if t.subject not in meta and t.subject not in labels:
                meta[t.subject] = EntityMeta(t.subject, t.subject)
                labels.setdefault(t.subject, t.subject)

        by_subject: dict[str, list[Triple]] = defaultdict(list)
        by_property: dict[str, list[Triple]] = defaultdict(list)
        by_category: dict[str, list[Triple]] = defaultdict(list)
        for t in sorted(triple_set):
            by_subject[t.subject].append(t)
            by_property[t.property].append(t)
            ent = meta.get(t.subject) or meta[labels[t.subject]]
            by_category[ent.category].append(t)

        verbs: dict[Triple, tuple[str, ...]] = {}
        for t, questions in (verbalizations or {}).items():
            qs = tuple(questions)
            if not qs:
                raise ValueError(f"empty verbalization list for {t}")
            if t not in triple_set:
                raise ValueError(f"verbalization for unknown triple {t}")
            verbs[t] = qs

        return cls(
            triples=triple_set,
            entity_meta=meta,
            verbalizations=verbs,
            duplicate_count=duplicate_count,
            _by_subject={k: tuple(v) for k, v in by_subject.items()},
            _by_property={k: tuple(v) for k, v in by_property.items()},
            _by_category={k: tuple(v) for k, v in by_category.items()},
            _label_index=labels,
            subjects=tuple(sorted({t.subject for t in triple_set})),
            properties=tuple(sorted({t.property for t in triple_set})),
            objects=tuple(sorted({t.object for t in triple_set})),
            _object_set=frozenset(t.object for t in triple_set),
        )

    def __len__(self) -> int:
        return len(self.triples)

    def by_subject(self, subject: str) -> tuple[Triple, ...]:
        return self._by_subject.get(normalize_text(subject), ())

    def by_property(self, prop: str) -> tuple[Triple, ...]:
        return self._by_property.get(normalize_text(prop), ())

    def by_subject_category(self, category: str) -> tuple[Triple, ...]:
        return self._by_category.get(category, ())

    def meta(self, entity: str) -> EntityMeta | None:
        entity = normalize_text(entity)
        found = self.entity_meta.get(entity)
        if found is None and entity in self._label_index:
            found = self.entity_meta.get(self._label_index[entity])
        return found

    def is_entity(self, name: str) -> bool:
        return self.meta(name) is not None

    def category_of(self, entity: str) -> str | None:
        m = self.meta(entity)
        return None if m is None else m.category

    def gender_of(self, entity: str) -> Gender:
        m = self.meta(entity)
        return Gender.NEUTRAL if m is None else m.gender

    def contains(self, t: Triple) -> bool:
        return t in self.triples

    def vocab_membership(self, t: Triple) -> VocabFlags:
        obj_known = t.object in self._object_set or self.is_entity(t.object)
        return VocabFlags(t.subject in self._by_subject, t.property in self._by_property, obj_known)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, KnowledgeBase):
            return NotImplemented
        return (self.triples == other.triples and dict(self.entity_meta) == dict(other.entity_meta)
                and dict(self.verbalizations) == dict(other.verbalizations))

    __hash__ = None  # type: ignore[assignment]


def contains(kb: KnowledgeBase, t: Triple) -> bool:
    return kb.contains(t)


def vocab_membership(kb: KnowledgeBase, t: Triple) -> VocabFlags:
    return kb.vocab_membership(t)


def gender_of(kb: KnowledgeBase, entity: str) -> Gender:
    return kb.gender_of(entity)


def _triple_from_record(obj: dict, lineno: int, path: Path) -> Triple:
    for key in ("s", "p", "o"):
        require(obj, key, lineno, path)
    try:
        return Triple(obj["s"], obj["p"], obj["o"])
    except ValueError as exc:
        raise MalformedRecord(str(exc), lineno, str(path)) from None


def read_triples(path: str | Path) -> tuple[list[Triple], int]:
    path = Path(path)
    seen: set[Triple] = set()
    out: list[Triple] = []
    dups = 0
    for lineno, obj in iter_jsonl(path):
        t = _triple_from_record(obj, lineno, path)
        if t in seen:
            dups += 1
            continue
        seen.add(t)
        out.append(t)
    return out, dups


def read_entities(path: str | Path) -> list[EntityMeta]:
    path = Path(path)
    out = []
    for lineno, obj in iter_jsonl(path):
        ent_id = normalize_text(require(obj, "id", lineno, path))
        if not ent_id:
            raise MalformedRecord("entity id is empty", lineno, str(path))
        label = normalize_text(obj.get("label") or ent_id)
        category = obj.get("category") or ""
        if not isinstance(category, str):
            raise MalformedRecord("field 'category' must be a string", lineno, str(path))
        try:
            gender = Gender.from_code(obj.get("gender"))
        except ValueError:
            raise MalformedRecord(f"unknown gender code {obj.get('gender')!r}", lineno, str(path)) from None
        out.append(EntityMeta(ent_id, label, category, gender))
    return out


def read_verbalizations(path: str | Path) -> dict[Triple, list[str]]:
    path = Path(path)
    out: dict[Triple, list[str]] = {}
    for lineno, obj in iter_jsonl(path):
        t = _triple_from_record(obj, lineno, path)
        questions = require(obj, "questions", lineno, path, list)
        if not questions or not all(isinstance(q, str) and q.strip() for q in questions):
            raise MalformedRecord("'questions' must be a non-empty list of strings", lineno, str(path))
        bucket = out.setdefault(t, [])
        for q in questions:
            q = normalize_text(q)
            if q not in bucket:
                bucket.append(q)
    return out


def load_kb(
    path: str | Path,
    entities: str | Path | None = None,
    verbalizations: str | Path | None = None,
) -> KnowledgeBase:
    """Load a KB from a triple file, or from a directory holding the three files.

    Duplicate triples are dropped and counted in ``duplicate_count``.
    """
    path = Path(path)
    if path.is_dir():
        triples_path = path / TRIPLES_FILE
        if entities is None and (path / ENTITIES_FILE).exists():
            entities = path / ENTITIES_FILE
        if verbalizations is None and (path / VERBALIZATIONS_FILE).exists():
            verbalizations = path / VERBALIZATIONS_FILE
    else:
        triples_path = path
    triples, dups = read_triples(triples_path)
    if dups:
        logger.warning("%s: dropped %d duplicate triple(s)", triples_path, dups)
    ents = read_entities(entities) if entities is not None else []
    verbs = read_verbalizations(verbalizations) if verbalizations is not None else {}
    try:
        return KnowledgeBase.build(triples, ents, verbs, duplicate_count=dups)
    except ValueError as exc:
        raise MalformedRecord(str(exc), path=str(path)) from None


def write_kb(kb: KnowledgeBase, directory: str | Path) -> Path:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    write_jsonl(directory / TRIPLES_FILE, (t.to_dict() for t in sorted(kb.triples)))
    write_jsonl(directory / ENTITIES_FILE,
                (kb.entity_meta[k].to_dict() for k in sorted(kb.entity_meta)))
    write_jsonl(directory / VERBALIZATIONS_FILE,
                ({**t.to_dict(), "questions": list(kb.verbalizations[t])}
                 for t in sorted(kb.verbalizations)))
    return directory
