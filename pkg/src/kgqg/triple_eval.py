"""Relevance/factuality taxonomy for predicted triples, and its aggregation."""
from __future__ import annotations

import enum
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable

from .augmentation import DistractorTag
from .context import EvalInstance, parse_instance_id
from .kb import KnowledgeBase, Triple, VocabFlags
from .output_parser import Mode, ParsedOutput


class TripleLabel(enum.Enum):
    # Declaration order is the primary-label priority.
    ILL_FORMED = "ill_formed"
    EXACT_MATCH = "exact_match"
    OTHER_FROM_INPUT_GRAPH = "other_from_input_graph"
    REPETITION = "repetition"
    OOS_ENTITY_GENERATED = "oos_entity"
    OOS_PROPERTY_GENERATED = "oos_property"
    NOISE_GENERATED = "noise"
    NOT_IN_KB = "not_in_kb"
    OUT_OF_GRAPH = "out_of_graph"


PRIORITY = list(TripleLabel)
RELEVANT_LABELS = frozenset({TripleLabel.EXACT_MATCH, TripleLabel.OTHER_FROM_INPUT_GRAPH})
_TAG_LABEL = {
    DistractorTag.OOS_ENTITY: TripleLabel.OOS_ENTITY_GENERATED,
    DistractorTag.OOS_PROPERTY: TripleLabel.OOS_PROPERTY_GENERATED,
    DistractorTag.NOISE: TripleLabel.NOISE_GENERATED,
}


@dataclass(frozen=True)
class TripleVerdict:
    instance_id: str
    primary_label: TripleLabel
    all_labels: frozenset[TripleLabel]
    relevant: bool
    vocab_flags: VocabFlags | None
    triple: Triple | None = None
    oos_entity_predicate: bool = False
    oos_property_predicate: bool = False
    ablate: str = "none"

    def to_dict(self) -> dict:
        return {
            "id": self.instance_id,
            "primary": self.primary_label.value,
            "labels": [lab.value for lab in PRIORITY if lab in self.all_labels],
            "relevant": self.relevant,
            "vocab": None if self.vocab_flags is None else {
                "subject": self.vocab_flags.subj_known,
                "property": self.vocab_flags.prop_known,
                "object": self.vocab_flags.obj_known,
            },
            "oos_predicates": {"entity": self.oos_entity_predicate,
                               "property": self.oos_property_predicate},
            "triple": None if self.triple is None else self.triple.to_dict(),
            "ablate": self.ablate,
        }

    @classmethod
    def from_dict(cls, obj: dict) -> "TripleVerdict":
        vocab = obj.get("vocab")
        oos = obj.get("oos_predicates") or {}
        return cls(
            instance_id=obj["id"],
            primary_label=TripleLabel(obj["primary"]),
            all_labels=frozenset(TripleLabel(v) for v in obj["labels"]),
            relevant=bool(obj["relevant"]),
            vocab_flags=None if vocab is None else VocabFlags(
                vocab["subject"], vocab["property"], vocab["object"]),
            triple=None if obj.get("triple") is None else Triple.from_dict(obj["triple"]),
            oos_entity_predicate=bool(oos.get("entity", False)),
            oos_property_predicate=bool(oos.get("property", False)),
            ablate=obj.get("ablate", "none"),
        )


def classify_triple(parsed: ParsedOutput, inst: EvalInstance, kb: KnowledgeBase) -> TripleVerdict:
    if parsed.mode is not Mode.EXTENDED:
        raise ValueError("triple classification needs an extended-mode output")
    labels: set[TripleLabel] = set()
    t = parsed.predicted_triple
    vocab = None
    oos_entity = oos_property = False
    if not parsed.wellformed_triple or t is None:
        labels.add(TripleLabel.ILL_FORMED)
        t = None
    else:
        base = inst.graph.base
        used = inst.prefix_triples
        in_kb = kb.contains(t)
        if t == inst.target.triple:
            labels.add(TripleLabel.EXACT_MATCH)
        elif t in base and t not in used:
            labels.add(TripleLabel.OTHER_FROM_INPUT_GRAPH)
        if t in used:
            labels.add(TripleLabel.REPETITION)
        tag = inst.graph.tag_of(t)
        if tag in _TAG_LABEL:
            labels.add(_TAG_LABEL[tag])
        if not in_kb:
            labels.add(TripleLabel.NOT_IN_KB)
        if not labels:
            labels.add(TripleLabel.OUT_OF_GRAPH)
        vocab = kb.vocab_membership(t)
        if in_kb and t not in base:
            oos_entity = kb.category_of(t.subject) == inst.category
            oos_property = t.property in {b.property for b in base}
    primary = next(lab for lab in PRIORITY if lab in labels)
    return TripleVerdict(
        instance_id=inst.id,
        primary_label=primary,
        all_labels=frozenset(labels),
        relevant=primary in RELEVANT_LABELS,
        vocab_flags=vocab,
        triple=t,
        oos_entity_predicate=oos_entity,
        oos_property_predicate=oos_property,
        ablate=inst.ablation.value,
    )


def pct(count: int, total: int) -> int:
    """Integer percentage, halves rounded up; 0 when ``total`` is 0."""
    if total <= 0:
        return 0
    return (200 * count + total) // (2 * total)


@dataclass
class TripleCounts:
    total: int = 0
    relevant: int = 0
    primary: Counter = field(default_factory=Counter)
    labels: Counter = field(default_factory=Counter)
    distinct: set = field(default_factory=set)
    oos_entity_predicate: int = 0
    oos_property_predicate: int = 0
    subject_unknown: int = 0
    property_unknown: int = 0
    object_unknown: int = 0

    def add(self, v: TripleVerdict) -> None:
        self.total += 1
        self.relevant += v.relevant
        self.primary[v.primary_label] += 1
        for lab in v.all_labels:
            self.labels[lab] += 1
        if v.triple is not None:
            self.distinct.add(v.triple)
        self.oos_entity_predicate += v.oos_entity_predicate
        self.oos_property_predicate += v.oos_property_predicate
        if v.vocab_flags is not None:
            self.subject_unknown += not v.vocab_flags.subj_known
            self.property_unknown += not v.vocab_flags.prop_known
            self.object_unknown += not v.vocab_flags.obj_known

    def merge(self, other: "TripleCounts") -> "TripleCounts":
        out = TripleCounts(
            total=self.total + other.total,
            relevant=self.relevant + other.relevant,
            primary=self.primary + other.primary,
            labels=self.labels + other.labels,
            distinct=self.distinct | other.distinct,
        )
        for name in ("oos_entity_predicate", "oos_property_predicate", "subject_unknown",
                     "property_unknown", "object_unknown"):
            setattr(out, name, getattr(self, name) + getattr(other, name))
        return out

    @property
    def irrelevant(self) -> int:
        return self.total - self.relevant

    def rows(self) -> list[tuple[str, int, int | None]]:
        """(row name, count, integer percentage) in the published table order."""
        L = TripleLabel
        n = self.total
        rows: list[tuple[str, int, int | None]] = [
            ("# test examples", n, None),
            ("# distinct generated triples", len(self.distinct), None),
            ("Relevant triples", self.relevant, pct(self.relevant, n)),
            ("Exact match with target", self.primary[L.EXACT_MATCH], pct(self.primary[L.EXACT_MATCH], n)),
            ("Other triple from input graph", self.primary[L.OTHER_FROM_INPUT_GRAPH],
             pct(self.primary[L.OTHER_FROM_INPUT_GRAPH], n)),
            ("Irrelevant triples", self.irrelevant, pct(self.irrelevant, n)),
        ]
        for name, lab in (
            ("Repetitions", L.REPETITION),
            ("Out-of-scope (entity) triples", L.OOS_ENTITY_GENERATED),
            ("Out-of-scope (property) triples", L.OOS_PROPERTY_GENERATED),
            ("Noise triples", L.NOISE_GENERATED),
            ("Ill-formed triples", L.ILL_FORMED),
            ("Triples not in KB", L.NOT_IN_KB),
            ("Triples outside input graph", L.OUT_OF_GRAPH),
        ):
            rows.append((name, self.labels[lab], pct(self.labels[lab], n)))
        rows += [
            ("Out-of-scope (entity) predicate matches", self.oos_entity_predicate,
             pct(self.oos_entity_predicate, n)),
            ("Out-of-scope (property) predicate matches", self.oos_property_predicate,
             pct(self.oos_property_predicate, n)),
            ("Subject not in KB", self.subject_unknown, pct(self.subject_unknown, n)),
            ("Property not in KB", self.property_unknown, pct(self.property_unknown, n)),
            ("Object not in KB", self.object_unknown, pct(self.object_unknown, n)),
        ]
        return rows

    def to_dict(self) -> dict:
        return {
            "total": self.total,
            "distinct_triples": len(self.distinct),
            "relevant": self.relevant,
            "irrelevant": self.irrelevant,
            "primary": {lab.value: self.primary[lab] for lab in PRIORITY},
            "labels": {lab.value: self.labels[lab] for lab in PRIORITY},
            "rows": [{"name": name, "count": c, "pct": p} for name, c, p in self.rows()],
        }


@dataclass
class TripleReport:
    groups: dict[tuple[str, str], TripleCounts]

    def get(self, dimension: str = "all", value: str = "all") -> TripleCounts:
        return self.groups.get((dimension, value), TripleCounts())

    def percent(self, label: TripleLabel, dimension: str = "all", value: str = "all") -> int:
        g = self.get(dimension, value)
        return pct(g.labels[label], g.total)

    @property
    def relevant_pct(self) -> int:
        g = self.get()
        return pct(g.relevant, g.total)


def verdict_groups(instance_id: str, ablate: str) -> list[tuple[str, str]]:
    keys = [("all", "all"), ("ablate", ablate)]
    try:
        _, _, ct, n = parse_instance_id(instance_id)
    except ValueError:
        return keys
    return keys + [("context_type", ct.value), ("n", str(n))]


def aggregate_triple_report(verdicts: Iterable[TripleVerdict]) -> TripleReport:
    """Counts per label, overall and broken down by context type, n and ablation."""
    groups: dict[tuple[str, str], TripleCounts] = {}
    for v in verdicts:
        for key in verdict_groups(v.instance_id, v.ablate):
            groups.setdefault(key, TripleCounts()).add(v)
    return TripleReport(groups)
