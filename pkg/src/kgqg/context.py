"""Dialog-context serialization, evaluation instances and model-input assembly."""
from __future__ import annotations

import enum
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Iterator, NamedTuple, Sequence

from .augmentation import AugmentedGraph, DistractorTag
from .dataset_io import Turn
from .errors import MalformedRecord
from .jsonl import iter_jsonl, require, write_jsonl
from .kb import Triple
from .markup import (
    ANSWER,
    QUESTION,
    TRIPLE_CLOSE,
    TRIPLE_OPEN,
    parse_triple_tokens,
    serialize_output,
    serialize_triple,
    tokenize,
    token_len,
)

DEFAULT_TOKEN_LIMIT = 480


class ContextType(enum.Enum):
    QA_NL = "qa_nl"
    Q_NL = "q_nl"
    KL = "kl"
    QA_NL_KL = "qa_nl_kl"


CONTEXT_ORDER = {ct: i for i, ct in enumerate(ContextType)}


class Ablation(enum.Enum):
    NONE = "none"
    GRAPH = "graph"
    CONTEXT = "context"


class ContextEntry(NamedTuple):
    """One turn as recoverable from a serialized context (absent parts are None)."""

    triple: Triple | None
    question: str | None
    answer: str | None


def context_entries(prefix: Sequence[Turn], ct: ContextType) -> list[ContextEntry]:
    """What ``parse_context`` should recover for ``prefix`` under ``ct``."""
    with_triple = ct in (ContextType.KL, ContextType.QA_NL_KL)
    with_q = ct is not ContextType.KL
    with_a = ct in (ContextType.QA_NL, ContextType.QA_NL_KL)
    return [
        ContextEntry(
            turn.triple if with_triple else None,
            turn.question if with_q else None,
            turn.answer if with_a else None,
        )
        for turn in prefix
    ]


def serialize_context(prefix: Sequence[Turn], ct: ContextType) -> str:
    parts: list[str] = []
    for entry in context_entries(prefix, ct):
        if entry.triple is not None:
            parts.append(serialize_triple(entry.triple))
        if entry.question is not None:
            parts += [QUESTION, entry.question]
        if entry.answer is not None:
            parts.append(ANSWER)
            if entry.answer:
                parts.append(entry.answer)
    return " ".join(parts)


def parse_context(text: str, ct: ContextType) -> list[ContextEntry]:
    """Inverse of :func:`serialize_context`."""
    tokens = tokenize(text)
    starter = TRIPLE_OPEN if ct in (ContextType.KL, ContextType.QA_NL_KL) else QUESTION
    groups: list[list[str]] = []
    for tok in tokens:
        if tok == starter or not groups:
            if tok != starter:
                raise ValueError(f"context must start with {starter}")
            groups.append([])
        groups[-1].append(tok)

    entries = []
    for group in groups:
        triple = question = answer = None
        rest = group
        if starter == TRIPLE_OPEN:
            close = group.index(TRIPLE_CLOSE)
            triple = parse_triple_tokens(group[: close + 1])
            rest = group[close + 1 :]
        if rest:
            if rest[0] != QUESTION:
                raise ValueError(f"unexpected token {rest[0]!r} in context")
            if ANSWER in rest:
                cut = rest.index(ANSWER)
                question = " ".join(rest[1:cut])
                answer = " ".join(rest[cut + 1 :])
            else:
                question = " ".join(rest[1:])
        entries.append(ContextEntry(triple, question, answer))
    return entries


def instance_id(dialog_id: str, prefix_len: int, ct: ContextType, n: int) -> str:
    return f"{dialog_id}#{prefix_len}@{ct.value}@{n}"


def parse_instance_id(iid: str) -> tuple[str, int, ContextType, int]:
    head, ct, n = iid.rsplit("@", 2)
    dialog_id, prefix_len = head.rsplit("#", 1)
    return dialog_id, int(prefix_len), ContextType(ct), int(n)


def instance_sort_key(iid: str) -> tuple:
    try:
        dialog_id, prefix_len, ct, n = parse_instance_id(iid)
    except ValueError:
        return (iid, -1, -1, -1)
    return (dialog_id, prefix_len, CONTEXT_ORDER[ct], n)


@dataclass(frozen=True)
class EvalInstance:
    dialog_id: str
    prefix: tuple[Turn, ...]
    context_type: ContextType
    graph: AugmentedGraph
    root_entity: str
    category: str
    target: Turn
    ablation: Ablation = Ablation.NONE

    @property
    def id(self) -> str:
        return instance_id(self.dialog_id, self.prefix_len, self.context_type, self.n)

    @property
    def prefix_len(self) -> int:
        return len(self.prefix)

    @property
    def n(self) -> int:
        return self.graph.n

    @property
    def ablate_graph(self) -> bool:
        return self.ablation is Ablation.GRAPH

    @property
    def ablate_context(self) -> bool:
        return self.ablation is Ablation.CONTEXT

    @property
    def prefix_triples(self) -> frozenset[Triple]:
        return frozenset(turn.triple for turn in self.prefix)

    def with_ablation(self, ablation: Ablation) -> "EvalInstance":
        return EvalInstance(self.dialog_id, self.prefix, self.context_type, self.graph,
                            self.root_entity, self.category, self.target, ablation)

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "root_entity": self.root_entity,
            "category": self.category,
            "graph": [{**t.to_dict(), "tag": self.graph.tags[t].value} for t in self.graph.order],
            "prefix_len": self.prefix_len,
            "context_type": self.context_type.value,
            "target": self.target.to_dict(),
            "prefix": [turn.to_dict() for turn in self.prefix],
            "n": self.n,
            "ablate": self.ablation.value,
        }

    @classmethod
    def from_dict(cls, obj: dict) -> "EvalInstance":
        dialog_id, prefix_len, ct, n = parse_instance_id(obj["id"])
        if ct.value != obj.get("context_type", ct.value) or n != obj.get("n", n):
            raise ValueError("instance id disagrees with context_type/n fields")
        order, tags = [], {}
        for g in obj["graph"]:
            t = Triple.from_dict(g)
            order.append(t)
            tags[t] = DistractorTag(g["tag"])
        prefix = tuple(Turn.from_dict(t) for t in obj.get("prefix", []))
        if len(prefix) != obj.get("prefix_len", prefix_len) or len(prefix) != prefix_len:
            raise ValueError("prefix length disagrees with instance id")
        return cls(
            dialog_id=dialog_id,
            prefix=prefix,
            context_type=ct,
            graph=AugmentedGraph(tuple(order), tags, n),
            root_entity=obj["root_entity"],
            category=obj["category"],
            target=Turn.from_dict(obj["target"]),
            ablation=Ablation(obj.get("ablate", "none")),
        )


def iter_instances(path: str | Path) -> Iterator[EvalInstance]:
    path = Path(path)
    for lineno, obj in iter_jsonl(path):
        for key in ("id", "root_entity", "category", "graph", "target"):
            require(obj, key, lineno, path, list if key == "graph" else (dict if key == "target" else str))
        try:
            yield EvalInstance.from_dict(obj)
        except (KeyError, ValueError, TypeError) as exc:
            raise MalformedRecord(f"bad instance: {exc}", lineno, str(path)) from None


def load_instances(path: str | Path) -> list[EvalInstance]:
    return list(iter_instances(path))


def write_instances(path: str | Path, instances: Iterable[EvalInstance]) -> int:
    return write_jsonl(path, (inst.to_dict() for inst in instances))


def serialize_graph(graph: AugmentedGraph) -> str:
    return " ".join(serialize_triple(t) for t in graph.order)


def build_input(inst: EvalInstance) -> str:
    """``[E] e [TYPE] T_e [LEN] n [KB] <graph> [CTX] <context>``.

    Graph ablation drops the [LEN] and [KB] fields; context ablation leaves
    [CTX] empty.
    """
    parts = ["[E]", inst.root_entity, "[TYPE]", inst.category]
    if not inst.ablate_graph:
        parts += ["[LEN]", str(len(inst.graph)), "[KB]", serialize_graph(inst.graph)]
    parts.append("[CTX]")
    if not inst.ablate_context:
        ctx = serialize_context(inst.prefix, inst.context_type)
        if ctx:
            parts.append(ctx)
    return " ".join(p for p in parts if p)


def build_reference(inst: EvalInstance, question_only: bool = False) -> str:
    return serialize_output(None if question_only else inst.target.triple, inst.target.question)


def filter_overlong(
    instances: Iterable[EvalInstance], limit: int = DEFAULT_TOKEN_LIMIT
) -> tuple[list[EvalInstance], int]:
    if limit < 1:
        raise ValueError("token limit must be >= 1")
    kept, dropped = [], 0
    for inst in instances:
        if token_len(build_input(inst)) > limit:
            dropped += 1
        else:
            kept.append(inst)
    return kept, dropped
