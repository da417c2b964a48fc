"""Distractor sampling (K+_n graphs) and context subsampling.

Every random choice is drawn from a ``random.Random`` derived from the global
seed plus a stable key (usually the dialog id), so results do not depend on
worker count or processing order.
"""
from __future__ import annotations

import enum
import hashlib
import math
import random
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, Sequence

from .dataset_io import Dialog
from .errors import NoCandidate
from .kb import KnowledgeBase, Triple

DEFAULT_MAX_RETRIES = 100


class DistractorTag(enum.Enum):
    RELEVANT = "relevant"
    OOS_ENTITY = "oos_entity"
    OOS_PROPERTY = "oos_property"
    NOISE = "noise"


class Split(enum.Enum):
    TRAIN = "train"
    VAL = "val"
    TEST = "test"


def derive_rng(seed: int, *key: object) -> random.Random:
    """Independent RNG stream for ``(seed, *key)``; stable across processes."""
    material = repr((int(seed),) + tuple(str(k) for k in key)).encode("utf-8")
    return random.Random(int.from_bytes(hashlib.sha256(material).digest()[:8], "big"))


@dataclass(frozen=True)
class AugmentedGraph:
    order: tuple[Triple, ...]
    tags: Mapping[Triple, DistractorTag]
    n: int = 0
    skipped: int = field(default=0, compare=False)

    def __post_init__(self) -> None:
        if len(set(self.order)) != len(self.order):
            raise ValueError("graph contains duplicate triples")
        if set(self.order) != set(self.tags):
            raise ValueError("graph order and tag map disagree")

    @property
    def base(self) -> frozenset[Triple]:
        return frozenset(t for t, tag in self.tags.items() if tag is DistractorTag.RELEVANT)

    @property
    def distractors(self) -> list[tuple[Triple, DistractorTag]]:
        return [(t, self.tags[t]) for t in self.order if self.tags[t] is not DistractorTag.RELEVANT]

    def tag_of(self, t: Triple) -> DistractorTag | None:
        return self.tags.get(t)

    def __len__(self) -> int:
        return len(self.order)

    def __iter__(self):
        return iter(self.order)

    @classmethod
    def plain(cls, triples: Sequence[Triple]) -> "AugmentedGraph":
        """An unaugmented graph (K+_0) serialized in the given order."""
        return cls(tuple(triples), {t: DistractorTag.RELEVANT for t in triples}, 0)


def sample_oos_entity(
    kb: KnowledgeBase,
    graph: frozenset[Triple],
    category: str,
    rng: random.Random,
    exclude: Iterable[Triple] = (),
) -> Triple:
    """A KB triple outside ``graph`` whose subject shares the dialog's category."""
    exclude = set(exclude)
    candidates = [t for t in kb.by_subject_category(category) if t not in graph and t not in exclude]
    if not candidates:
        raise NoCandidate(f"no out-of-scope entity triple for category {category!r}")
    return rng.choice(candidates)


def sample_oos_property(
    kb: KnowledgeBase,
    graph: frozenset[Triple],
    rng: random.Random,
    exclude: Iterable[Triple] = (),
) -> Triple:
    """A KB triple outside ``graph`` whose property occurs in ``graph``."""
    exclude = set(exclude)
    candidates = [
        t
        for prop in sorted({t.property for t in graph})
        for t in kb.by_property(prop)
        if t not in graph and t not in exclude
    ]
    if not candidates:
        raise NoCandidate("no out-of-scope property triple")
    return rng.choice(candidates)


def sample_noise(
    kb: KnowledgeBase,
    graph: frozenset[Triple],
    rng: random.Random,
    exclude: Iterable[Triple] = (),
    max_retries: int = DEFAULT_MAX_RETRIES,
) -> Triple:
    """A synthetic triple recombined from KB vocabulary that is not a KB fact.

    Subject, property and object are each drawn from the values seen in that
    role. Gives up with :class:`NoCandidate` after ``max_retries`` rejections.
    """
    if not kb.subjects:
        raise NoCandidate("empty KB vocabulary")
    exclude = set(exclude)
    for _ in range(max_retries):
        t = Triple(rng.choice(kb.subjects), rng.choice(kb.properties), rng.choice(kb.objects))
        if t in graph or t in exclude or kb.contains(t):
            continue
        return t
    raise NoCandidate(f"no noise triple after {max_retries} attempts")


def build_kplus(
    kb: KnowledgeBase,
    dialog: Dialog,
    n: int,
    rng: random.Random,
    max_retries: int = DEFAULT_MAX_RETRIES,
) -> AugmentedGraph:
    """K_D plus up to ``n`` distractors of each type.

    Types are drawn round-robin (entity, property, noise) and drawing stops as
    soon as the number of distractors reaches ``|K_D|``. Slots whose sampler
    has no candidate are skipped and counted in ``skipped``.
    """
    if n < 0:
        raise ValueError("n must be >= 0")
    base = dialog.graph
    samplers: list[tuple[DistractorTag, Callable[[set[Triple]], Triple]]] = [
        (DistractorTag.OOS_ENTITY, lambda ex: sample_oos_entity(kb, base, dialog.category, rng, ex)),
        (DistractorTag.OOS_PROPERTY, lambda ex: sample_oos_property(kb, base, rng, ex)),
        (DistractorTag.NOISE, lambda ex: sample_noise(kb, base, rng, ex, max_retries)),
    ]
    drawn: list[Triple] = []
    tags = {t: DistractorTag.RELEVANT for t in base}
    skipped = 0
    cap = len(base)
    for _ in range(n):
        for tag, sampler in samplers:
            if len(drawn) >= cap:
                break
            try:
                t = sampler(set(drawn))
            except NoCandidate:
                skipped += 1
                continue
            drawn.append(t)
            tags[t] = tag
    order = sorted(base) + drawn
    rng.shuffle(order)
    return AugmentedGraph(tuple(order), tags, n, skipped)


def subsample_contexts(
    dialogs: Iterable[Dialog], split: Split | str, seed: int
) -> list[tuple[Dialog, int]]:
    """Pick dialog prefixes to turn into instances.

    A dialog of P turns has P prefixes (lengths 0..P-1). Test keeps all of
    them; train and val keep ceil(P/2), sampled without replacement.
    """
    split = Split(split)
    out = []
    for dialog in dialogs:
        p = len(dialog.turns)
        if split is Split.TEST:
            keep = list(range(p))
        else:
            keep = sorted(derive_rng(seed, "contexts", dialog.id).sample(range(p), math.ceil(p / 2)))
        out.extend((dialog, k) for k in keep)
    return out
