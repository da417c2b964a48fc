"""Deterministic stand-in models that write prediction files."""
from __future__ import annotations

import enum
from typing import Iterable

from .augmentation import DistractorTag, derive_rng, sample_noise
from .context import EvalInstance
from .dataset_io import PredictionRecord
from .errors import MissingVerbalization
from .kb import KnowledgeBase, Triple
from .markup import serialize_output


class OraclePolicy(enum.Enum):
    PERFECT_VERBALIZER = "perfect"
    REPEATER = "repeater"
    HALLUCINATOR = "hallucinator"
    QUESTION_ONLY_PERFECT = "question-only-perfect"


def template_question(t: Triple) -> str:
    return f"What is the {t.property} of {t.subject}?"


def _first_verbalization(kb: KnowledgeBase, t: Triple) -> str:
    refs = kb.verbalizations.get(t)
    if not refs:
        raise MissingVerbalization(f"no verbalization stored for {t}")
    return refs[0]


def oracle_output(inst: EvalInstance, policy: OraclePolicy, kb: KnowledgeBase, seed: int) -> str:
    if policy is OraclePolicy.PERFECT_VERBALIZER:
        t = inst.target.triple
        return serialize_output(t, _first_verbalization(kb, t))
    if policy is OraclePolicy.QUESTION_ONLY_PERFECT:
        return _first_verbalization(kb, inst.target.triple)
    if policy is OraclePolicy.REPEATER:
        if inst.prefix:
            last = inst.prefix[-1]
            return serialize_output(last.triple, last.question)
        t = next(t for t in inst.graph.order if inst.graph.tags[t] is DistractorTag.RELEVANT)
        refs = kb.verbalizations.get(t)
        return serialize_output(t, refs[0] if refs else template_question(t))
    if policy is OraclePolicy.HALLUCINATOR:
        rng = derive_rng(seed, "oracle", inst.id)
        t = sample_noise(kb, inst.graph.base, rng)
        return serialize_output(t, template_question(t))
    raise ValueError(f"unknown policy {policy!r}")


def run_oracle(
    instances: Iterable[EvalInstance], policy: OraclePolicy | str, kb: KnowledgeBase, seed: int = 0
) -> list[PredictionRecord]:
    policy = OraclePolicy(policy)
    return [PredictionRecord(inst.id, oracle_output(inst, policy, kb, seed)) for inst in instances]
