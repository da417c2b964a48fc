"""Stage functions shared by the CLI and the tests.

Per-item work can be spread over a process pool; results always come back in
input order and are then sorted by instance id, so ``jobs`` never changes the
bytes written.
"""
from __future__ import annotations

import functools
import math
from concurrent.futures import ProcessPoolExecutor
from typing import Callable, Iterable, Sequence, TypeVar

from .augmentation import Split, build_kplus, derive_rng, subsample_contexts
from .context import (
    Ablation,
    ContextType,
    EvalInstance,
    build_input,
    build_reference,
    filter_overlong,
    instance_sort_key,
)
from .dataset_io import Dialog, PredictionRecord
from .errors import EmptyOutput, MalformedRecord
from .kb import KnowledgeBase
from .output_parser import Mode, ParsedOutput, parse_output
from .pronouns import TimelineMode, evaluate_pronouns
from .question_eval import score_question_quality, score_triple_question
from .triple_eval import classify_triple

T = TypeVar("T")
R = TypeVar("R")


def pmap(func: Callable[[T], R], items: Sequence[T], jobs: int = 1) -> list[R]:
    if jobs <= 1 or len(items) < 2:
        return [func(x) for x in items]
    chunk = max(1, math.ceil(len(items) / (jobs * 4)))
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(func, items, chunksize=chunk))


def _dialog_instances(
    dialog_and_prefixes: tuple[Dialog, list[int]],
    kb: KnowledgeBase,
    seed: int,
    context_types: Sequence[ContextType],
    n_values: Sequence[int],
    ablation: Ablation,
) -> list[EvalInstance]:
    dialog, prefixes = dialog_and_prefixes
    graphs = {n: build_kplus(kb, dialog, n, derive_rng(seed, "kplus", dialog.id)) for n in n_values}
    out = []
    for k in prefixes:
        for ct in context_types:
            for n in n_values:
                out.append(EvalInstance(
                    dialog_id=dialog.id,
                    prefix=dialog.turns[:k],
                    context_type=ct,
                    graph=graphs[n],
                    root_entity=dialog.root_entity,
                    category=dialog.category,
                    target=dialog.turns[k],
                    ablation=ablation,
                ))
    return out


def make_instances(
    kb: KnowledgeBase,
    dialogs: Iterable[Dialog],
    seed: int,
    context_types: Sequence[ContextType] = tuple(ContextType),
    n_values: Sequence[int] = (0, 1, 2, 3),
    split: Split | str = Split.TEST,
    ablation: Ablation = Ablation.NONE,
    jobs: int = 1,
) -> list[EvalInstance]:
    """Every (dialog prefix, context type, n) condition kept by subsampling."""
    grouped: dict[str, tuple[Dialog, list[int]]] = {}
    for dialog, k in subsample_contexts(dialogs, split, seed):
        grouped.setdefault(dialog.id, (dialog, []))[1].append(k)
    work = functools.partial(_dialog_instances, kb=kb, seed=seed, context_types=tuple(context_types),
                             n_values=tuple(n_values), ablation=ablation)
    batches = pmap(work, list(grouped.values()), jobs)
    instances = [inst for batch in batches for inst in batch]
    instances.sort(key=lambda inst: instance_sort_key(inst.id))
    return instances


def build_input_records(
    instances: Iterable[EvalInstance], mode: Mode = Mode.EXTENDED, token_limit: int = 480
) -> tuple[list[dict], int]:
    kept, dropped = filter_overlong(instances, token_limit)
    records = [
        {"id": inst.id, "input": build_input(inst),
         "reference": build_reference(inst, question_only=mode is Mode.QUESTION_ONLY)}
        for inst in kept
    ]
    return records, dropped


def safe_parse(raw: str, mode: Mode) -> ParsedOutput:
    try:
        return parse_output(raw, mode)
    except EmptyOutput:
        return ParsedOutput(None, "", False, mode, question_marker_missing=True, error="empty output")


def pair_predictions(
    instances: Iterable[EvalInstance],
    predictions: Iterable[PredictionRecord],
    ablation: Ablation | None = None,
) -> list[tuple[PredictionRecord, EvalInstance]]:
    """Match each prediction to its instance; unknown ids are an error."""
    by_id = {inst.id: inst for inst in instances}
    pairs = []
    for pred in predictions:
        inst = by_id.get(pred.instance_id)
        if inst is None:
            raise MalformedRecord(f"prediction for unknown instance {pred.instance_id!r}")
        if ablation is not None:
            inst = inst.with_ablation(ablation)
        pairs.append((pred, inst))
    pairs.sort(key=lambda pair: instance_sort_key(pair[0].instance_id))
    return pairs


def _triple_worker(pair, kb: KnowledgeBase) -> dict:
    pred, inst = pair
    return classify_triple(safe_parse(pred.raw_output, Mode.EXTENDED), inst, kb).to_dict()


def _question_worker(pair, kb: KnowledgeBase, mode: Mode) -> dict:
    pred, inst = pair
    parsed = safe_parse(pred.raw_output, mode)
    tq, tq_skip = score_triple_question(parsed, kb)
    quality, q_skip = score_question_quality(parsed, inst, kb)
    return {
        "id": inst.id,
        "tq_gleu": None if tq is None else tq.value,
        "quality_gleu": None if quality is None else quality.value,
        "skip_reason": tq_skip or q_skip,
        "ablate": inst.ablation.value,
    }


def _pronoun_worker(pair, kb: KnowledgeBase, mode: Mode, timeline: TimelineMode) -> dict:
    pred, inst = pair
    return evaluate_pronouns(safe_parse(pred.raw_output, mode), inst, kb, timeline).to_dict()


def evaluate_triples(pairs, kb: KnowledgeBase, jobs: int = 1) -> list[dict]:
    return pmap(functools.partial(_triple_worker, kb=kb), pairs, jobs)


def evaluate_questions(pairs, kb: KnowledgeBase, mode: Mode = Mode.EXTENDED, jobs: int = 1) -> list[dict]:
    return pmap(functools.partial(_question_worker, kb=kb, mode=mode), pairs, jobs)


def evaluate_pronoun_records(
    pairs, kb: KnowledgeBase, mode: Mode = Mode.EXTENDED,
    timeline: TimelineMode = TimelineMode.TRIPLES, jobs: int = 1,
) -> list[dict]:
    return pmap(functools.partial(_pronoun_worker, kb=kb, mode=mode, timeline=timeline), pairs, jobs)
