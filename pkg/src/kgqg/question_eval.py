"""Sentence-level Google BLEU and the two question-scoring views built on it."""
from __future__ import annotations

import re
from collections import Counter
from dataclasses import dataclass
from typing import Sequence

from .context import EvalInstance
from .errors import EmptyReferenceSet
from .kb import KnowledgeBase
from .output_parser import Mode, ParsedOutput

DEFAULT_MAX_ORDER = 4

SKIP_ILL_FORMED = "ill_formed"
SKIP_NO_VERBALIZATIONS = "no_verbalizations"
SKIP_QUESTION_ONLY = "question_only"
SKIP_EMPTY_POOL = "empty_pool"

_WORD_PUNCT = re.compile(r"\w+|[^\w\s]")


def gleu_tokens(text: str, lowercase: bool = True, split_punct: bool = True) -> list[str]:
    if lowercase:
        text = text.lower()
    return _WORD_PUNCT.findall(text) if split_punct else text.split()


@dataclass(frozen=True)
class GleuScore:
    value: float
    matched_ngrams: int
    hyp_ngrams: int
    ref_ngrams: int
    max_order: int = DEFAULT_MAX_ORDER


def _ngram_counts(tokens: Sequence[str], max_order: int) -> Counter:
    counts: Counter = Counter()
    for n in range(1, max_order + 1):
        for i in range(len(tokens) - n + 1):
            counts[tuple(tokens[i : i + n])] += 1
    return counts


def gleu(hypothesis: str, reference: str, max_order: int = DEFAULT_MAX_ORDER, **tok) -> GleuScore:
    """min(precision, recall) over n-grams of orders 1..max_order, pooled.

    Matches are clipped by the reference count of each n-gram. Two empty
    strings score 1; one empty string against a non-empty one scores 0.
    """
    if max_order < 1:
        raise ValueError("max_order must be >= 1")
    hyp = _ngram_counts(gleu_tokens(hypothesis, **tok), max_order)
    ref = _ngram_counts(gleu_tokens(reference, **tok), max_order)
    matched = sum((hyp & ref).values())
    h_total, r_total = sum(hyp.values()), sum(ref.values())
    if h_total == 0 or r_total == 0:
        value = 1.0 if h_total == r_total == 0 else 0.0
    else:
        value = min(matched / h_total, matched / r_total)
    return GleuScore(value, matched, h_total, r_total, max_order)


def max_gleu(
    hypothesis: str, references: Sequence[str], max_order: int = DEFAULT_MAX_ORDER, **tok
) -> tuple[GleuScore, int]:
    """Best single-reference GLEU and the first index attaining it."""
    if not references:
        raise EmptyReferenceSet("no references to score against")
    best, best_i = None, -1
    for i, ref in enumerate(references):
        score = gleu(hypothesis, ref, max_order, **tok)
        if best is None or score.value > best.value:
            best, best_i = score, i
    return best, best_i


def score_triple_question(
    parsed: ParsedOutput, kb: KnowledgeBase, **kw
) -> tuple[GleuScore | None, str | None]:
    """GLEU of the question against the verbalizations of its own predicted triple."""
    if parsed.mode is Mode.QUESTION_ONLY:
        return None, SKIP_QUESTION_ONLY
    if not parsed.wellformed_triple:
        return None, SKIP_ILL_FORMED
    refs = kb.verbalizations.get(parsed.predicted_triple)
    if not refs:
        return None, SKIP_NO_VERBALIZATIONS
    return max_gleu(parsed.question, refs, **kw)[0], None


def correct_triple_pool(inst: EvalInstance, kb: KnowledgeBase) -> list[str]:
    """Verbalizations of every K_D triple not yet used in the dialog prefix."""
    used = inst.prefix_triples
    pool: list[str] = []
    seen: set[str] = set()
    for t in sorted(inst.graph.base - used):
        for q in kb.verbalizations.get(t, ()):
            if q not in seen:
                seen.add(q)
                pool.append(q)
    return pool


def score_question_quality(
    parsed: ParsedOutput, inst: EvalInstance, kb: KnowledgeBase, **kw
) -> tuple[GleuScore | None, str | None]:
    pool = correct_triple_pool(inst, kb)
    if not pool:
        return None, SKIP_EMPTY_POOL
    return max_gleu(parsed.question, pool, **kw)[0], None
