"""Annotation aggregation, inter-annotator agreement and Welch's t-test."""
from __future__ import annotations

import itertools
import math
import statistics
from collections import Counter, defaultdict
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from scipy import stats as sps

from .dataset_io import CRITERIA, AnnotationRecord
from .errors import DegenerateSample, InsufficientOverlap


@dataclass(frozen=True)
class MajorityVote:
    label: str
    tie: bool
    votes: int


def majority_vote(votes: Iterable[AnnotationRecord | str], criterion: str) -> MajorityVote:
    """Most frequent label; ties go to the earliest label in the criterion's scale
    (yes before no, high before medium before low) and are flagged."""
    order = CRITERIA[criterion]
    labels = [v if isinstance(v, str) else v.label(criterion) for v in votes]
    if not labels:
        raise ValueError("majority vote needs at least one vote")
    counts = Counter(labels)
    top = max(counts.values())
    winners = [lab for lab in order if counts.get(lab) == top]
    return MajorityVote(winners[0], len(winners) > 1, len(labels))


@dataclass(frozen=True)
class AgreementResult:
    kappa: float | None
    observed: float
    n_items: int
    n_pairs: int = 1


def pairwise_agreement(ann_a: Mapping[str, str], ann_b: Mapping[str, str]) -> AgreementResult:
    """Cohen's kappa and observed agreement on the items both annotators labelled.

    kappa is None when chance agreement is 1 (both annotators used one and the
    same label throughout).
    """
    items = sorted(set(ann_a) & set(ann_b))
    if len(items) < 2:
        raise InsufficientOverlap(f"only {len(items)} co-annotated item(s)")
    n = len(items)
    agree = sum(ann_a[i] == ann_b[i] for i in items)
    ca = Counter(ann_a[i] for i in items)
    cb = Counter(ann_b[i] for i in items)
    p_o = Fraction(agree, n)
    p_e = sum(Fraction(ca[k] * cb[k], n * n) for k in ca.keys() | cb.keys())
    kappa = None if p_e == 1 else float((p_o - p_e) / (1 - p_e))
    return AgreementResult(kappa, float(p_o), n)


def mean_agreement(results: Sequence[AgreementResult]) -> AgreementResult:
    """Unweighted mean over annotator pairs (undefined kappas are left out)."""
    if not results:
        raise InsufficientOverlap("no annotator pair to average")
    kappas = [r.kappa for r in results if r.kappa is not None]
    return AgreementResult(
        kappa=statistics.fmean(kappas) if kappas else None,
        observed=statistics.fmean(r.observed for r in results),
        n_items=sum(r.n_items for r in results),
        n_pairs=len(results),
    )


def agreement_table(records: Iterable[AnnotationRecord]) -> dict[tuple[str, str], AgreementResult]:
    """Mean pairwise agreement keyed by (criterion, model tag).

    Pairs sharing fewer than two items are dropped.
    """
    by_model: dict[str, dict[str, dict[str, AnnotationRecord]]] = defaultdict(lambda: defaultdict(dict))
    for rec in records:
        by_model[rec.model][rec.annotator_id][rec.item_id] = rec
    out = {}
    for model in sorted(by_model):
        annotators = by_model[model]
        for criterion in CRITERIA:
            pairs = []
            for a, b in itertools.combinations(sorted(annotators), 2):
                la = {i: r.label(criterion) for i, r in annotators[a].items()}
                lb = {i: r.label(criterion) for i, r in annotators[b].items()}
                try:
                    pairs.append(pairwise_agreement(la, lb))
                except InsufficientOverlap:
                    continue
            if pairs:
                out[(criterion, model)] = mean_agreement(pairs)
    return out


def human_eval_summary(records: Iterable[AnnotationRecord]) -> dict[str, dict]:
    """Per model: distribution of majority-vote labels per criterion, plus tie counts."""
    items: dict[str, dict[str, list[AnnotationRecord]]] = defaultdict(lambda: defaultdict(list))
    for rec in records:
        items[rec.model][rec.item_id].append(rec)
    out = {}
    for model in sorted(items):
        summary = {}
        for criterion, scale in CRITERIA.items():
            votes = [majority_vote(recs, criterion) for _, recs in sorted(items[model].items())]
            counts = Counter(v.label for v in votes)
            summary[criterion] = {
                "items": len(votes),
                "labels": {lab: counts[lab] for lab in scale},
                "ratios": {lab: counts[lab] / len(votes) for lab in scale},
                "ties": sum(v.tie for v in votes),
            }
        out[model] = summary
    return out


def welch_t_test(sample_a: Sequence[float], sample_b: Sequence[float]) -> tuple[float, float]:
    """Two-sided unequal-variance t-test; returns (t, p)."""
    na, nb = len(sample_a), len(sample_b)
    if na < 2 or nb < 2:
        raise DegenerateSample("each sample needs at least two values")
    va, vb = statistics.variance(sample_a), statistics.variance(sample_b)
    if va == 0 and vb == 0:
        raise DegenerateSample("both samples have zero variance")
    sa, sb = va / na, vb / nb
    t = (statistics.fmean(sample_a) - statistics.fmean(sample_b)) / math.sqrt(sa + sb)
    df = (sa + sb) ** 2 / (sa**2 / (na - 1) + sb**2 / (nb - 1))
    p = float(2 * sps.t.sf(abs(t), df))
    return t, min(p, 1.0)
