import random

import pytest
from scipy import stats as sps
from sklearn.metrics import cohen_kappa_score

from kgqg.dataset_io import AnnotationRecord
from kgqg.errors import DegenerateSample, InsufficientOverlap
from kgqg.stats import (
    agreement_table, human_eval_summary, majority_vote, mean_agreement, pairwise_agreement, welch_t_test,
)


def _labels(pairs):
    a, b = {}, {}
    for i, (x, y) in enumerate(pairs):
        a[f"i{i}"], b[f"i{i}"] = x, y
    return a, b


def test_kappa_fixture():
    pairs = [("yes", "yes")] * 4 + [("yes", "no")] + [("no", "yes")] + [("no", "no")] * 4
    res = pairwise_agreement(*_labels(pairs))
    assert res.observed == 0.8
    assert res.kappa == pytest.approx(0.6, abs=1e-15)
    assert res.n_items == 10


def test_perfect_agreement():
    res = pairwise_agreement(*_labels([("yes", "yes"), ("no", "no"), ("yes", "yes")]))
    assert res.kappa == 1.0 and res.observed == 1.0


def test_constant_labels_have_undefined_kappa():
    res = pairwise_agreement(*_labels([("yes", "yes")] * 3))
    assert res.kappa is None and res.observed == 1.0


def test_kappa_matches_sklearn():
    rng = random.Random(5)
    for _ in range(100):
        pairs = [(rng.choice("abc"), rng.choice("abc")) for _ in range(rng.randint(2, 30))]
        a, b = _labels(pairs)
        res = pairwise_agreement(a, b)
        if res.kappa is None:
            continue
        expected = cohen_kappa_score([x for x, _ in pairs], [y for _, y in pairs])
        assert res.kappa == pytest.approx(expected, abs=1e-12)


def test_kappa_uses_only_shared_items():
    with pytest.raises(InsufficientOverlap):
        pairwise_agreement({"a": "yes"}, {"a": "no", "b": "yes"})
    res = pairwise_agreement({"a": "yes", "b": "no", "c": "yes"}, {"a": "yes", "b": "no", "z": "no"})
    assert res.n_items == 2


def test_majority_vote_ties():
    assert majority_vote(["no", "yes", "no"], "fluency").label == "no"
    tie = majority_vote(["low", "high"], "coherence")
    assert tie.label == "high" and tie.tie
    with pytest.raises(ValueError):
        majority_vote([], "fluency")


def test_mean_agreement_skips_undefined():
    from kgqg.stats import AgreementResult
    res = mean_agreement([AgreementResult(0.5, 0.8, 10), AgreementResult(None, 1.0, 4)])
    assert res.kappa == 0.5 and res.observed == pytest.approx(0.9) and res.n_pairs == 2


def _records():
    out = []
    for i in range(6):
        for ann in ("a1", "a2", "a3"):
            flip = (i + int(ann[1])) % 4 == 0
            out.append(AnnotationRecord(f"item{i}", ann, "no" if flip else "yes", "no",
                                        "low" if flip else "high", model="m"))
    return out


def test_agreement_table_and_summary():
    table = agreement_table(_records())
    assert set(table) == {("fluency", "m"), ("repetition", "m"), ("coherence", "m")}
    assert table[("fluency", "m")].n_pairs == 3
    summary = human_eval_summary(_records())["m"]
    assert summary["fluency"]["items"] == 6
    assert sum(summary["coherence"]["labels"].values()) == 6


def test_welch_against_scipy():
    a, b = [1, 2, 3, 4, 5], [3, 4, 5, 6, 7]
    t, p = welch_t_test(a, b)
    ref = sps.ttest_ind(a, b, equal_var=False)
    assert t == pytest.approx(-2.0, abs=1e-12)
    assert abs(t - ref.statistic) < 1e-9 and abs(p - ref.pvalue) < 1e-6


def test_welch_random_against_scipy():
    rng = random.Random(8)
    for _ in range(50):
        a = [rng.gauss(0, 1) for _ in range(rng.randint(2, 20))]
        b = [rng.gauss(0.5, 2) for _ in range(rng.randint(2, 20))]
        t, p = welch_t_test(a, b)
        ref = sps.ttest_ind(a, b, equal_var=False)
        assert t == pytest.approx(ref.statistic, rel=1e-9) and p == pytest.approx(ref.pvalue, rel=1e-6)


def test_welch_degenerate():
    with pytest.raises(DegenerateSample):
        welch_t_test([1], [1, 2])
    with pytest.raises(DegenerateSample):
        welch_t_test([1, 1], [2, 2])
