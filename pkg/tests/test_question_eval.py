import random

import pytest
from hypothesis import given, settings, strategies as st

from kgqg.context import ContextType
from kgqg.errors import EmptyReferenceSet
from kgqg.kb import Triple
from kgqg.markup import serialize_output
from kgqg.output_parser import Mode, parse_output
from kgqg.question_eval import (
    correct_triple_pool, gleu, gleu_tokens, max_gleu, score_question_quality, score_triple_question,
)

from conftest import make_instance
from gleu_oracle import brute_gleu

WORDS = st.lists(st.sampled_from(["the", "cat", "sat", "on", "mat", "?", "a", "Cat"]), max_size=8).map(" ".join)


def test_tokens_lowercase_and_split_punctuation():
    assert gleu_tokens("Where was she born?") == ["where", "was", "she", "born", "?"]
    assert gleu_tokens("Herschel's", split_punct=False) == ["herschel's"]


def test_frozen_oracle_values():
    # brute-force enumeration: 3 shared n-grams, 3 hypothesis n-grams, 6 reference n-grams
    assert brute_gleu("the cat", "the cat sat") == 0.5
    assert brute_gleu("the cat", "the cat sat", max_order=2) == 0.6
    assert gleu("the cat", "the cat sat").value == 0.5
    assert gleu("the cat", "the cat sat", max_order=2).value == 0.6
    s = gleu("the cat", "the cat sat")
    assert (s.matched_ngrams, s.hyp_ngrams, s.ref_ngrams) == (3, 3, 6)


def test_identity_and_disjoint():
    assert gleu("Who found it?", "who found it ?").value == 1.0
    assert gleu("alpha beta", "gamma delta").value == 0.0
    assert gleu("", "").value == 1.0
    assert gleu("", "x").value == 0.0


def test_clipping():
    assert gleu("the the the", "the").value == pytest.approx(1 / 6)


def test_max_gleu_three_references():
    refs = ["What is the capital of France?", "What is the capital of Afghanistan?", "Name a river."]
    score, idx = max_gleu("what is the capital of afghanistan ?", refs)
    assert idx == 1 and score.value == 1.0
    with pytest.raises(EmptyReferenceSet):
        max_gleu("x", [])


def test_max_gleu_first_argmax():
    assert max_gleu("a b", ["a b", "a b"])[1] == 0


@settings(max_examples=200, deadline=None)
@given(WORDS, WORDS, st.integers(1, 4))
def test_matches_oracle_and_is_symmetric(h, r, order):
    v = gleu(h, r, order).value
    assert abs(v - brute_gleu(h, r, order)) < 1e-12
    assert v == gleu(r, h, order).value
    assert 0.0 <= v <= 1.0


def test_triple_question_score(ex_kb):
    parsed = parse_output(serialize_output(Triple("William Herschel", "place of burial", "Westminster Abbey"),
                                           "Where was he buried?"))
    score, skip = score_triple_question(parsed, ex_kb)
    assert skip is None and score.value == 1.0


def test_triple_question_skips(ex_kb):
    bad = parse_output("[TRIPLE] <t> <sj> a </t> [QUESTION] q?")
    assert score_triple_question(bad, ex_kb) == (None, "ill_formed")
    unknown = parse_output(serialize_output(Triple("a", "b", "c"), "q?"))
    assert score_triple_question(unknown, ex_kb) == (None, "no_verbalizations")
    qo = parse_output("q?", Mode.QUESTION_ONLY)
    assert score_triple_question(qo, ex_kb) == (None, "question_only")


def test_quality_pool_excludes_used_triples(ex_kb, ex_dialogs):
    d = ex_dialogs["herschel"]
    inst = make_instance(d, 3, ContextType.QA_NL)
    pool = correct_triple_pool(inst, ex_kb)
    assert "where was he buried?" in pool and "Who found NGC 2423?" not in pool
    parsed = parse_output("where was he buried?", Mode.QUESTION_ONLY)
    score, skip = score_question_quality(parsed, inst, ex_kb)
    assert skip is None and score.value == 1.0


def test_quality_scores_ill_formed_outputs(ex_kb, ex_dialogs):
    inst = make_instance(ex_dialogs["herschel"], 3)
    parsed = parse_output("[TRIPLE] broken [QUESTION] where was he buried?")
    score, skip = score_question_quality(parsed, inst, ex_kb)
    assert skip is None and score.value == 1.0


def test_random_pairs_against_oracle():
    rng = random.Random(11)
    vocab = "who what where is the of a capital river born ? , he she".split()
    for _ in range(300):
        h = " ".join(rng.choice(vocab) for _ in range(rng.randint(0, 12)))
        r = " ".join(rng.choice(vocab) for _ in range(rng.randint(0, 12)))
        assert abs(gleu(h, r).value - brute_gleu(h, r)) < 1e-12
