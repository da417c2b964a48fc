import json

import pytest

from kgqg.context import Ablation, ContextType
from kgqg.dataset_io import PredictionRecord
from kgqg.errors import MalformedRecord
from kgqg.oracle import OraclePolicy, run_oracle, template_question
from kgqg.output_parser import Mode
from kgqg.pipeline import (
    build_input_records, evaluate_pronoun_records, evaluate_questions, evaluate_triples,
    make_instances, pair_predictions, pmap,
)
from kgqg.pronouns import InstancePronouns, aggregate_pronoun_report
from kgqg.report import emit_report, question_summary
from kgqg.triple_eval import TripleLabel, TripleVerdict, aggregate_triple_report


@pytest.fixture(scope="module")
def small(corpus):
    kb, dialogs = corpus
    return kb, make_instances(kb, dialogs[:10], seed=1, n_values=(0, 2))


def _verdicts(kb, insts, policy, seed=0):
    pairs = pair_predictions(insts, run_oracle(insts, policy, kb, seed))
    return [TripleVerdict.from_dict(v) for v in evaluate_triples(pairs, kb)]


def test_make_instances_shape(small, corpus):
    kb, insts = small
    _, dialogs = corpus
    assert len(insts) == sum(len(d.turns) for d in dialogs[:10]) * 4 * 2
    assert len({i.id for i in insts}) == len(insts)


def test_pmap_preserves_order():
    assert pmap(abs, [-3, 2, -1], jobs=2) == [3, 2, 1]


def test_perfect_policy(small):
    kb, insts = small
    rep = aggregate_triple_report(_verdicts(kb, insts, OraclePolicy.PERFECT_VERBALIZER))
    assert rep.percent(TripleLabel.EXACT_MATCH) == 100 and rep.relevant_pct == 100


def test_repeater_policy(small):
    kb, insts = small
    with_prefix = [i for i in insts if i.prefix]
    vs = _verdicts(kb, with_prefix, OraclePolicy.REPEATER)
    assert all(v.primary_label is TripleLabel.REPETITION for v in vs)


def test_hallucinator_policy(small):
    kb, insts = small
    vs = _verdicts(kb, insts, OraclePolicy.HALLUCINATOR, seed=4)
    assert all(v.primary_label is TripleLabel.NOT_IN_KB for v in vs)
    again = _verdicts(kb, insts, OraclePolicy.HALLUCINATOR, seed=4)
    assert vs == again


def test_question_only_policy(small):
    kb, insts = small
    pairs = pair_predictions(insts, run_oracle(insts, "question-only-perfect", kb))
    scores = evaluate_questions(pairs, kb, Mode.QUESTION_ONLY)
    assert all(s["tq_gleu"] is None and s["skip_reason"] == "question_only" for s in scores)
    assert all(s["quality_gleu"] == 1.0 for s in scores)


def test_template_question():
    from kgqg.kb import Triple
    assert template_question(Triple("A", "capital", "B")) == "What is the capital of A?"


def test_unknown_prediction_id(small):
    kb, insts = small
    with pytest.raises(MalformedRecord):
        pair_predictions(insts, [PredictionRecord("nope#0@kl@0", "x")])


def test_ablation_applied_at_pairing(small):
    kb, insts = small
    pairs = pair_predictions(insts[:3], run_oracle(insts[:3], "perfect", kb), Ablation.GRAPH)
    assert all(inst.ablate_graph for _, inst in pairs)


def test_build_input_records(small):
    kb, insts = small
    records, dropped = build_input_records(insts, Mode.EXTENDED, token_limit=10_000)
    assert dropped == 0 and records[0]["reference"].startswith("[TRIPLE]")
    records, _ = build_input_records(insts[:2], Mode.QUESTION_ONLY)
    assert not records[0]["reference"].startswith("[TRIPLE]")
    _, dropped = build_input_records(insts, token_limit=1)
    assert dropped == len(insts)


def test_report_files(tmp_path, small):
    kb, insts = small
    pairs = pair_predictions(insts, run_oracle(insts, "perfect", kb))
    verdicts = [TripleVerdict.from_dict(v) for v in evaluate_triples(pairs, kb)]
    good = evaluate_questions(pairs, kb)
    bad_pairs = pair_predictions(insts, run_oracle(insts, "hallucinator", kb))
    bad = evaluate_questions(bad_pairs, kb)
    pron = [InstancePronouns.from_dict(r) for r in evaluate_pronoun_records(pairs, kb)]
    json_path, tsv_path = emit_report(tmp_path, aggregate_triple_report(verdicts), {"good": good, "bad": bad},
                                      aggregate_pronoun_report(pron))
    doc = json.loads(json_path.read_text())
    assert doc["questions"]["good"]["all"]["quality_mean"] == 1.0
    assert doc["welch"][0]["t"] > 0 and doc["welch"][0]["p"] < 0.05
    header = tsv_path.read_text().splitlines()[0]
    assert header == "section\tgroup\trow\tcount\tvalue"
    assert question_summary(good)[("all", "all")]["instances"] == len(insts)


def test_empty_report(tmp_path):
    json_path, _ = emit_report(tmp_path, aggregate_triple_report([]), {"x": []})
    doc = json.loads(json_path.read_text())
    assert doc["triples"]["all"]["total"] == 0
    assert doc["questions"]["x"]["all"]["quality_mean"] is None
