import pytest

from kgqg.augmentation import AugmentedGraph
from kgqg.context import (
    Ablation, ContextType, EvalInstance, build_input, context_entries, filter_overlong,
    instance_id, instance_sort_key, load_instances, parse_context, parse_instance_id,
    serialize_context, write_instances,
)
from kgqg.kb import Triple
from kgqg.markup import normalize_markup, parse_triple, serialize_triple, token_len, tokenize

from conftest import make_instance


def test_serialize_triple_examples():
    assert serialize_triple(Triple("Afghanistan", "lowest point", "Amu Darya")) == \
        "<t> <sj> Afghanistan <p> lowest point <o> Amu Darya </t>"
    assert serialize_triple(Triple("a", "b", "c")) == "<t> <sj> a <p> b <o> c </t>"


@pytest.mark.parametrize("text", [
    "<sj> a <p> b <o> c </t>",
    "<t> <sj> a <p> b <o> c",
    "<t> <sj> a <o> c </t>",
    "<t> <sj> a <p> <o> c </t>",
    "<t> <sj> a <sj> x <p> b <o> c </t>",
    "<t> junk <sj> a <p> b <o> c </t>",
])
def test_parse_triple_rejects(text):
    with pytest.raises(ValueError):
        parse_triple(text)


def test_tokenization():
    assert token_len("a b c") == 3
    assert token_len("<q> What? <a> X") == 4
    assert tokenize("<sj>Sitara") == ["<sj>", "Sitara"]
    assert normalize_markup("<q>What  is  it?") == "<q> What is it?"


def test_q_nl_example(ex_dialogs):
    prefix = ex_dialogs["achakzai"].turns[:2]
    assert serialize_context(prefix, ContextType.Q_NL) == (
        "<q> What was the field of work of Sitara Achakzai? <q> What was the cause of death of Achakzai?")


def test_kl_is_triple_concatenation(ex_dialogs):
    prefix = ex_dialogs["achakzai"].turns[:2]
    assert serialize_context(prefix, ContextType.KL) == " ".join(serialize_triple(t.triple) for t in prefix)


@pytest.mark.parametrize("ct", list(ContextType))
def test_empty_prefix(ct):
    assert serialize_context((), ct) == ""
    assert parse_context("", ct) == []


@pytest.mark.parametrize("ct", list(ContextType))
def test_context_round_trip(corpus, ct):
    _, dialogs = corpus
    for d in dialogs:
        assert parse_context(serialize_context(d.turns, ct), ct) == context_entries(d.turns, ct)


def test_combined_context_contains_parts(ex_dialogs):
    d = ex_dialogs["achakzai"]
    combined = build_input(make_instance(d, 3, ContextType.QA_NL_KL))
    for ct in (ContextType.KL, ContextType.QA_NL):
        part = tokenize(serialize_context(d.turns[:3], ct))
        it = iter(tokenize(combined))
        assert all(tok in it for tok in part)


def test_build_input_field_order(ex_dialogs):
    d = ex_dialogs["achakzai"]
    text = build_input(make_instance(d, 2))
    positions = [text.index(x) for x in ("Sitara Achakzai", "person", "[LEN] 5", "<t>", "<q>")]
    assert positions == sorted(positions)


def test_ablations(ex_dialogs):
    inst = make_instance(ex_dialogs["achakzai"], 2)
    no_ctx = inst.with_ablation(Ablation.CONTEXT)
    no_kb = inst.with_ablation(Ablation.GRAPH)
    assert build_input(no_ctx).endswith("[CTX]")
    assert "<q>" not in build_input(no_ctx)
    assert "<t>" not in build_input(no_kb) and "[LEN]" not in build_input(no_kb)
    assert no_ctx.target == no_kb.target == inst.target


def test_instance_ids():
    iid = instance_id("d#x@y", 3, ContextType.KL, 2)
    assert parse_instance_id(iid) == ("d#x@y", 3, ContextType.KL, 2)
    ids = [instance_id("d", k, ct, n) for k in (10, 2) for ct in ContextType for n in (1, 0)]
    ordered = sorted(ids, key=instance_sort_key)
    assert ordered[0] == "d#2@qa_nl@0" and ordered[-1] == "d#10@qa_nl_kl@1"


def test_instance_file_round_trip(tmp_path, ex_dialogs):
    insts = [make_instance(ex_dialogs["herschel"], k, ct) for k in range(5) for ct in ContextType]
    write_instances(tmp_path / "i.jsonl", insts)
    assert load_instances(tmp_path / "i.jsonl") == insts


def test_filter_overlong_matches_hand_count(corpus):
    kb, dialogs = corpus
    insts = [make_instance(d, k, ct) for d in dialogs for k in range(len(d.turns)) for ct in ContextType]
    limit = 60
    expected = sum(len(build_input(i).replace("<", " <").replace(">", "> ").split()) > limit for i in insts)
    kept, dropped = filter_overlong(insts, limit)
    assert dropped == expected and len(kept) + dropped == len(insts)
    with pytest.raises(ValueError):
        filter_overlong(insts, 0)


def test_graph_serialization_follows_stored_order(ex_dialogs):
    d = ex_dialogs["achakzai"]
    order = list(reversed(sorted(d.graph)))
    inst = make_instance(d, 0, graph=AugmentedGraph.plain(order))
    text = build_input(inst)
    assert text.index(order[0].property) < text.index(order[-1].property)
