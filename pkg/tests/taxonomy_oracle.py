"""Reference classifier that re-derives every label from raw instance data."""
from __future__ import annotations

PRIORITY = ["ill_formed", "exact_match", "other_from_input_graph", "repetition",
            "oos_entity", "oos_property", "noise", "not_in_kb", "out_of_graph"]


def brute_labels(raw_triple, wellformed, inst_dict, kb_facts):
    """``raw_triple`` is an (s, p, o) tuple or None; ``inst_dict`` is the instance file record."""
    if not wellformed or raw_triple is None:
        return "ill_formed", {"ill_formed"}
    graph = [((g["s"], g["p"], g["o"]), g["tag"]) for g in inst_dict["graph"]]
    prefix = [(t["s"], t["p"], t["o"]) for t in inst_dict["prefix"]]
    tgt = inst_dict["target"]
    target = (tgt["s"], tgt["p"], tgt["o"])
    labels = set()
    if raw_triple == target:
        labels.add("exact_match")
    relevant_members = [t for t, tag in graph if tag == "relevant"]
    if raw_triple != target and raw_triple in relevant_members and raw_triple not in prefix:
        labels.add("other_from_input_graph")
    if any(raw_triple == p for p in prefix):
        labels.add("repetition")
    for t, tag in graph:
        if t == raw_triple and tag != "relevant":
            labels.add(tag)
    if raw_triple not in kb_facts:
        labels.add("not_in_kb")
    if not labels:
        labels.add("out_of_graph")
    primary = min(labels, key=PRIORITY.index)
    return primary, labels
