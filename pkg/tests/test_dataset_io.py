import json
import logging

import pytest

from kgqg.dataset_io import (
    AnnotationRecord, Dialog, PredictionRecord, Turn, load_annotations, load_dialogs,
    load_predictions, write_annotations, write_dialogs, write_predictions,
)
from kgqg.errors import LengthViolation, MalformedDialog, MalformedRecord
from kgqg.kb import Triple


def _turn(s, p, o):
    return Turn(Triple(s, p, o), f"what {p} of {s}?", o)


def test_dialog_graph_is_grounding_set(ex_dialogs):
    d = ex_dialogs["achakzai"]
    assert len(d.graph) == 5
    assert Triple("Afghanistan", "capital", "Kabul") in d.graph


def test_root_must_match_first_subject():
    with pytest.raises(MalformedDialog):
        Dialog("x", "B", "c", (_turn("A", "p", "o"),))


def test_dialog_round_trip(tmp_path, ex_dialogs):
    path = tmp_path / "d.jsonl"
    write_dialogs(path, ex_dialogs.values())
    assert load_dialogs(path) == list(ex_dialogs.values())


def test_length_bounds_warn_or_raise(tmp_path, caplog):
    d = Dialog("short", "A", "c", tuple(_turn("A", f"p{i}", "o") for i in range(3)))
    path = tmp_path / "d.jsonl"
    write_dialogs(path, [d])
    with caplog.at_level(logging.WARNING):
        assert len(load_dialogs(path)) == 1
    assert "short" in caplog.text
    with pytest.raises(LengthViolation):
        load_dialogs(path, enforce_bounds=True)


def test_turn_missing_field(tmp_path):
    path = tmp_path / "d.jsonl"
    rec = {"id": "x", "root_entity": "A", "category": "c", "turns": [{"s": "A", "p": "p", "o": "o", "q": "q?"}]}
    path.write_text(json.dumps(rec) + "\n")
    with pytest.raises(MalformedDialog):
        load_dialogs(path)


def test_predictions_round_trip(tmp_path):
    recs = [PredictionRecord("d#0@qa_nl@0", "[TRIPLE] x"), PredictionRecord("d#1@kl@2", "ünïcode")]
    path = tmp_path / "p.jsonl"
    assert write_predictions(path, recs) == 2
    assert load_predictions(path) == recs


def test_annotations_validated(tmp_path):
    recs = [AnnotationRecord("i1", "a1", "yes", "no", "high", model="m")]
    path = tmp_path / "a.jsonl"
    write_annotations(path, recs)
    assert load_annotations(path) == recs
    path.write_text(json.dumps({"item": "i", "annotator": "a", "fluency": "maybe",
                                "repetition": "no", "coherence": "low"}) + "\n")
    with pytest.raises(MalformedRecord):
        load_annotations(path)


def test_blank_lines_skipped(tmp_path):
    path = tmp_path / "p.jsonl"
    path.write_text('\n{"id": "a", "output": "b"}\n\n')
    assert len(load_predictions(path)) == 1
