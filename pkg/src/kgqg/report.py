"""Unified report: ``report.json`` plus a flat ``report.tsv``.

Everything here is recomputed from verdict/score files; no other state feeds it.
"""
from __future__ import annotations

import itertools
import json
import math
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .errors import DegenerateSample
from .pronouns import PronounReport
from .stats import AgreementResult, welch_t_test
from .triple_eval import TripleReport, verdict_groups

DIMENSION_ORDER = {"all": 0, "context_type": 1, "n": 2, "ablate": 3}
EMPTY_QUESTION_SUMMARY = {"instances": 0, "tq_scored": 0, "tq_skipped": 0, "tq_mean": None,
                          "quality_scored": 0, "quality_skipped": 0, "quality_mean": None}


def _sorted_groups(keys: Iterable[tuple[str, str]]) -> list[tuple[str, str]]:
    return sorted(keys, key=lambda k: (DIMENSION_ORDER.get(k[0], 9), k[1]))


def _group_name(key: tuple[str, str]) -> str:
    return "all" if key[0] == "all" else f"{key[0]}={key[1]}"


def _mean(values: Sequence[float]) -> float | None:
    return math.fsum(values) / len(values) if values else None


def question_summary(scores: Iterable[Mapping]) -> dict[tuple[str, str], dict]:
    """Mean GLEU per group; skipped (null) scores are counted, not averaged."""
    buckets: dict[tuple[str, str], dict[str, list]] = {}
    for rec in scores:
        for key in verdict_groups(rec["id"], rec.get("ablate", "none")):
            b = buckets.setdefault(key, {"tq": [], "quality": [], "tq_skipped": 0, "quality_skipped": 0})
            for field, name in (("tq_gleu", "tq"), ("quality_gleu", "quality")):
                if rec.get(field) is None:
                    b[f"{name}_skipped"] += 1
                else:
                    b[name].append(float(rec[field]))
    out = {}
    for key, b in buckets.items():
        out[key] = {
            "instances": len(b["tq"]) + b["tq_skipped"],
            "tq_scored": len(b["tq"]),
            "tq_skipped": b["tq_skipped"],
            "tq_mean": _mean(b["tq"]),
            "quality_scored": len(b["quality"]),
            "quality_skipped": b["quality_skipped"],
            "quality_mean": _mean(b["quality"]),
        }
    return out


def _fmt(x: float | None) -> str:
    return "" if x is None else f"{x:.4f}"


def emit_report(
    out_dir: str | Path,
    triple_report: TripleReport | None = None,
    question_scores: Mapping[str, Sequence[Mapping]] | None = None,
    pronoun_report: PronounReport | None = None,
    agreement: Mapping[tuple[str, str], AgreementResult] | None = None,
    human_eval: Mapping | None = None,
    config: Mapping | None = None,
) -> tuple[Path, Path]:
    """Write ``report.json`` and ``report.tsv`` into ``out_dir``.

    ``question_scores`` maps a condition name to its score records; with two or
    more conditions a Welch test on quality GLEU is added for every pair.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    doc: dict = {}
    tsv: list[list[str]] = [["section", "group", "row", "count", "value"]]

    if config:
        doc["config"] = dict(config)

    if triple_report is not None:
        section = {}
        for key in _sorted_groups(triple_report.groups) or [("all", "all")]:
            counts = triple_report.get(*key)
            section[_group_name(key)] = counts.to_dict()
            for name, count, p in counts.rows():
                tsv.append(["triples", _group_name(key), name, str(count), "" if p is None else f"{p}%"])
        doc["triples"] = section

    question_scores = question_scores or {}
    if question_scores:
        section = {}
        for cond, scores in question_scores.items():
            summary = question_summary(scores)
            cond_doc = {}
            for key in _sorted_groups(summary) or [("all", "all")]:
                s = summary.get(key, EMPTY_QUESTION_SUMMARY)
                cond_doc[_group_name(key)] = s
                group = f"{cond}:{_group_name(key)}"
                tsv.append(["questions", group, "triple-question GLEU mean", str(s["tq_scored"]), _fmt(s["tq_mean"])])
                tsv.append(["questions", group, "triple-question GLEU skipped", str(s["tq_skipped"]), ""])
                tsv.append(["questions", group, "quality GLEU mean", str(s["quality_scored"]), _fmt(s["quality_mean"])])
                tsv.append(["questions", group, "quality GLEU skipped", str(s["quality_skipped"]), ""])
            section[cond] = cond_doc
        doc["questions"] = section

    if len(question_scores) >= 2:
        tests = []
        for a, b in itertools.combinations(list(question_scores), 2):
            xa = [float(r["quality_gleu"]) for r in question_scores[a] if r.get("quality_gleu") is not None]
            xb = [float(r["quality_gleu"]) for r in question_scores[b] if r.get("quality_gleu") is not None]
            entry = {"a": a, "b": b, "n_a": len(xa), "n_b": len(xb),
                     "mean_a": _mean(xa), "mean_b": _mean(xb), "t": None, "p": None, "error": None}
            try:
                entry["t"], entry["p"] = welch_t_test(xa, xb)
            except DegenerateSample as exc:
                entry["error"] = str(exc)
            tests.append(entry)
            tsv.append(["welch", f"{a} vs {b}", "t", f"{len(xa)}/{len(xb)}",
                        "" if entry["t"] is None else f"{entry['t']:.6g}"])
            tsv.append(["welch", f"{a} vs {b}", "p", "", "" if entry["p"] is None else f"{entry['p']:.6g}"])
        doc["welch"] = tests

    if pronoun_report is not None:
        section = {}
        for key in _sorted_groups(pronoun_report.groups) or [("all", "all")]:
            counts = pronoun_report.get(*key)
            section[_group_name(key)] = counts.to_dict()
            for sec, form, count, p in counts.rows():
                row = sec if not form else f"{sec}: {form}"
                tsv.append(["pronouns", _group_name(key), row, str(count), f"{p}%"])
        doc["pronouns"] = section

    if agreement is not None:
        rows = []
        for (criterion, model), res in sorted(agreement.items()):
            rows.append({"criterion": criterion, "model": model, "kappa": res.kappa,
                         "observed": res.observed, "n_items": res.n_items, "n_pairs": res.n_pairs})
            label = f"{criterion} ({model})" if model else criterion
            tsv.append(["agreement", label, "kappa", str(res.n_items), _fmt(res.kappa)])
            tsv.append(["agreement", label, "observed", str(res.n_items), _fmt(res.observed)])
        doc["agreement"] = rows
    if human_eval is not None:
        doc["human_eval"] = human_eval

    json_path = out_dir / "report.json"
    tsv_path = out_dir / "report.tsv"
    json_path.write_text(json.dumps(doc, indent=2, sort_keys=True, ensure_ascii=False) + "\n", encoding="utf-8")
    tsv_path.write_text("".join("\t".join(r) + "\n" for r in tsv), encoding="utf-8")
    return json_path, tsv_path
