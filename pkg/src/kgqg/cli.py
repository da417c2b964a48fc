"""``kgqg`` command line: one subcommand per pipeline stage.

Settings come from flags, then an optional flat JSON config (``--config``),
then defaults. The seed falls back to ``$KGQG_SEED``.

Exit codes: 0 success, 1 validation failure, 2 I/O error.
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Sequence

from . import __version__
from .augmentation import Split
from .context import Ablation, ContextType, load_instances, write_instances
from .dataset_io import load_annotations, load_dialogs, load_predictions, write_predictions
from .errors import KgqgError
from .fixtures import synthetic_corpus, write_corpus
from .jsonl import iter_jsonl, write_jsonl
from .kb import load_kb
from .oracle import OraclePolicy, run_oracle
from .output_parser import Mode
from .pipeline import (
    build_input_records,
    evaluate_pronoun_records,
    evaluate_questions,
    evaluate_triples,
    make_instances,
    pair_predictions,
)
from .pronouns import InstancePronouns, TimelineMode, aggregate_pronoun_report
from .report import emit_report
from .stats import AgreementResult, agreement_table, human_eval_summary
from .triple_eval import TripleVerdict, aggregate_triple_report

logger = logging.getLogger("kgqg")

SEED_ENV = "KGQG_SEED"


@dataclass
class RunConfig:
    seed: int = 0
    context_types: list[ContextType] = field(default_factory=lambda: list(ContextType))
    n_values: list[int] = field(default_factory=lambda: [0, 1, 2, 3])
    token_limit: int = 480
    ablate: Ablation | None = None
    mode: Mode = Mode.EXTENDED
    split: Split = Split.TEST
    jobs: int = 1
    kb: str | None = None
    dialogs: str | None = None
    instances: str | None = None
    predictions: str | None = None
    out: str | None = None

    def validate(self) -> None:
        if not self.n_values:
            raise KgqgError("n_values must not be empty")
        if any(n not in (0, 1, 2, 3) for n in self.n_values):
            raise KgqgError(f"n values must be within 0..3, got {self.n_values}")
        if not self.context_types:
            raise KgqgError("context_types must not be empty")
        if self.token_limit < 1:
            raise KgqgError("token_limit must be >= 1")
        if self.jobs < 1:
            raise KgqgError("jobs must be >= 1")


def _split_list(values: Any) -> list[str]:
    if values is None:
        return []
    if isinstance(values, (str, int)):
        values = [values]
    out = []
    for v in values:
        out.extend(p.strip() for p in str(v).split(",") if p.strip())
    return out


def resolve_config(args: argparse.Namespace) -> RunConfig:
    """Merge flags over the config file over defaults."""
    file_cfg: dict[str, Any] = {}
    if getattr(args, "config", None):
        file_cfg = json.loads(Path(args.config).read_text(encoding="utf-8"))
        if not isinstance(file_cfg, dict):
            raise KgqgError("config file must hold a flat JSON object")
        file_cfg = {k.replace("-", "_"): v for k, v in file_cfg.items()}

    def pick(name: str, cfg_key: str | None = None):
        value = getattr(args, name, None)
        if value is not None and value != []:
            return value
        return file_cfg.get(cfg_key or name)

    cfg = RunConfig()
    seed = pick("seed")
    if seed is None:
        seed = os.environ.get(SEED_ENV)
    try:
        cfg.seed = int(seed) if seed is not None else 0
        cts = _split_list(pick("context_type", "context_types") or pick("context_type"))
        if cts:
            cfg.context_types = [ContextType(c) for c in cts]
        ns = _split_list(pick("n", "n_values") or pick("n"))
        if ns:
            cfg.n_values = sorted({int(n) for n in ns})
        if pick("token_limit") is not None:
            cfg.token_limit = int(pick("token_limit"))
        if pick("ablate") is not None:
            cfg.ablate = Ablation(pick("ablate"))
        if pick("mode") is not None:
            cfg.mode = Mode(pick("mode"))
        if pick("split") is not None:
            cfg.split = Split(pick("split"))
        if pick("jobs") is not None:
            cfg.jobs = int(pick("jobs"))
    except ValueError as exc:
        raise KgqgError(f"invalid setting: {exc}") from None
    for name in ("kb", "dialogs", "instances", "predictions", "out"):
        setattr(cfg, name, pick(name))
    cfg.validate()
    return cfg


def _need(cfg: RunConfig, *names: str) -> None:
    missing = [f"--{n}" for n in names if getattr(cfg, n) is None]
    if missing:
        raise KgqgError(f"missing required option(s): {', '.join(missing)}")


def cmd_augment(args, cfg: RunConfig) -> int:
    _need(cfg, "kb", "dialogs", "out")
    kb = load_kb(cfg.kb)
    dialogs = load_dialogs(cfg.dialogs)
    instances = make_instances(kb, dialogs, cfg.seed, cfg.context_types, cfg.n_values,
                               cfg.split, cfg.ablate or Ablation.NONE, cfg.jobs)
    n = write_instances(cfg.out, instances)
    logger.info("wrote %d instances to %s", n, cfg.out)
    return 0


def cmd_build_inputs(args, cfg: RunConfig) -> int:
    _need(cfg, "instances", "out")
    instances = load_instances(cfg.instances)
    if cfg.ablate is not None:
        instances = [inst.with_ablation(cfg.ablate) for inst in instances]
    records, dropped = build_input_records(instances, cfg.mode, cfg.token_limit)
    write_jsonl(cfg.out, records)
    total = len(records) + dropped
    ratio = dropped / total if total else 0.0
    logger.info("wrote %d inputs to %s; dropped %d overlong (%.2f%%)", len(records), cfg.out, dropped, 100 * ratio)
    return 0


def cmd_oracle(args, cfg: RunConfig) -> int:
    _need(cfg, "instances", "kb", "out")
    kb = load_kb(cfg.kb)
    preds = run_oracle(load_instances(cfg.instances), OraclePolicy(args.policy), kb, cfg.seed)
    write_predictions(cfg.out, preds)
    logger.info("wrote %d predictions to %s", len(preds), cfg.out)
    return 0


def _pairs(cfg: RunConfig):
    _need(cfg, "instances", "predictions", "kb", "out")
    kb = load_kb(cfg.kb)
    pairs = pair_predictions(load_instances(cfg.instances), load_predictions(cfg.predictions), cfg.ablate)
    return kb, pairs


def cmd_eval_triples(args, cfg: RunConfig) -> int:
    if cfg.mode is not Mode.EXTENDED:
        raise KgqgError("eval-triples needs extended-mode predictions")
    kb, pairs = _pairs(cfg)
    n = write_jsonl(cfg.out, evaluate_triples(pairs, kb, cfg.jobs))
    logger.info("wrote %d triple verdicts to %s", n, cfg.out)
    return 0


def cmd_eval_questions(args, cfg: RunConfig) -> int:
    kb, pairs = _pairs(cfg)
    n = write_jsonl(cfg.out, evaluate_questions(pairs, kb, cfg.mode, cfg.jobs))
    logger.info("wrote %d question scores to %s", n, cfg.out)
    return 0


def cmd_eval_pronouns(args, cfg: RunConfig) -> int:
    kb, pairs = _pairs(cfg)
    records = evaluate_pronoun_records(pairs, kb, cfg.mode, TimelineMode(args.timeline), cfg.jobs)
    n = write_jsonl(cfg.out, records)
    logger.info("wrote %d pronoun records to %s", n, cfg.out)
    return 0


def cmd_agreement(args, cfg: RunConfig) -> int:
    _need(cfg, "out")
    if not args.annotations:
        raise KgqgError("missing required option(s): --annotations")
    records = []
    for entry in args.annotations:
        tag, path = entry.split("=", 1) if "=" in entry else (None, entry)
        for rec in load_annotations(path):
            if tag is not None:
                rec = type(rec)(rec.item_id, rec.annotator_id, rec.fluency, rec.repetition,
                                rec.coherence, model=tag)
            records.append(rec)
    table = agreement_table(records)
    doc = {
        "agreement": [
            {"criterion": c, "model": m, "kappa": r.kappa, "observed": r.observed,
             "n_items": r.n_items, "n_pairs": r.n_pairs}
            for (c, m), r in sorted(table.items())
        ],
        "human_eval": human_eval_summary(records),
    }
    Path(cfg.out).write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    logger.info("wrote agreement for %d criterion/model pair(s) to %s", len(table), cfg.out)
    return 0


def _read_records(path: str) -> list[dict]:
    return [obj for _, obj in iter_jsonl(path)]


def cmd_report(args, cfg: RunConfig) -> int:
    _need(cfg, "out")
    triple_report = pronoun_report = agreement = human = None
    if args.triples:
        triple_report = aggregate_triple_report(TripleVerdict.from_dict(o) for o in _read_records(args.triples))
    questions = {}
    for entry in args.questions or []:
        name, path = entry.split("=", 1) if "=" in entry else (Path(entry).stem, entry)
        questions[name] = _read_records(path)
    if args.pronouns:
        pronoun_report = aggregate_pronoun_report(
            InstancePronouns.from_dict(o) for o in _read_records(args.pronouns))
    if args.agreement:
        doc = json.loads(Path(args.agreement).read_text(encoding="utf-8"))
        agreement = {(r["criterion"], r["model"]): AgreementResult(r["kappa"], r["observed"], r["n_items"], r["n_pairs"])
                     for r in doc.get("agreement", [])}
        human = doc.get("human_eval")
    json_path, tsv_path = emit_report(cfg.out, triple_report, questions, pronoun_report, agreement, human)
    logger.info("wrote %s and %s", json_path, tsv_path)
    return 0


def cmd_fixtures(args, cfg: RunConfig) -> int:
    _need(cfg, "out")
    kb, dialogs = synthetic_corpus(cfg.seed, args.count, min_turns=args.min_turns, max_turns=args.max_turns)
    write_corpus(cfg.out, kb, dialogs)
    logger.info("wrote %d triples and %d dialogs under %s", len(kb), len(dialogs), cfg.out)
    return 0


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # usage errors are validation failures
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="flat JSON object whose keys mirror the flags")
    common.add_argument("--kb", help="KB directory or triple file")
    common.add_argument("--dialogs")
    common.add_argument("--instances")
    common.add_argument("--predictions")
    common.add_argument("--out")
    common.add_argument("--seed", type=int)
    common.add_argument("--context-type", action="append", default=[],
                        help="qa_nl, q_nl, kl, qa_nl_kl (repeatable or comma separated)")
    common.add_argument("--n", action="append", default=[], help="distractors per type, 0..3")
    common.add_argument("--token-limit", type=int)
    common.add_argument("--ablate", choices=[a.value for a in Ablation])
    common.add_argument("--mode", choices=[m.value for m in Mode])
    common.add_argument("--split", choices=[s.value for s in Split])
    common.add_argument("--jobs", type=int)
    common.add_argument("-v", "--verbose", action="store_true")

    parser = _Parser(prog="kgqg", description="Knowledge-grounded question generation evaluation harness")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    sub.add_parser("augment", parents=[common], help="build K+_n evaluation instances")
    sub.add_parser("build-inputs", parents=[common], help="serialize model inputs")
    p = sub.add_parser("oracle", parents=[common], help="write predictions from a stand-in model")
    p.add_argument("--policy", default=OraclePolicy.PERFECT_VERBALIZER.value,
                   choices=[o.value for o in OraclePolicy])
    sub.add_parser("eval-triples", parents=[common], help="classify predicted triples")
    sub.add_parser("eval-questions", parents=[common], help="GLEU scores for generated questions")
    p = sub.add_parser("eval-pronouns", parents=[common], help="pronoun gender and ambiguity")
    p.add_argument("--timeline", default=TimelineMode.TRIPLES.value, choices=[t.value for t in TimelineMode])
    p = sub.add_parser("agreement", parents=[common], help="inter-annotator agreement")
    p.add_argument("--annotations", action="append", default=[], help="[MODEL=]PATH, repeatable")
    p = sub.add_parser("report", parents=[common], help="compose verdict files into report.tsv/json")
    p.add_argument("--triples")
    p.add_argument("--questions", action="append", default=[], help="[NAME=]PATH, repeatable")
    p.add_argument("--pronouns")
    p.add_argument("--agreement")
    p = sub.add_parser("fixtures", parents=[common], help="write a synthetic KB and dialog set")
    p.add_argument("--count", type=int, default=50, help="number of dialogs")
    p.add_argument("--min-turns", type=int, default=5)
    p.add_argument("--max-turns", type=int, default=8)
    return parser


COMMANDS = {
    "augment": cmd_augment,
    "build-inputs": cmd_build_inputs,
    "oracle": cmd_oracle,
    "eval-triples": cmd_eval_triples,
    "eval-questions": cmd_eval_questions,
    "eval-pronouns": cmd_eval_pronouns,
    "agreement": cmd_agreement,
    "report": cmd_report,
    "fixtures": cmd_fixtures,
}


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO,
                        format="%(levelname)s %(message)s", stream=sys.stderr)
    try:
        cfg = resolve_config(args)
        return COMMANDS[args.command](args, cfg)
    except (KgqgError, json.JSONDecodeError) as exc:
        print(f"kgqg {args.command}: error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"kgqg {args.command}: I/O error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
