"""Third-person pronoun gender agreement and ambiguity heuristics.

The referent of every pronoun is taken to be the subject of the predicted
triple. Mentions in the dialog context come from the grounding triples of the
prefix turns, never from surface text.
"""
from __future__ import annotations

import enum
import re
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .context import EvalInstance
from .dataset_io import Turn
from .errors import NoReferent
from .kb import Gender, KnowledgeBase, Triple
from .output_parser import ParsedOutput
from .triple_eval import pct, verdict_groups

PRONOUN_GENDER = {
    "he": Gender.MASCULINE, "him": Gender.MASCULINE, "his": Gender.MASCULINE,
    "she": Gender.FEMININE, "her": Gender.FEMININE, "hers": Gender.FEMININE,
    "it": Gender.NEUTRAL, "its": Gender.NEUTRAL,
}
TABLE_FORMS = ("he", "it", "him", "she", "her")
POSSESSIVE_FORMS = ("his", "hers", "its")
_PRONOUN_RE = re.compile(r"\b(" + "|".join(sorted(PRONOUN_GENDER, key=len, reverse=True)) + r")\b",
                         re.IGNORECASE)


class TimelineMode(enum.Enum):
    TRIPLES = "triples"
    QUESTIONS_ONLY = "questions-only"


class AmbiguityReason(enum.Enum):
    NONE = "none"
    NULL_CONTEXT = "null_context"
    LAST_MENTION_MISMATCH = "last_mention_mismatch"


def detect_pronouns(question: str) -> list[str]:
    return [m.group(1).lower() for m in _PRONOUN_RE.finditer(question)]


@dataclass(frozen=True)
class MentionTimeline:
    mentions: tuple[tuple[str, Gender], ...] = ()

    def last_of(self, gender: Gender) -> str | None:
        for entity, g in reversed(self.mentions):
            if g is gender:
                return entity
        return None

    def __bool__(self) -> bool:
        return bool(self.mentions)


def build_timeline(
    prefix: Sequence[Turn], kb: KnowledgeBase, mode: TimelineMode = TimelineMode.TRIPLES
) -> MentionTimeline:
    """Subject, then object when it is a registered entity, turn by turn.

    ``questions-only`` drops objects, since they are the answers a
    questions-only context never shows.
    """
    mentions = []
    for turn in prefix:
        t = turn.triple
        mentions.append((t.subject, kb.gender_of(t.subject)))
        if mode is TimelineMode.TRIPLES and kb.is_entity(t.object):
            mentions.append((t.object, kb.gender_of(t.object)))
    return MentionTimeline(tuple(mentions))


@dataclass(frozen=True)
class PronounVerdict:
    pronoun: str
    pronoun_gender: Gender
    referent: str
    referent_gender: Gender
    gender_correct: bool
    ambiguous: bool
    ambiguity_reason: AmbiguityReason

    def to_dict(self) -> dict:
        return {
            "pronoun": self.pronoun,
            "pronoun_gender": self.pronoun_gender.value,
            "referent": self.referent,
            "referent_gender": self.referent_gender.value,
            "gender_correct": self.gender_correct,
            "ambiguous": self.ambiguous,
            "reason": self.ambiguity_reason.value,
        }

    @classmethod
    def from_dict(cls, obj: dict) -> "PronounVerdict":
        return cls(obj["pronoun"], Gender(obj["pronoun_gender"]), obj["referent"],
                   Gender(obj["referent_gender"]), obj["gender_correct"], obj["ambiguous"],
                   AmbiguityReason(obj["reason"]))


def judge_pronoun(
    pronoun: str, parsed: ParsedOutput, timeline: MentionTimeline, kb: KnowledgeBase
) -> PronounVerdict:
    if not parsed.wellformed_triple or parsed.predicted_triple is None:
        raise NoReferent(f"no predicted triple to resolve {pronoun!r} against")
    pronoun = pronoun.lower()
    p_gender = PRONOUN_GENDER[pronoun]
    referent = parsed.predicted_triple.subject
    r_gender = kb.gender_of(referent)
    correct = r_gender is Gender.OTHER or p_gender is r_gender
    if not timeline:
        reason = AmbiguityReason.NULL_CONTEXT
    elif timeline.last_of(p_gender) != referent:
        reason = AmbiguityReason.LAST_MENTION_MISMATCH
    else:
        reason = AmbiguityReason.NONE
    return PronounVerdict(pronoun, p_gender, referent, r_gender, correct,
                          reason is not AmbiguityReason.NONE, reason)


@dataclass(frozen=True)
class InstancePronouns:
    """All pronoun judgments for one generated question."""

    instance_id: str
    pronouns: tuple[str, ...]
    verdicts: tuple[PronounVerdict, ...]
    triple: Triple | None
    no_referent: bool = False
    ablate: str = "none"

    def to_dict(self) -> dict:
        return {
            "id": self.instance_id,
            "pronouns": list(self.pronouns),
            "verdicts": [v.to_dict() for v in self.verdicts],
            "triple": None if self.triple is None else self.triple.to_dict(),
            "no_referent": self.no_referent,
            "ablate": self.ablate,
        }

    @classmethod
    def from_dict(cls, obj: dict) -> "InstancePronouns":
        return cls(
            obj["id"],
            tuple(obj["pronouns"]),
            tuple(PronounVerdict.from_dict(v) for v in obj["verdicts"]),
            None if obj.get("triple") is None else Triple.from_dict(obj["triple"]),
            bool(obj.get("no_referent", False)),
            obj.get("ablate", "none"),
        )


def evaluate_pronouns(
    parsed: ParsedOutput,
    inst: EvalInstance,
    kb: KnowledgeBase,
    mode: TimelineMode = TimelineMode.TRIPLES,
) -> InstancePronouns:
    pronouns = tuple(detect_pronouns(parsed.question))
    prefix = () if inst.ablate_context else inst.prefix
    timeline = build_timeline(prefix, kb, mode)
    verdicts = []
    no_referent = False
    for p in pronouns:
        try:
            verdicts.append(judge_pronoun(p, parsed, timeline, kb))
        except NoReferent:
            no_referent = True
    triple = parsed.predicted_triple if parsed.wellformed_triple else None
    return InstancePronouns(inst.id, pronouns, tuple(verdicts), triple, no_referent,
                            inst.ablation.value)


@dataclass
class PronounCounts:
    questions: int = 0
    with_pronoun: int = 0
    forms: Counter = field(default_factory=Counter)
    judged: int = 0
    mistakes: Counter = field(default_factory=Counter)
    ambiguous: Counter = field(default_factory=Counter)
    reasons: Counter = field(default_factory=Counter)
    no_referent: int = 0
    triples: set = field(default_factory=set)
    pronominalized: set = field(default_factory=set)

    def add(self, rec: InstancePronouns) -> None:
        self.questions += 1
        if rec.pronouns:
            self.with_pronoun += 1
        self.forms.update(rec.pronouns)
        self.no_referent += rec.no_referent
        for v in rec.verdicts:
            self.judged += 1
            if not v.gender_correct:
                self.mistakes[v.pronoun] += 1
            if v.ambiguous:
                self.ambiguous[v.pronoun] += 1
                self.reasons[v.ambiguity_reason.value] += 1
        if rec.triple is not None:
            self.triples.add(rec.triple)
            if rec.pronouns:
                self.pronominalized.add(rec.triple)

    def rows(self) -> list[tuple[str, str, int, int]]:
        """(section, row, count, integer percentage) in the published table order."""
        n_pron = sum(self.forms.values())
        n_mist = sum(self.mistakes.values())
        n_amb = sum(self.ambiguous.values())
        rows = [("questions with a pronoun", "", self.with_pronoun, pct(self.with_pronoun, self.questions))]
        rows += [("questions with a pronoun", f, self.forms[f], pct(self.forms[f], n_pron)) for f in TABLE_FORMS]
        rows.append(("pronouns with gender mistakes", "", n_mist, pct(n_mist, self.judged)))
        rows += [("pronouns with gender mistakes", f, self.mistakes[f], pct(self.mistakes[f], n_mist))
                 for f in TABLE_FORMS]
        rows.append(("ambiguous pronouns", "", n_amb, pct(n_amb, self.judged)))
        rows += [("ambiguous pronouns", f, self.ambiguous[f], pct(self.ambiguous[f], n_amb))
                 for f in TABLE_FORMS]
        rows.append(("pronominalized distinct triples", "", len(self.pronominalized),
                     pct(len(self.pronominalized), len(self.triples))))
        for f in POSSESSIVE_FORMS:
            rows.append(("possessive pronouns", f, self.forms[f], pct(self.forms[f], n_pron)))
            rows.append(("possessive gender mistakes", f, self.mistakes[f], pct(self.mistakes[f], n_mist)))
            rows.append(("possessive ambiguous", f, self.ambiguous[f], pct(self.ambiguous[f], n_amb)))
        return rows

    def to_dict(self) -> dict:
        return {
            "questions": self.questions,
            "with_pronoun": self.with_pronoun,
            "pronouns": sum(self.forms.values()),
            "judged": self.judged,
            "no_referent": self.no_referent,
            "gender_mistakes": sum(self.mistakes.values()),
            "ambiguous": sum(self.ambiguous.values()),
            "ambiguity_reasons": dict(sorted(self.reasons.items())),
            "distinct_triples": len(self.triples),
            "pronominalized_distinct_triples": len(self.pronominalized),
            "rows": [{"section": s, "form": f, "count": c, "pct": p} for s, f, c, p in self.rows()],
        }

    @property
    def mistake_pct(self) -> int:
        return pct(sum(self.mistakes.values()), self.judged)

    @property
    def ambiguous_pct(self) -> int:
        return pct(sum(self.ambiguous.values()), self.judged)

    @property
    def with_pronoun_pct(self) -> int:
        return pct(self.with_pronoun, self.questions)


@dataclass
class PronounReport:
    groups: dict[tuple[str, str], PronounCounts]

    def get(self, dimension: str = "all", value: str = "all") -> PronounCounts:
        return self.groups.get((dimension, value), PronounCounts())


def aggregate_pronoun_report(records: Iterable[InstancePronouns]) -> PronounReport:
    groups: dict[tuple[str, str], PronounCounts] = {}
    for rec in records:
        for key in verdict_groups(rec.instance_id, rec.ablate):
            groups.setdefault(key, PronounCounts()).add(rec)
    return PronounReport(groups)
