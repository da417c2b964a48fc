"""Marker vocabulary, marker-aware tokenization and the linearized triple grammar."""
from __future__ import annotations

import re

from .kb import Triple

TRIPLE_OPEN = "<t>"
TRIPLE_CLOSE = "</t>"
SUBJECT = "<sj>"
PROPERTY = "<p>"
OBJECT = "<o>"
QUESTION = "<q>"
ANSWER = "<a>"
MARKERS = (TRIPLE_OPEN, TRIPLE_CLOSE, SUBJECT, PROPERTY, OBJECT, QUESTION, ANSWER)

FIELD_LABELS = ("[E]", "[TYPE]", "[LEN]", "[KB]", "[CTX]")
OUT_TRIPLE = "[TRIPLE]"
OUT_QUESTION = "[QUESTION]"
OUTPUT_MARKERS = (OUT_TRIPLE, OUT_QUESTION)

ALL_MARKERS = frozenset(MARKERS + FIELD_LABELS + OUTPUT_MARKERS)
_MARKER_RE = re.compile(
    "(" + "|".join(re.escape(m) for m in sorted(ALL_MARKERS, key=len, reverse=True)) + ")"
)


def tokenize(text: str) -> list[str]:
    """Whitespace tokens, with every marker split off as a token of its own."""
    tokens: list[str] = []
    for piece in _MARKER_RE.split(text):
        if piece in ALL_MARKERS:
            tokens.append(piece)
        else:
            tokens.extend(piece.split())
    return tokens


def token_len(text: str) -> int:
    return len(tokenize(text))


def normalize_markup(text: str) -> str:
    """Single-space every token, so ``<sj>Foo`` and ``<sj> Foo`` compare equal."""
    return " ".join(tokenize(text))


def serialize_triple(t: Triple) -> str:
    return f"{TRIPLE_OPEN} {SUBJECT} {t.subject} {PROPERTY} {t.property} {OBJECT} {t.object} {TRIPLE_CLOSE}"


def parse_triple_tokens(tokens: list[str]) -> Triple:
    """Parse ``<t> <sj> S <p> P <o> O </t>``; raise ValueError on any deviation."""
    if len(tokens) < 2 or tokens[0] != TRIPLE_OPEN or tokens[-1] != TRIPLE_CLOSE:
        raise ValueError("triple must be enclosed in <t> ... </t>")
    inner = tokens[1:-1]
    positions = [i for i, tok in enumerate(inner) if tok in ALL_MARKERS]
    found = [inner[i] for i in positions]
    if found != [SUBJECT, PROPERTY, OBJECT]:
        raise ValueError(f"expected <sj> <p> <o> inside triple, found {found}")
    bounds = positions + [len(inner)]
    slots = [" ".join(inner[bounds[k] + 1 : bounds[k + 1]]) for k in range(3)]
    for name, slot in zip(("subject", "property", "object"), slots):
        if not slot:
            raise ValueError(f"empty {name} slot")
    if positions[0] != 0:
        raise ValueError("text before <sj>")
    return Triple(*slots)


def parse_triple(text: str) -> Triple:
    return parse_triple_tokens(tokenize(text))


def serialize_output(t: Triple | None, question: str) -> str:
    """Target string of the extended model (or question-only when ``t`` is None)."""
    if t is None:
        return question
    return f"{OUT_TRIPLE} {serialize_triple(t)} {OUT_QUESTION} {question}"
