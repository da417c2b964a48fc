"""Parse raw model outputs into a predicted triple and a question."""
from __future__ import annotations

import enum
from dataclasses import dataclass

from .errors import EmptyOutput
from .kb import Triple, normalize_text
from .markup import OUT_QUESTION, OUT_TRIPLE, TRIPLE_CLOSE, parse_triple


class Mode(enum.Enum):
    EXTENDED = "extended"
    QUESTION_ONLY = "question-only"


@dataclass(frozen=True)
class ParsedOutput:
    predicted_triple: Triple | None
    question: str
    wellformed_triple: bool
    mode: Mode
    question_marker_missing: bool = False
    error: str | None = None

    def __post_init__(self) -> None:
        if self.wellformed_triple and self.predicted_triple is None:
            raise ValueError("well-formed output must carry a triple")


def parse_output(raw: str, mode: Mode | str = Mode.EXTENDED) -> ParsedOutput:
    """Split ``[TRIPLE] <t> ... </t> [QUESTION] q`` into its parts.

    A triple-grammar violation never loses the question: it is still extracted
    on a best-effort basis and ``wellformed_triple`` is set to False. Without a
    [QUESTION] marker the question is whatever follows the last ``</t>`` (or
    the whole tail after [TRIPLE]).
    """
    mode = Mode(mode)
    if not raw or not raw.strip():
        raise EmptyOutput("model output is blank")
    if mode is Mode.QUESTION_ONLY:
        return ParsedOutput(None, normalize_text(raw), False, mode)

    error = None
    q_count = raw.count(OUT_QUESTION)
    t_count = raw.count(OUT_TRIPLE)
    if q_count:
        head, _, question = raw.partition(OUT_QUESTION)
        if q_count > 1:
            error = "multiple [QUESTION] markers"
    else:
        head = raw
        tail = raw.split(OUT_TRIPLE, 1)[1] if t_count else raw
        question = tail.rsplit(TRIPLE_CLOSE, 1)[1] if TRIPLE_CLOSE in tail else tail
        error = "missing [QUESTION] marker"

    if t_count == 0:
        error = error or "missing [TRIPLE] marker"
        triple_text = head
    else:
        if t_count > 1:
            error = error or "multiple [TRIPLE] markers"
        triple_text = head.split(OUT_TRIPLE, 1)[1]
        if head.split(OUT_TRIPLE, 1)[0].strip():
            error = error or "text before [TRIPLE]"

    triple = None
    if error is None:
        try:
            triple = parse_triple(triple_text)
        except ValueError as exc:
            error = str(exc)
    return ParsedOutput(
        predicted_triple=triple,
        question=normalize_text(question),
        wellformed_triple=triple is not None,
        mode=mode,
        question_marker_missing=q_count == 0,
        error=error,
    )
