"""Independent n-gram counter used as a reference for the GLEU implementation."""
from __future__ import annotations

import re


def tokens(text: str) -> list[str]:
    return re.findall(r"\w+|[^\w\s]", text.lower())


def all_ngrams(toks: list[str], max_order: int) -> list[tuple[str, ...]]:
    out = []
    for start in range(len(toks)):
        for length in range(1, max_order + 1):
            if start + length <= len(toks):
                out.append(tuple(toks[start:start + length]))
    return out


def brute_gleu(hyp: str, ref: str, max_order: int = 4) -> float:
    h = all_ngrams(tokens(hyp), max_order)
    pool = all_ngrams(tokens(ref), max_order)
    r_total = len(pool)
    matched = 0
    for g in h:
        if g in pool:
            pool.remove(g)
            matched += 1
    if not h or not r_total:
        return 1.0 if not h and not r_total else 0.0
    return min(matched / len(h), matched / r_total)
