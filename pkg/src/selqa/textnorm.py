"""Answer normalization and tokenization.

One deterministic pipeline shared by uniqueness counting, exact match, and
n-gram similarity: lowercase, Unicode punctuation to spaces (so hyphenated
words split), English articles dropped as standalone words, whitespace
collapsed. Digits are preserved; "two" and "2" stay distinct.
"""

from __future__ import annotations

import unicodedata

_ARTICLES = frozenset({"a", "an", "the"})


def normalize_answer(raw: str) -> str:
    """Normalize a raw answer string; idempotent."""
    chars = []
    for ch in raw.lower():
        # Any Unicode punctuation class (Pd, Ps, Po, ...) becomes a space.
        if unicodedata.category(ch).startswith("P"):
            chars.append(" ")
        else:
            chars.append(ch)
    words = "".join(chars).split()
    return " ".join(w for w in words if w not in _ARTICLES)


def tokenize(answer: str, mode: str = "word") -> list[str]:
    """Split a normalized answer into word or character tokens.

    Word mode splits on spaces; char mode emits every non-space character.
    """
    if mode == "word":
        return answer.split()
    if mode == "char":
        return [ch for ch in answer if ch != " "]
    raise ValueError(f"unknown tokenization mode: {mode!r}")
