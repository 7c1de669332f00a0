"""Shared text primitives: length-preserving case fold and token geometry.

The whole pipeline agrees on one definition of a token: a maximal run of
alphanumeric characters where a hyphen or apostrophe flanked by alphanumerics
on both sides is part of the run ("amphetamine-dextroamphetamine" and
"nothing's" are single tokens).  Matching and span bookkeeping rely on the
fold never changing string length, so the fold is per-character lowercase
with multi-character expansions left unfolded.
"""

from __future__ import annotations

import re

# Hyphen and both apostrophe forms may join token characters.
_JOINERS = "'’-"

TOKEN_RE = re.compile(r"[^\W_]+(?:['’-][^\W_]+)*", re.UNICODE)


def fold_text(text: str) -> str:
    """Lowercase `text` without changing its length.

    The rare code points whose lowercase form expands to multiple characters
    (e.g. U+0130) are kept as-is so character offsets stay valid.
    """
    out = []
    for ch in text:
        low = ch.lower()
        out.append(low if len(low) == 1 else ch)
    return "".join(out)


def is_token_char(text: str, k: int) -> bool:
    """True if the character at `k` belongs to a token in context."""
    ch = text[k]
    if ch.isalnum():
        return True
    if ch in _JOINERS:
        return 0 < k < len(text) - 1 and text[k - 1].isalnum() and text[k + 1].isalnum()
    return False


def token_spans(text: str) -> list[tuple[int, int]]:
    """Spans (start, end) of every token, left to right."""
    return [m.span() for m in TOKEN_RE.finditer(text)]


def is_token_boundary(text: str, k: int) -> bool:
    """True if cutting the text before position `k` does not split a token."""
    if k <= 0 or k >= len(text):
        return True
    return not (is_token_char(text, k - 1) and is_token_char(text, k))
