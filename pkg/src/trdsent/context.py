"""Classifier input construction: sentences, target masking, context windows.

The window rule: up to ``max_chars`` of source text around the mention,
expanded symmetrically, clipped at field boundaries with the unused budget
flowing to the other side. Only the target surface is masked; any other
medication surfaces in range stay verbatim.
"""

from __future__ import annotations

from dataclasses import dataclass
from importlib import resources
from typing import TYPE_CHECKING, Sequence

from trdsent.errors import SpanOutOfBounds
from trdsent.textutil import fold_text

if TYPE_CHECKING:
    from trdsent.corpus import Post
    from trdsent.matcher import Mention

PLACEHOLDER = "<MEDICATION>"

_TERMINATORS = ".!?"
_CLOSERS = "\"')]}’”"


def _load_abbreviations() -> frozenset[str]:
    text = resources.files("trdsent.data").joinpath("abbreviations.txt").read_text(encoding="utf-8")
    words = []
    for line in text.splitlines():
        line = line.strip()
        if line and not line.startswith("#"):
            words.append(line.lower())
    return frozenset(words)


ABBREVIATIONS = _load_abbreviations()


def _word_before(text: str, k: int) -> str:
    """Maximal run of word chars (with internal periods) ending just before k."""
    j = k
    while j > 0 and (text[j - 1].isalnum() or text[j - 1] in ".'’"):
        j -= 1
    return fold_text(text[j:k]).strip(".")


def segment_sentences(text: str) -> list[tuple[int, int]]:
    """Deterministic sentence spans tiling the text.

    Breaks after '.', '!', '?' (plus closing quotes/brackets) when followed by
    whitespace, and after newlines. A period is internal when the next char is
    not whitespace (decimals, dotted abbreviations mid-token) or when the word
    before it is a known abbreviation. Trailing whitespace sticks to the
    sentence it follows; a whitespace-only prefix joins the first sentence.
    """
    n = len(text)
    if n == 0:
        return []
    breaks: list[int] = []
    i = 0
    while i < n:
        ch = text[i]
        if ch == "\n":
            j = i + 1
            while j < n and text[j].isspace():
                j += 1
            breaks.append(j)
            i = j
            continue
        if ch in _TERMINATORS:
            j = i + 1
            while j < n and text[j] in _CLOSERS:
                j += 1
            if j < n and not text[j].isspace():
                i += 1
                continue
            if ch == "." and _word_before(text, i) in ABBREVIATIONS:
                i += 1
                continue
            while j < n and text[j].isspace():
                j += 1
            breaks.append(j)
            i = j
            continue
        i += 1
    if not breaks or breaks[-1] != n:
        breaks.append(n)

    spans: list[tuple[int, int]] = []
    start = 0
    for b in breaks:
        if b > start:
            spans.append((start, b))
            start = b
    # a whitespace-only leading span belongs to the sentence after it
    merged: list[tuple[int, int]] = []
    for span in spans:
        if merged and not text[merged[-1][0] : merged[-1][1]].strip():
            merged[-1] = (merged[-1][0], span[1])
        else:
            merged.append(span)
    if len(merged) >= 2 and not text[merged[-1][0] : merged[-1][1]].strip():
        last = merged.pop()
        merged[-1] = (merged[-1][0], last[1])
    return merged


@dataclass(frozen=True)
class ContextWindow:
    mention_id: str
    masked_text: str
    window_span: tuple[int, int]  # offsets into the source field
    placeholder_offset: int  # where the placeholder starts in masked_text


def extract_window(post: "Post", mention: "Mention", max_chars: int = 1000) -> ContextWindow:
    """Mask the target surface and return its centered context window.

    The budget counts source characters (mask applied afterwards), so the
    masked text may exceed ``max_chars`` by the placeholder/surface length
    difference, never by more.
    """
    if mention.post_id != post.post_id:
        raise ValueError(f"mention {mention.mention_id} does not belong to post {post.post_id}")
    if max_chars < 1:
        raise ValueError("max_chars must be positive")
    field_text = post.title if mention.field == "title" else post.body
    s, e = mention.char_span
    if not (0 <= s < e <= len(field_text)):
        raise SpanOutOfBounds(s, e, len(field_text))

    surface_len = e - s
    budget = max(0, max_chars - surface_len)
    want_left = budget // 2
    want_right = budget - want_left
    left = min(want_left, s)
    right = min(want_right, len(field_text) - e)
    spare = budget - left - right
    grow_right = min(spare, len(field_text) - e - right)
    right += grow_right
    spare -= grow_right
    left += min(spare, s - left)

    window_start = s - left
    window_end = e + right
    masked = field_text[window_start:s] + PLACEHOLDER + field_text[e:window_end]
    return ContextWindow(
        mention_id=mention.mention_id,
        masked_text=masked,
        window_span=(window_start, window_end),
        placeholder_offset=left,
    )


def extract_windows(
    posts: Sequence["Post"], mentions: Sequence["Mention"], max_chars: int = 1000
) -> list[ContextWindow]:
    """Windows for every mention, ordered by mention_id."""
    by_id = {p.post_id: p for p in posts}
    windows = [extract_window(by_id[m.post_id], m, max_chars) for m in mentions]
    windows.sort(key=lambda w: w.mention_id)
    return windows


def unmask(window: ContextWindow, surface: str) -> str:
    """Reverse the masking; used by round-trip checks."""
    k = window.placeholder_offset
    return window.masked_text[:k] + surface + window.masked_text[k + len(PLACEHOLDER) :]
