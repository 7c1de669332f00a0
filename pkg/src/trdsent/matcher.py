"""Surface-form detection: whole-token lexicon matching over post text.

Matching is case-insensitive (length-preserving fold), whole-token or whole
multiword expression only, with overlaps resolved longest-match-wins and ties
to the leftmost candidate. Title and body are scanned independently; spans are
offsets into their own field.

The inner scan runs on a compiled kernel when the extension module built, on a
pure-Python kernel otherwise; set TRDSENT_FORCE_PY_SCAN=1 to force the
fallback (the benchmark uses this).
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from typing import Mapping, Sequence

from trdsent._automaton import CompiledAutomaton, build_automaton
from trdsent._scan_py import find_hits as _find_hits_py
from trdsent.context import segment_sentences
from trdsent.corpus import Post
from trdsent.lexicon import Lexicon
from trdsent.textutil import fold_text, is_token_boundary, token_spans

try:
    from trdsent._scan import find_hits as _find_hits_c
except ImportError:
    _find_hits_c = None


def scan_backend() -> str:
    if os.environ.get("TRDSENT_FORCE_PY_SCAN") == "1" or _find_hits_c is None:
        return "python"
    return "compiled"


@dataclass(frozen=True)
class Token:
    text: str
    char_span: tuple[int, int]


@dataclass(frozen=True)
class TokenStream:
    tokens: tuple[Token, ...]


def tokenize(text: str) -> TokenStream:
    """Alphanumeric runs, internal hyphens/apostrophes included, with spans."""
    return TokenStream(
        tokens=tuple(Token(text=text[a:b], char_span=(a, b)) for a, b in token_spans(text))
    )


@dataclass(frozen=True)
class Mention:
    mention_id: str
    post_id: str
    generic_name: str
    surface: str  # text exactly as it appeared
    char_span: tuple[int, int]  # offsets into the mention's own field
    field: str  # "title" | "body"
    sentence_index: int


def resolve_overlaps(candidates: Sequence[tuple[int, int]]) -> list[tuple[int, int]]:
    """Keep a non-overlapping subset: longest span wins, ties to the leftmost."""
    kept: list[tuple[int, int]] = []
    for s, e in sorted(candidates, key=lambda c: (c[0] - c[1], c[0])):
        if all(e <= ks or s >= ke for ks, ke in kept):
            kept.append((s, e))
    kept.sort()
    return kept


class MentionMatcher:
    """Automaton compiled once per lexicon; scanning is then pure per post."""

    def __init__(self, lexicon: Lexicon):
        self.lexicon = lexicon
        self.automaton: CompiledAutomaton = build_automaton(lexicon.surface_index.keys())
        use_py = (
            os.environ.get("TRDSENT_FORCE_PY_SCAN") == "1"
            or _find_hits_c is None
            or not self.automaton.bmp_only
        )
        self._find_hits = _find_hits_py if use_py else _find_hits_c

    def match_field(self, text: str) -> list[tuple[int, int]]:
        """Resolved whole-token surface spans within one field's text."""
        folded = fold_text(text)
        candidates = [
            (s, e)
            for s, e in self._find_hits(folded, self.automaton)
            if is_token_boundary(folded, s) and is_token_boundary(folded, e)
        ]
        return resolve_overlaps(candidates)

    def match_post(self, post: Post) -> list[Mention]:
        mentions: list[Mention] = []
        ordinal = 0
        for field_name, text in (("title", post.title), ("body", post.body)):
            if not text:
                continue
            spans = self.match_field(text)
            if not spans:
                continue
            folded = fold_text(text)
            sentences = segment_sentences(text)
            for s, e in spans:
                mentions.append(
                    Mention(
                        mention_id=f"{post.post_id}:{ordinal:04d}",
                        post_id=post.post_id,
                        generic_name=self.lexicon.surface_index[folded[s:e]],
                        surface=text[s:e],
                        char_span=(s, e),
                        field=field_name,
                        sentence_index=_sentence_of(sentences, s),
                    )
                )
                ordinal += 1
        return mentions


def _sentence_of(sentences: Sequence[tuple[int, int]], pos: int) -> int:
    for i, (a, b) in enumerate(sentences):
        if a <= pos < b:
            return i
    return max(len(sentences) - 1, 0)


def match_mentions(post: Post, lexicon: Lexicon | MentionMatcher) -> list[Mention]:
    """One-post convenience wrapper; bulk callers should build the matcher once."""
    matcher = lexicon if isinstance(lexicon, MentionMatcher) else MentionMatcher(lexicon)
    return matcher.match_post(post)


def match_corpus(posts: Sequence[Post], matcher: MentionMatcher) -> list[Mention]:
    """All mentions, ordered by (post order, field, start)."""
    out: list[Mention] = []
    for post in posts:
        out.extend(matcher.match_post(post))
    return out


@dataclass(frozen=True)
class EntityFrequency:
    generic_name: str
    mentions: int
    subscribers: int  # distinct authors mentioning this entity
    reach: float  # subscribers / universe


@dataclass(frozen=True)
class FrequencyTable:
    rows: tuple[EntityFrequency, ...]
    subscriber_universe: int  # distinct authors with >= 1 mention of anything


def mention_frequencies(mentions: Sequence[Mention], posts: Sequence[Post]) -> FrequencyTable:
    """Per-entity totals, distinct subscribers, and normalized reach."""
    author_of: Mapping[str, str] = {p.post_id: p.author_id for p in posts}
    totals: dict[str, int] = {}
    authors: dict[str, set[str]] = {}
    universe: set[str] = set()
    for m in mentions:
        totals[m.generic_name] = totals.get(m.generic_name, 0) + 1
        author = author_of[m.post_id]
        authors.setdefault(m.generic_name, set()).add(author)
        universe.add(author)
    u_all = len(universe)
    rows = tuple(
        EntityFrequency(
            generic_name=name,
            mentions=totals[name],
            subscribers=len(authors[name]),
            reach=(len(authors[name]) / u_all if u_all else 0.0),
        )
        for name in sorted(totals, key=lambda n: (-totals[n], n))
    )
    return FrequencyTable(rows=rows, subscriber_universe=u_all)
