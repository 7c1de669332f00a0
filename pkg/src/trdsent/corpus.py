"""Post ingestion, cohort keyword filter, and descriptive statistics."""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from datetime import datetime, timezone
from importlib import resources
from statistics import median
from typing import TYPE_CHECKING, Iterable, Mapping, Sequence

from trdsent.errors import DanglingMention
from trdsent.textutil import fold_text, token_spans

if TYPE_CHECKING:
    from trdsent.matcher import Mention

EARLIEST_POST = int(datetime(2010, 1, 1, tzinfo=timezone.utc).timestamp())

# Hyphen family normalized to spaces before keyword token comparison, so
# "treatment-resistant" and "treatment resistant" are the same token sequence.
_HYPHENS = re.compile("[-‐‑‒–—]")


@dataclass(frozen=True)
class Post:
    post_id: str
    subreddit: str
    author_id: str
    created_at: int  # UTC seconds
    title: str
    body: str

    @property
    def year(self) -> int:
        return datetime.fromtimestamp(self.created_at, tz=timezone.utc).year


@dataclass(frozen=True)
class IngestIssue:
    line_no: int
    kind: str  # "MalformedRecord" | "DuplicateId"
    detail: str


@dataclass
class IngestReport:
    total_lines: int = 0
    ingested: int = 0
    issues: list[IngestIssue] = field(default_factory=list)

    @property
    def counts_by_kind(self) -> dict[str, int]:
        out: dict[str, int] = {}
        for issue in self.issues:
            out[issue.kind] = out.get(issue.kind, 0) + 1
        return out

    def to_dict(self) -> dict:
        return {
            "total_lines": self.total_lines,
            "ingested": self.ingested,
            "issue_counts": self.counts_by_kind,
            "issues": [
                {"line_no": i.line_no, "kind": i.kind, "detail": i.detail} for i in self.issues
            ],
        }


def ingest(lines: Iterable[str], collection_end: int | None = None) -> tuple[list[Post], IngestReport]:
    """Parse line-delimited post records; malformed lines are reported, not fatal.

    Records need fields id, subreddit, author, created_utc, title, selftext.
    A repeated id keeps the first occurrence and reports the rest.
    """
    posts: list[Post] = []
    report = IngestReport()
    seen_ids: set[str] = set()
    for line_no, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        report.total_lines += 1
        try:
            rec = json.loads(line)
        except json.JSONDecodeError as exc:
            report.issues.append(IngestIssue(line_no, "MalformedRecord", f"invalid JSON: {exc.msg}"))
            continue
        problem = _validate_record(rec, collection_end)
        if problem:
            report.issues.append(IngestIssue(line_no, "MalformedRecord", problem))
            continue
        post_id = str(rec["id"])
        if post_id in seen_ids:
            report.issues.append(IngestIssue(line_no, "DuplicateId", post_id))
            continue
        seen_ids.add(post_id)
        posts.append(
            Post(
                post_id=post_id,
                subreddit=str(rec["subreddit"]),
                author_id=str(rec["author"]),
                created_at=int(rec["created_utc"]),
                title=str(rec["title"]),
                body=str(rec["selftext"]),
            )
        )
        report.ingested += 1
    return posts, report


def _validate_record(rec: object, collection_end: int | None) -> str | None:
    if not isinstance(rec, dict):
        return "record is not an object"
    for key in ("id", "subreddit", "author", "created_utc", "title", "selftext"):
        if key not in rec:
            return f"missing field {key}"
    if not str(rec["id"]):
        return "empty id"
    if isinstance(rec["created_utc"], bool) or not isinstance(rec["created_utc"], int):
        return "created_utc is not an integer"
    ts = rec["created_utc"]
    if ts < EARLIEST_POST:
        return "created_utc before 2010-01-01"
    if collection_end is not None and ts > collection_end:
        return "created_utc after collection end"
    if not isinstance(rec["title"], str) or not isinstance(rec["selftext"], str):
        return "title/selftext must be strings"
    if not rec["title"] and not rec["selftext"]:
        return "title and selftext both empty"
    return None


def serialize_posts(posts: Sequence[Post]) -> str:
    lines = []
    for p in posts:
        lines.append(
            json.dumps(
                {
                    "id": p.post_id,
                    "subreddit": p.subreddit,
                    "author": p.author_id,
                    "created_utc": p.created_at,
                    "title": p.title,
                    "selftext": p.body,
                },
                sort_keys=True,
                ensure_ascii=False,
            )
        )
    return "\n".join(lines) + ("\n" if lines else "")


# --- keyword filter -----------------------------------------------------------


@dataclass(frozen=True)
class KeywordLexicon:
    """Cohort keyword phrases by category; all phrases case-folded."""

    phrases: Mapping[str, tuple[str, ...]]  # category -> phrases

    def __post_init__(self):
        if not any(self.phrases.values()):
            raise ValueError("keyword lexicon is empty")

    @classmethod
    def from_text(cls, text: str) -> "KeywordLexicon":
        """Parse the category-tagged phrase list (``category<TAB>phrase``)."""
        grouped: dict[str, list[str]] = {}
        for raw in text.splitlines():
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            category, _, phrase = line.partition("\t")
            category, phrase = category.strip(), fold_text(phrase.strip())
            if not category or not phrase:
                raise ValueError(f"bad keyword line: {raw!r}")
            grouped.setdefault(category, []).append(phrase)
        return cls(phrases={c: tuple(v) for c, v in grouped.items()})

    def all_phrases(self) -> list[str]:
        out = []
        for category in sorted(self.phrases):
            out.extend(self.phrases[category])
        return out


def load_reference_keywords() -> KeywordLexicon:
    text = resources.files("trdsent.data").joinpath("keywords.txt").read_text(encoding="utf-8")
    return KeywordLexicon.from_text(text)


def _keyword_tokens(text: str) -> list[str]:
    norm = _HYPHENS.sub(" ", fold_text(text))
    return [norm[a:b] for a, b in token_spans(norm)]


def _contains_sequence(tokens: list[str], phrase_tokens: list[str]) -> bool:
    k = len(phrase_tokens)
    if k == 0 or k > len(tokens):
        return False
    for i in range(len(tokens) - k + 1):
        if tokens[i : i + k] == phrase_tokens:
            return True
    return False


@dataclass(frozen=True)
class FilterResult:
    posts: tuple[Post, ...]
    matched_keywords: Mapping[str, tuple[str, ...]]  # post_id -> phrases that hit


def filter_trd(posts: Sequence[Post], keywords: KeywordLexicon) -> FilterResult:
    """Keep posts whose title or body contains a keyword as a whole-token sequence."""
    phrase_tokens = {p: _keyword_tokens(p) for p in keywords.all_phrases()}
    kept: list[Post] = []
    matched: dict[str, tuple[str, ...]] = {}
    for post in posts:
        tokens = _keyword_tokens(post.title) + ["\x00"] + _keyword_tokens(post.body)
        hits = tuple(
            phrase
            for phrase, ptoks in phrase_tokens.items()
            if _contains_sequence(tokens, ptoks)
        )
        if hits:
            kept.append(post)
            matched[post.post_id] = hits
    return FilterResult(posts=tuple(kept), matched_keywords=matched)


# --- descriptive statistics ----------------------------------------------------


@dataclass(frozen=True)
class Distribution:
    mean: float
    median: float
    min: int
    max: int


def _distribution(values: Sequence[int]) -> Distribution:
    if not values:
        return Distribution(0.0, 0.0, 0, 0)
    return Distribution(
        mean=sum(values) / len(values),
        median=float(median(values)),
        min=min(values),
        max=max(values),
    )


@dataclass(frozen=True)
class CohortStats:
    post_count: int
    subscriber_count: int
    subreddit_count: int
    time_span: tuple[int, int]  # (earliest, latest) created_at
    posts_with_mentions: int
    total_mentions: int
    entities_observed: int
    mentions_per_post: Distribution
    distinct_meds_per_post: Distribution
    posting_frequency: Mapping[str, tuple[int, float]]  # bucket -> (subscribers, share %)


def cohort_stats(posts: Sequence[Post], mentions: Sequence["Mention"]) -> CohortStats:
    """All cohort-table quantities.

    Per-post means use every post as denominator, including posts with zero
    mentions, so the reported rate reflects the whole cohort.
    """
    known = {p.post_id for p in posts}
    per_post_mentions: dict[str, int] = {p.post_id: 0 for p in posts}
    per_post_meds: dict[str, set[str]] = {p.post_id: set() for p in posts}
    for m in mentions:
        if m.post_id not in known:
            raise DanglingMention(m.post_id)
        per_post_mentions[m.post_id] += 1
        per_post_meds[m.post_id].add(m.generic_name)

    posts_per_author: dict[str, int] = {}
    for p in posts:
        posts_per_author[p.author_id] = posts_per_author.get(p.author_id, 0) + 1
    n_subs = len(posts_per_author)

    def bucket(pred) -> tuple[int, float]:
        n = sum(1 for c in posts_per_author.values() if pred(c))
        return n, (100.0 * n / n_subs if n_subs else 0.0)

    mention_counts = [per_post_mentions[p.post_id] for p in posts]
    med_counts = [len(per_post_meds[p.post_id]) for p in posts]
    return CohortStats(
        post_count=len(posts),
        subscriber_count=n_subs,
        subreddit_count=len({p.subreddit for p in posts}),
        time_span=(
            (min(p.created_at for p in posts), max(p.created_at for p in posts))
            if posts
            else (0, 0)
        ),
        posts_with_mentions=sum(1 for c in mention_counts if c > 0),
        total_mentions=len(mentions),
        entities_observed=len({m.generic_name for m in mentions}),
        mentions_per_post=_distribution(mention_counts),
        distinct_meds_per_post=_distribution(med_counts),
        posting_frequency={
            "one_post": bucket(lambda c: c == 1),
            "five_or_more": bucket(lambda c: c >= 5),
            "ten_or_more": bucket(lambda c: c >= 10),
        },
    )


@dataclass(frozen=True)
class SubscriberMedDistribution:
    histogram: Mapping[int, int]  # distinct medications -> subscribers
    shares: Mapping[int, float]  # same keys, percentage of subscribers with >= 1


def subscriber_medication_distribution(
    posts: Sequence[Post], mentions: Sequence["Mention"]
) -> SubscriberMedDistribution:
    """Distinct generic names each subscriber mentioned, as histogram + shares."""
    author_of = {p.post_id: p.author_id for p in posts}
    meds_by_author: dict[str, set[str]] = {}
    for m in mentions:
        if m.post_id not in author_of:
            raise DanglingMention(m.post_id)
        meds_by_author.setdefault(author_of[m.post_id], set()).add(m.generic_name)
    histogram: dict[int, int] = {}
    for meds in meds_by_author.values():
        histogram[len(meds)] = histogram.get(len(meds), 0) + 1
    total = sum(histogram.values())
    shares = {k: 100.0 * v / total for k, v in histogram.items()} if total else {}
    return SubscriberMedDistribution(
        histogram=dict(sorted(histogram.items())),
        shares=dict(sorted(shares.items())),
    )


@dataclass(frozen=True)
class YearShare:
    year: int
    count: int
    share: float  # percent of distinct posts across all years
    partial: bool


def annual_share(posts: Sequence[Post], collection_end: datetime | None = None) -> list[YearShare]:
    """Distinct-post counts and percentage share per calendar year.

    A year covered only up to a mid-year collection end is flagged partial so
    downstream plots can mark it.
    """
    seen: set[str] = set()
    by_year: dict[int, int] = {}
    for p in posts:
        if p.post_id in seen:
            continue
        seen.add(p.post_id)
        by_year[p.year] = by_year.get(p.year, 0) + 1
    total = len(seen)
    partial_year = None
    if collection_end is not None and (collection_end.month, collection_end.day) != (12, 31):
        partial_year = collection_end.year
    return [
        YearShare(year=y, count=c, share=100.0 * c / total, partial=(y == partial_year))
        for y, c in sorted(by_year.items())
    ]
