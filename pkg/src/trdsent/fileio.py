"""Readers and writers for every pipeline file format.

All writers are deterministic: stable orderings, sorted JSON keys, shortest
round-trip float text. Tab-separated files escape tabs/newlines in free-text
columns with backslash escapes so one record is always one line.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

from trdsent.context import ContextWindow
from trdsent.corpus import Post
from trdsent.lexicon import Lexicon
from trdsent.matcher import Mention
from trdsent.sentiment import LabeledMention, ReviewRow, parse_label


def _escape(text: str) -> str:
    return text.replace("\\", "\\\\").replace("\t", "\\t").replace("\n", "\\n").replace("\r", "\\r")


def _unescape(text: str) -> str:
    out = []
    i = 0
    while i < len(text):
        ch = text[i]
        if ch == "\\" and i + 1 < len(text):
            nxt = text[i + 1]
            out.append({"\\": "\\", "t": "\t", "n": "\n", "r": "\r"}.get(nxt, "\\" + nxt))
            i += 2
        else:
            out.append(ch)
            i += 1
    return "".join(out)


def _fmt_float(v: float) -> str:
    return repr(float(v))


# --- mentions table -------------------------------------------------------------

MENTION_COLUMNS = (
    "mention_id",
    "post_id",
    "subreddit",
    "author",
    "created_utc",
    "generic_name",
    "therapy_class",
    "surface",
    "field",
    "start",
    "end",
    "sentence_index",
)


@dataclass(frozen=True)
class MentionRecord:
    """One mentions-table row: a Mention joined with its post metadata."""

    mention_id: str
    post_id: str
    subreddit: str
    author: str
    created_utc: int
    generic_name: str
    therapy_class: str
    surface: str
    field: str
    start: int
    end: int
    sentence_index: int


def mention_records(
    mentions: Sequence[Mention], posts: Sequence[Post], lexicon: Lexicon
) -> list[MentionRecord]:
    by_id = {p.post_id: p for p in posts}
    class_of = {e.generic_name: e.therapy_class for e in lexicon.entities}
    records = []
    for m in mentions:
        post = by_id[m.post_id]
        records.append(
            MentionRecord(
                mention_id=m.mention_id,
                post_id=m.post_id,
                subreddit=post.subreddit,
                author=post.author_id,
                created_utc=post.created_at,
                generic_name=m.generic_name,
                therapy_class=class_of[m.generic_name],
                surface=m.surface,
                field=m.field,
                start=m.char_span[0],
                end=m.char_span[1],
                sentence_index=m.sentence_index,
            )
        )
    records.sort(key=lambda r: r.mention_id)
    return records


def write_mentions(records: Sequence[MentionRecord]) -> str:
    lines = ["\t".join(MENTION_COLUMNS)]
    for r in records:
        lines.append(
            "\t".join(
                [
                    r.mention_id,
                    r.post_id,
                    _escape(r.subreddit),
                    _escape(r.author),
                    str(r.created_utc),
                    r.generic_name,
                    r.therapy_class,
                    _escape(r.surface),
                    r.field,
                    str(r.start),
                    str(r.end),
                    str(r.sentence_index),
                ]
            )
        )
    return "\n".join(lines) + "\n"


def read_mentions(text: str) -> list[MentionRecord]:
    lines = text.splitlines()
    if not lines or lines[0].split("\t") != list(MENTION_COLUMNS):
        raise ValueError("not a mentions table (bad header)")
    records = []
    for line in lines[1:]:
        if not line:
            continue
        f = line.split("\t")
        if len(f) != len(MENTION_COLUMNS):
            raise ValueError(f"bad mentions row: {line!r}")
        records.append(
            MentionRecord(
                mention_id=f[0],
                post_id=f[1],
                subreddit=_unescape(f[2]),
                author=_unescape(f[3]),
                created_utc=int(f[4]),
                generic_name=f[5],
                therapy_class=f[6],
                surface=_unescape(f[7]),
                field=f[8],
                start=int(f[9]),
                end=int(f[10]),
                sentence_index=int(f[11]),
            )
        )
    return records


# --- windows -----------------------------------------------------------------------


def write_windows(windows: Sequence[ContextWindow]) -> str:
    lines = []
    for w in sorted(windows, key=lambda w: w.mention_id):
        lines.append(
            json.dumps(
                {"mention_id": w.mention_id, "masked_text": w.masked_text},
                sort_keys=True,
                ensure_ascii=False,
            )
        )
    return "\n".join(lines) + ("\n" if lines else "")


def read_windows(text: str) -> dict[str, str]:
    """mention_id -> masked_text."""
    out: dict[str, str] = {}
    for line in text.splitlines():
        if not line.strip():
            continue
        rec = json.loads(line)
        out[str(rec["mention_id"])] = str(rec["masked_text"])
    return out


# --- predictions / gold labels --------------------------------------------------------


def write_predictions(labeled: Sequence[LabeledMention]) -> str:
    lines = []
    for lm in sorted(labeled, key=lambda x: x.mention_id):
        lines.append(
            json.dumps(
                {
                    "mention_id": lm.mention_id,
                    "label": lm.label.value,
                    "confidence": lm.confidence,
                },
                sort_keys=True,
                ensure_ascii=False,
            )
        )
    return "\n".join(lines) + ("\n" if lines else "")


# --- labeled mentions table -------------------------------------------------------------

LABELED_COLUMNS = MENTION_COLUMNS + ("label", "confidence", "source")


@dataclass(frozen=True)
class LabeledRecord:
    mention: MentionRecord
    label: str
    confidence: float
    source: str


def labeled_records(
    records: Sequence[MentionRecord], labeled: Sequence[LabeledMention]
) -> list[LabeledRecord]:
    by_id = {lm.mention_id: lm for lm in labeled}
    out = []
    for r in records:
        lm = by_id.get(r.mention_id)
        if lm is None:
            continue
        out.append(
            LabeledRecord(mention=r, label=lm.label.value, confidence=lm.confidence, source=lm.source)
        )
    out.sort(key=lambda x: x.mention.mention_id)
    return out


def write_labeled(rows: Sequence[LabeledRecord]) -> str:
    body = write_mentions([r.mention for r in rows]).splitlines()
    lines = ["\t".join(LABELED_COLUMNS)]
    for base, row in zip(body[1:], rows):
        lines.append("\t".join([base, row.label, _fmt_float(row.confidence), row.source]))
    return "\n".join(lines) + "\n"


def read_labeled(text: str) -> list[LabeledRecord]:
    lines = text.splitlines()
    if not lines or lines[0].split("\t") != list(LABELED_COLUMNS):
        raise ValueError("not a labeled-mentions table (bad header)")
    out = []
    for line in lines[1:]:
        if not line:
            continue
        f = line.split("\t")
        if len(f) != len(LABELED_COLUMNS):
            raise ValueError(f"bad labeled row: {line!r}")
        mention = read_mentions("\t".join(MENTION_COLUMNS) + "\n" + "\t".join(f[:12]) + "\n")[0]
        parse_label(f[12])
        out.append(LabeledRecord(mention=mention, label=f[12], confidence=float(f[13]), source=f[14]))
    return out


# --- review sheet ---------------------------------------------------------------------------

REVIEW_COLUMNS = ("mention_id", "masked_text", "label", "confidence")


def write_review(rows: Sequence[ReviewRow]) -> str:
    lines = ["\t".join(REVIEW_COLUMNS)]
    for r in rows:
        lines.append("\t".join([r.mention_id, _escape(r.masked_text), r.label, _fmt_float(r.confidence)]))
    return "\n".join(lines) + "\n"


# --- counts input for the asymmetry battery ---------------------------------------------------


def read_counts(text: str) -> dict[str, tuple[int, int]]:
    """name<TAB>positive_n<TAB>negative_n rows, header optional."""
    out: dict[str, tuple[int, int]] = {}
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        f = line.split("\t")
        if f[:3] == ["name", "positive_n", "negative_n"]:
            continue
        if len(f) != 3:
            raise ValueError(f"bad counts row: {line!r}")
        name = _unescape(f[0])
        if name in out:
            raise ValueError(f"duplicate entity in counts: {name}")
        out[name] = (int(f[1]), int(f[2]))
    return out


# --- small helpers --------------------------------------------------------------------------


def write_text(path: str | Path, text: str) -> None:
    p = Path(path)
    p.parent.mkdir(parents=True, exist_ok=True)
    p.write_text(text, encoding="utf-8")


def read_text(path: str | Path) -> str:
    return Path(path).read_text(encoding="utf-8")


def write_json(path: str | Path, payload: object) -> None:
    write_text(path, json.dumps(payload, indent=2, sort_keys=True, ensure_ascii=False) + "\n")


def read_lines(path: str | Path) -> Iterable[str]:
    with Path(path).open("r", encoding="utf-8") as f:
        yield from f


def vocabulary_of_posts(posts: Sequence[Post]) -> list[str]:
    """Distinct folded tokens across titles and bodies (for variant generation)."""
    from trdsent.textutil import fold_text, token_spans

    vocab: set[str] = set()
    for p in posts:
        for text in (p.title, p.body):
            folded = fold_text(text)
            for a, b in token_spans(folded):
                vocab.add(folded[a:b])
    return sorted(vocab)
