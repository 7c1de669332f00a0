"""Sentiment label schema, prediction ingestion, reference classifier,
augmentation bookkeeping, and classifier evaluation."""

from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum
from importlib import resources
from typing import Iterable, Mapping, Sequence

import numpy as np

from trdsent.context import ContextWindow
from trdsent.errors import (
    DuplicatePrediction,
    EmptyInput,
    InvalidConfidence,
    InvalidLabel,
    LengthMismatch,
    NeutralNotAugmented,
    SampleTooLarge,
    UnknownMentionId,
)
from trdsent.textutil import fold_text, is_token_boundary


class SentimentLabel(str, Enum):
    NEGATIVE = "Negative"
    NEUTRAL = "Neutral"
    POSITIVE = "Positive"


# Canonical serialization order everywhere: Negative < Neutral < Positive.
LABEL_ORDER: tuple[SentimentLabel, ...] = (
    SentimentLabel.NEGATIVE,
    SentimentLabel.NEUTRAL,
    SentimentLabel.POSITIVE,
)

_LABEL_BY_VALUE = {lab.value: lab for lab in LABEL_ORDER}


def parse_label(raw: str) -> SentimentLabel:
    try:
        return _LABEL_BY_VALUE[raw]
    except KeyError:
        raise InvalidLabel(raw) from None


@dataclass(frozen=True)
class LabeledMention:
    mention_id: str
    label: SentimentLabel
    confidence: float
    source: str  # "external" | "rule"

    def __post_init__(self):
        if not isinstance(self.confidence, (int, float)) or not (0.0 <= self.confidence <= 1.0):
            raise InvalidConfidence(self.confidence)


# --- prediction ingestion ------------------------------------------------------


@dataclass(frozen=True)
class PredictionJoin:
    labeled: tuple[LabeledMention, ...]
    missing: tuple[str, ...]  # mention_ids with no prediction


def ingest_predictions(
    lines: Iterable[str], mention_ids: Iterable[str], source: str = "external"
) -> PredictionJoin:
    """Join a predictions stream against the mention set.

    Unknown mention_ids, duplicates, bad labels, and bad confidences are hard
    errors; mentions without a prediction are reported, not fatal.
    """
    known = set(mention_ids)
    seen: dict[str, LabeledMention] = {}
    for line in lines:
        if not line.strip():
            continue
        rec = json.loads(line)
        mid = str(rec["mention_id"])
        if mid not in known:
            raise UnknownMentionId(mid)
        if mid in seen:
            raise DuplicatePrediction(mid)
        label = parse_label(rec["label"])
        conf = rec["confidence"]
        if not isinstance(conf, (int, float)) or isinstance(conf, bool) or not (0 <= conf <= 1):
            raise InvalidConfidence(conf)
        seen[mid] = LabeledMention(mention_id=mid, label=label, confidence=float(conf), source=source)
    labeled = tuple(seen[mid] for mid in sorted(seen))
    missing = tuple(sorted(known - set(seen)))
    return PredictionJoin(labeled=labeled, missing=missing)


# --- rule-based reference classifier --------------------------------------------


def _load_phrases(name: str) -> tuple[str, ...]:
    text = resources.files("trdsent.data").joinpath(name).read_text(encoding="utf-8")
    phrases = []
    for line in text.splitlines():
        line = line.strip()
        if line and not line.startswith("#"):
            phrases.append(fold_text(line))
    return tuple(phrases)


def load_reference_cues() -> tuple[tuple[str, ...], tuple[str, ...]]:
    """(positive, negative) cue phrase lists bundled with the package."""
    return _load_phrases("cues_positive.txt"), _load_phrases("cues_negative.txt")


def count_phrase(text_folded: str, phrase: str) -> int:
    """Non-overlapping whole-token occurrences of one folded phrase."""
    count = 0
    i = text_folded.find(phrase)
    while i != -1:
        j = i + len(phrase)
        if is_token_boundary(text_folded, i) and is_token_boundary(text_folded, j):
            count += 1
            i = text_folded.find(phrase, j)
        else:
            i = text_folded.find(phrase, i + 1)
    return count


def rule_classify(
    window: ContextWindow,
    positive_cues: Sequence[str],
    negative_cues: Sequence[str],
) -> LabeledMention:
    """Deterministic cue-count classifier.

    Label follows the sign of (positive hits - negative hits); ties and empty
    windows are Neutral. Confidence is the vote margin over total cue hits,
    0.5 when no cue fired at all.
    """
    folded = fold_text(window.masked_text)
    pos = sum(count_phrase(folded, cue) for cue in positive_cues)
    neg = sum(count_phrase(folded, cue) for cue in negative_cues)
    total = pos + neg
    if pos > neg:
        label = SentimentLabel.POSITIVE
    elif neg > pos:
        label = SentimentLabel.NEGATIVE
    else:
        label = SentimentLabel.NEUTRAL
    confidence = 0.5 if total == 0 else abs(pos - neg) / total
    return LabeledMention(
        mention_id=window.mention_id, label=label, confidence=confidence, source="rule"
    )


# --- augmentation bookkeeping ----------------------------------------------------


@dataclass(frozen=True)
class TrainSetSummary:
    negative: int
    neutral: int
    positive: int

    @property
    def total(self) -> int:
        return self.negative + self.neutral + self.positive


def validate_augmentation(original: TrainSetSummary, synthetic_per_instance: int = 5) -> TrainSetSummary:
    """Expected label counts after k-per-instance augmentation.

    Neutral instances are never augmented; each non-neutral instance yields
    k synthetic copies on top of itself. Integer arithmetic only.
    """
    k = synthetic_per_instance
    if k < 0:
        raise ValueError("synthetic_per_instance must be >= 0")
    return TrainSetSummary(
        negative=original.negative * (1 + k),
        neutral=original.neutral,
        positive=original.positive * (1 + k),
    )


AUGMENTATION_PROMPT_TEMPLATE = """\
You are generating training data for a target-dependent sentiment classifier \
over informal forum posts about therapies.

Original post:
{text}

The target therapy in this post is "{surface}". The author's sentiment toward \
it is {label}.

Write exactly {k} alternative posts that each:
1. discuss the same target therapy ("{surface}");
2. express the same {label} sentiment toward that therapy;
3. keep any other therapies mentioned neutral;
4. read like real forum posts, varying wording, length, and style.

Output one post per line. Do not number, label, or explain them.
"""


def build_augmentation_prompt(
    text: str, target_span: tuple[int, int], label: SentimentLabel, n_variants: int = 5
) -> str:
    """Prompt text for synthetic-instance generation; emitted as data only."""
    if label is SentimentLabel.NEUTRAL:
        raise NeutralNotAugmented()
    s, e = target_span
    if not (0 <= s < e <= len(text)):
        raise ValueError(f"target span ({s}, {e}) outside text of length {len(text)}")
    return AUGMENTATION_PROMPT_TEMPLATE.format(
        text=text, surface=text[s:e], label=label.value, k=n_variants
    )


# --- evaluation -------------------------------------------------------------------


@dataclass(frozen=True)
class ClassScores:
    precision: float
    recall: float
    f1: float


@dataclass(frozen=True)
class EvalReport:
    micro_f1: float
    micro_f1_ci: tuple[float, float]
    macro_f1: float
    per_class: Mapping[str, ClassScores]  # keyed by label value, canonical order
    confusion: tuple[tuple[int, ...], ...]  # rows gold, cols predicted
    n: int
    bootstrap_resamples: int
    ci_level: float
    seed: int


def _as_labels(seq: Sequence) -> list[SentimentLabel]:
    return [x if isinstance(x, SentimentLabel) else parse_label(str(x)) for x in seq]


def evaluate(
    gold: Sequence,
    predicted: Sequence,
    bootstrap_resamples: int = 1000,
    ci_level: float = 0.95,
    seed: int = 0,
) -> EvalReport:
    """Per-class P/R/F1, micro-F1 (= accuracy), macro-F1, bootstrap CI.

    Undefined precision/recall/F1 (zero denominator) scores 0; the convention
    is part of the contract.
    """
    g = _as_labels(gold)
    p = _as_labels(predicted)
    if len(g) != len(p):
        raise LengthMismatch(len(g), len(p))
    if not g:
        raise EmptyInput("no labeled instances to evaluate")

    idx = {lab: i for i, lab in enumerate(LABEL_ORDER)}
    confusion = [[0] * 3 for _ in range(3)]
    for gi, pi in zip(g, p):
        confusion[idx[gi]][idx[pi]] += 1

    per_class: dict[str, ClassScores] = {}
    f1s = []
    for i, lab in enumerate(LABEL_ORDER):
        tp = confusion[i][i]
        pred_n = sum(confusion[r][i] for r in range(3))
        gold_n = sum(confusion[i][c] for c in range(3))
        precision = tp / pred_n if pred_n else 0.0
        recall = tp / gold_n if gold_n else 0.0
        f1 = 2 * precision * recall / (precision + recall) if (precision + recall) else 0.0
        per_class[lab.value] = ClassScores(precision=precision, recall=recall, f1=f1)
        f1s.append(f1)

    n = len(g)
    correct = np.fromiter((gi is pi for gi, pi in zip(g, p)), dtype=np.float64, count=n)
    micro = float(correct.mean())

    rng = np.random.default_rng(seed)
    samples = rng.integers(0, n, size=(bootstrap_resamples, n))
    boot = correct[samples].mean(axis=1)
    alpha = 1.0 - ci_level
    lo, hi = np.quantile(boot, [alpha / 2, 1.0 - alpha / 2])

    return EvalReport(
        micro_f1=micro,
        micro_f1_ci=(float(lo), float(hi)),
        macro_f1=sum(f1s) / 3.0,
        per_class=per_class,
        confusion=tuple(tuple(row) for row in confusion),
        n=n,
        bootstrap_resamples=bootstrap_resamples,
        ci_level=ci_level,
        seed=seed,
    )


# --- spot-check sampling -------------------------------------------------------------


@dataclass(frozen=True)
class ReviewRow:
    mention_id: str
    masked_text: str
    label: str
    confidence: float


def sample_for_review(
    labeled: Sequence[LabeledMention],
    windows: Mapping[str, str],  # mention_id -> masked_text
    n: int,
    seed: int,
) -> list[ReviewRow]:
    """Seeded uniform sample without replacement, in draw order."""
    if n > len(labeled):
        raise SampleTooLarge(n, len(labeled))
    ordered = sorted(labeled, key=lambda lm: lm.mention_id)
    rng = np.random.default_rng(seed)
    picks = rng.permutation(len(ordered))[:n]
    return [
        ReviewRow(
            mention_id=ordered[i].mention_id,
            masked_text=windows.get(ordered[i].mention_id, ""),
            label=ordered[i].label.value,
            confidence=ordered[i].confidence,
        )
        for i in picks
    ]
