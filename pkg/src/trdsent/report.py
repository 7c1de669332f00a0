"""Analysis-ready report bundle: every table the study figures are drawn from.

The bundle is plain data (TSV tables + one summary JSON). Writers are
deterministic and timestamp-free so identical inputs give byte-identical
bundles; every table cross-checks its totals against the mention set before
anything is written.
"""

from __future__ import annotations

from dataclasses import dataclass
from datetime import datetime
from pathlib import Path
from typing import Mapping, Optional, Sequence

from trdsent.corpus import CohortStats, Post, YearShare, annual_share, cohort_stats
from trdsent.errors import DegenerateMargin, ReconciliationError
from trdsent.fileio import LabeledRecord, MentionRecord, _escape, _fmt_float, write_json, write_text
from trdsent.stats import (
    AsymmetryBattery,
    ContingencyResult,
    PairwiseResult,
    SentimentProfile,
    analyze_contingency,
    battery_from_counts,
    pairwise_class_tests,
    sentiment_profile,
)


@dataclass(frozen=True)
class FrequencyRow:
    generic_name: str
    mentions: int
    subscribers: int
    reach: float


@dataclass(frozen=True)
class ProfileRow:
    name: str
    negative: int
    neutral: int
    positive: int
    positive_share: float
    negative_share: float


@dataclass(frozen=True)
class ClassYearRow:
    year: int
    therapy_class: str
    mentions: int
    share: float  # percent of that year's mentions


@dataclass(frozen=True)
class ReportBundle:
    cohort: CohortStats
    frequency: tuple[FrequencyRow, ...]  # by mentions desc, name asc
    reach: tuple[FrequencyRow, ...]  # by reach desc, name asc
    subscriber_universe: int
    entity_profiles: tuple[ProfileRow, ...]  # by positive share desc, name asc
    class_profiles: tuple[ProfileRow, ...]
    battery: AsymmetryBattery
    contingency: Optional[ContingencyResult]
    contingency_classes: tuple[str, ...]
    pairwise: tuple[PairwiseResult, ...]
    annual: tuple[YearShare, ...]
    class_year: tuple[ClassYearRow, ...]
    label_totals: Mapping[str, int]


def _profiles_to_rows(profiles: Mapping[str, SentimentProfile]) -> list[ProfileRow]:
    rows = []
    for name, prof in profiles.items():
        rows.append(
            ProfileRow(
                name=name,
                negative=prof.counts["Negative"],
                neutral=prof.counts["Neutral"],
                positive=prof.counts["Positive"],
                positive_share=prof.proportions["Positive"],
                negative_share=prof.proportions["Negative"],
            )
        )
    rows.sort(key=lambda r: (-r.positive_share, r.name))
    return rows


def class_year_composition(rows: Sequence[tuple[int, str]]) -> list[ClassYearRow]:
    """Per-year therapy-class mention shares; denominator is that year's total."""
    by_year: dict[int, dict[str, int]] = {}
    for year, cls in rows:
        by_year.setdefault(year, {}).setdefault(cls, 0)
        by_year[year][cls] += 1
    out = []
    for year in sorted(by_year):
        total = sum(by_year[year].values())
        for cls in sorted(by_year[year]):
            count = by_year[year][cls]
            out.append(ClassYearRow(year=year, therapy_class=cls, mentions=count, share=100.0 * count / total))
    return out


def build_report(
    posts: Sequence[Post],
    mentions: Sequence[MentionRecord],
    labeled: Sequence[LabeledRecord],
    collection_end: Optional[datetime] = None,
) -> ReportBundle:
    """Assemble every table, cross-checking totals along the way."""

    # cohort + frequency tables come from the full mention set
    class MentionView:
        __slots__ = ("post_id", "generic_name")

        def __init__(self, post_id: str, generic_name: str):
            self.post_id = post_id
            self.generic_name = generic_name

    views = [MentionView(m.post_id, m.generic_name) for m in mentions]
    cohort = cohort_stats(posts, views)
    if cohort.total_mentions != len(mentions):
        raise ReconciliationError("cohort", len(mentions), cohort.total_mentions)

    author_of = {p.post_id: p.author_id for p in posts}
    totals: dict[str, int] = {}
    subs: dict[str, set[str]] = {}
    universe: set[str] = set()
    for m in mentions:
        totals[m.generic_name] = totals.get(m.generic_name, 0) + 1
        author = author_of[m.post_id]
        subs.setdefault(m.generic_name, set()).add(author)
        universe.add(author)
    u_all = len(universe)
    freq_rows = [
        FrequencyRow(
            generic_name=name,
            mentions=totals[name],
            subscribers=len(subs[name]),
            reach=(len(subs[name]) / u_all if u_all else 0.0),
        )
        for name in totals
    ]
    frequency = tuple(sorted(freq_rows, key=lambda r: (-r.mentions, r.generic_name)))
    reach = tuple(sorted(freq_rows, key=lambda r: (-r.reach, r.generic_name)))
    if sum(r.mentions for r in frequency) != len(mentions):
        raise ReconciliationError("frequency", len(mentions), sum(r.mentions for r in frequency))

    # sentiment sections come from the labeled subset
    label_totals = {"Negative": 0, "Neutral": 0, "Positive": 0}
    for lr in labeled:
        label_totals[lr.label] += 1
    if sum(label_totals.values()) != len(labeled):
        raise ReconciliationError("label_totals", len(labeled), sum(label_totals.values()))

    entity_profiles: list[ProfileRow] = []
    class_profiles: list[ProfileRow] = []
    if labeled:
        entity_profiles = _profiles_to_rows(
            sentiment_profile([(lr.mention.generic_name, lr.label) for lr in labeled])
        )
        class_profiles = _profiles_to_rows(
            sentiment_profile([(lr.mention.therapy_class, lr.label) for lr in labeled])
        )
        for name, rows in (("entity_profiles", entity_profiles), ("class_profiles", class_profiles)):
            covered = sum(r.negative + r.neutral + r.positive for r in rows)
            if covered != len(labeled):
                raise ReconciliationError(name, len(labeled), covered)

    counts = {
        name: (
            sum(1 for lr in labeled if lr.mention.generic_name == name and lr.label == "Positive"),
            sum(1 for lr in labeled if lr.mention.generic_name == name and lr.label == "Negative"),
        )
        for name in sorted({lr.mention.generic_name for lr in labeled})
    }
    battery = battery_from_counts(counts)

    contingency: Optional[ContingencyResult] = None
    pairwise: tuple[PairwiseResult, ...] = ()
    classes: tuple[str, ...] = ()
    if labeled:
        class_names = sorted({lr.mention.therapy_class for lr in labeled})
        table = [
            [
                sum(1 for lr in labeled if lr.mention.therapy_class == cls and lr.label == lab)
                for lab in ("Negative", "Neutral", "Positive")
            ]
            for cls in class_names
        ]
        if len(class_names) >= 2:
            try:
                contingency = analyze_contingency(table)
                pairwise = tuple(pairwise_class_tests(table, class_names))
                classes = tuple(class_names)
            except DegenerateMargin:
                contingency = None  # fixture too small for the full contingency block

    annual = tuple(annual_share(posts, collection_end))
    if sum(y.count for y in annual) != len(posts):
        raise ReconciliationError("annual", len(posts), sum(y.count for y in annual))

    year_of = {p.post_id: p.year for p in posts}
    class_year = tuple(
        class_year_composition([(year_of[lr.mention.post_id], lr.mention.therapy_class) for lr in labeled])
    )

    return ReportBundle(
        cohort=cohort,
        frequency=frequency,
        reach=reach,
        subscriber_universe=u_all,
        entity_profiles=tuple(entity_profiles),
        class_profiles=tuple(class_profiles),
        battery=battery,
        contingency=contingency,
        contingency_classes=classes,
        pairwise=pairwise,
        annual=annual,
        class_year=class_year,
        label_totals=label_totals,
    )


# --- serialization ------------------------------------------------------------------


def battery_table(battery: AsymmetryBattery) -> str:
    lines = ["\t".join(("medication", "positive_n", "negative_n", "non_neutral_n", "p_hat", "ci_low", "ci_high", "p_raw", "p_fdr"))]
    for r in battery.results:
        lines.append(
            "\t".join(
                [
                    _escape(r.entity),
                    str(r.x),
                    str(r.y),
                    str(r.n),
                    f"{r.p_hat:.3f}",
                    f"{r.ci[0]:.3f}",
                    f"{r.ci[1]:.3f}",
                    f"{r.p_raw:.2e}",
                    f"{r.p_fdr:.2e}",
                ]
            )
        )
    return "\n".join(lines) + "\n"


def write_bundle(bundle: ReportBundle, outdir: str | Path) -> list[str]:
    """Write every table + summary.json; returns the filenames written."""
    out = Path(outdir)
    written: list[str] = []

    def table(name: str, header: Sequence[str], rows: Sequence[Sequence[str]]) -> None:
        lines = ["\t".join(header)]
        lines.extend("\t".join(row) for row in rows)
        write_text(out / name, "\n".join(lines) + "\n")
        written.append(name)

    table(
        "frequency.tsv",
        ("generic_name", "mentions", "subscribers", "reach"),
        [[_escape(r.generic_name), str(r.mentions), str(r.subscribers), f"{r.reach:.4f}"] for r in bundle.frequency],
    )
    table(
        "reach.tsv",
        ("generic_name", "subscribers", "reach"),
        [[_escape(r.generic_name), str(r.subscribers), f"{r.reach:.4f}"] for r in bundle.reach],
    )
    for name, rows in (("profiles_entity.tsv", bundle.entity_profiles), ("profiles_class.tsv", bundle.class_profiles)):
        table(
            name,
            ("name", "negative", "neutral", "positive", "positive_share", "negative_share"),
            [
                [
                    _escape(r.name),
                    str(r.negative),
                    str(r.neutral),
                    str(r.positive),
                    f"{100.0 * r.positive_share:.1f}",
                    f"{100.0 * r.negative_share:.1f}",
                ]
                for r in rows
            ],
        )
    write_text(out / "battery.tsv", battery_table(bundle.battery))
    written.append("battery.tsv")
    if bundle.contingency is not None and bundle.contingency.residuals is not None:
        table(
            "residuals.tsv",
            ("therapy_class", "negative", "neutral", "positive"),
            [
                [_escape(cls)] + [_fmt_float(v) for v in row]
                for cls, row in zip(bundle.contingency_classes, bundle.contingency.residuals)
            ],
        )
        table(
            "pairwise.tsv",
            ("class_a", "class_b", "chi2", "df", "p_raw", "p_fdr", "tested"),
            [
                [
                    _escape(p.class_a),
                    _escape(p.class_b),
                    "" if p.chi2 is None else _fmt_float(p.chi2),
                    str(p.df),
                    "" if p.p_raw is None else f"{p.p_raw:.2e}",
                    "" if p.p_fdr is None else f"{p.p_fdr:.2e}",
                    "1" if p.tested else "0",
                ]
                for p in bundle.pairwise
            ],
        )
    table(
        "annual.tsv",
        ("year", "posts", "share", "partial"),
        [[str(y.year), str(y.count), f"{y.share:.1f}", "1" if y.partial else "0"] for y in bundle.annual],
    )
    table(
        "class_year.tsv",
        ("year", "therapy_class", "mentions", "share"),
        [[str(r.year), _escape(r.therapy_class), str(r.mentions), f"{r.share:.1f}"] for r in bundle.class_year],
    )

    cohort = bundle.cohort
    summary = {
        "cohort": {
            "post_count": cohort.post_count,
            "subscriber_count": cohort.subscriber_count,
            "subreddit_count": cohort.subreddit_count,
            "time_span": list(cohort.time_span),
            "posts_with_mentions": cohort.posts_with_mentions,
            "total_mentions": cohort.total_mentions,
            "entities_observed": cohort.entities_observed,
            "mentions_per_post": {
                "mean": round(cohort.mentions_per_post.mean, 6),
                "median": cohort.mentions_per_post.median,
                "min": cohort.mentions_per_post.min,
                "max": cohort.mentions_per_post.max,
            },
            "distinct_meds_per_post": {
                "mean": round(cohort.distinct_meds_per_post.mean, 6),
                "median": cohort.distinct_meds_per_post.median,
                "min": cohort.distinct_meds_per_post.min,
                "max": cohort.distinct_meds_per_post.max,
            },
            "posting_frequency": {
                k: {"subscribers": v[0], "share": round(v[1], 6)}
                for k, v in cohort.posting_frequency.items()
            },
        },
        "labels": dict(bundle.label_totals),
        "subscriber_universe": bundle.subscriber_universe,
        "battery_ineligible": list(bundle.battery.ineligible),
        "contingency": (
            None
            if bundle.contingency is None
            else {
                "chi2": round(bundle.contingency.chi2, 6),
                "df": bundle.contingency.df,
                "p": f"{bundle.contingency.p:.2e}",
                "cramers_v": round(bundle.contingency.cramers_v, 6),
                "classes": list(bundle.contingency_classes),
            }
        ),
    }
    write_json(out / "summary.json", summary)
    written.append("summary.json")
    return written
