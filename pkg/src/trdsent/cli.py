"""Command-line pipeline driver.

Each subcommand reads and writes the plain file formats, so a full run is a
chain of small deterministic steps:

    trdsent ingest -> filter -> match -> window -> classify-rule
            -> ingest-predictions -> stats / report

Any module error exits nonzero with a one-line ``error: <Kind>: <detail>``.
"""

from __future__ import annotations

import argparse
import sys
from datetime import datetime, timezone
from pathlib import Path

from trdsent import __version__
from trdsent.context import PLACEHOLDER, ContextWindow, extract_windows
from trdsent.corpus import (
    KeywordLexicon,
    annual_share,
    filter_trd,
    ingest,
    load_reference_keywords,
    serialize_posts,
)
from trdsent.errors import PipelineError
from trdsent.fileio import (
    labeled_records,
    mention_records,
    read_counts,
    read_labeled,
    read_lines,
    read_mentions,
    read_text,
    read_windows,
    vocabulary_of_posts,
    write_json,
    write_labeled,
    write_mentions,
    write_predictions,
    write_review,
    write_text,
    write_windows,
)
from trdsent.lexicon import (
    ClassTaxonomy,
    build_variant_prompt,
    compile_lexicon,
    default_taxonomy,
    generate_misspelling_variants,
    load_reference_lexicon,
)
from trdsent.matcher import Mention, MentionMatcher, match_corpus, scan_backend
from trdsent.report import battery_table, build_report, write_bundle
from trdsent.sentiment import (
    LabeledMention,
    SentimentLabel,
    build_augmentation_prompt,
    evaluate,
    ingest_predictions,
    load_reference_cues,
    parse_label,
    rule_classify,
    sample_for_review,
)
from trdsent.stats import analyze_contingency, battery_from_counts, pairwise_class_tests


def _load_posts(path: str):
    posts, report = ingest(read_lines(path))
    if report.issues:
        first = report.issues[0]
        raise ValueError(
            f"{len(report.issues)} bad record(s) in {path}; first: line {first.line_no} {first.detail}"
        )
    return posts


def _load_lexicon(args):
    if getattr(args, "lexicon", None):
        taxonomy = (
            ClassTaxonomy.from_json(read_text(args.taxonomy)) if getattr(args, "taxonomy", None) else default_taxonomy()
        )
        return compile_lexicon(read_text(args.lexicon), taxonomy)
    return load_reference_lexicon()


def _parse_date(text: str) -> datetime:
    return datetime.strptime(text, "%Y-%m-%d").replace(tzinfo=timezone.utc)


def _mentions_from_records(records) -> list[Mention]:
    return [
        Mention(
            mention_id=r.mention_id,
            post_id=r.post_id,
            generic_name=r.generic_name,
            surface=r.surface,
            char_span=(r.start, r.end),
            field=r.field,
            sentence_index=r.sentence_index,
        )
        for r in records
    ]


# --- subcommand handlers -----------------------------------------------------------


def cmd_ingest(args) -> int:
    end = int(_parse_date(args.collection_end).timestamp()) + 86399 if args.collection_end else None
    posts, report = ingest(read_lines(args.posts), collection_end=end)
    write_text(args.out, serialize_posts(posts))
    if args.report:
        write_json(args.report, report.to_dict())
    print(f"ingested {report.ingested} of {report.total_lines} records ({len(report.issues)} issues)")
    return 0


def cmd_filter(args) -> int:
    posts = _load_posts(args.posts)
    keywords = (
        KeywordLexicon.from_text(read_text(args.keywords)) if args.keywords else load_reference_keywords()
    )
    result = filter_trd(posts, keywords)
    write_text(args.out, serialize_posts(list(result.posts)))
    if args.matches:
        write_json(args.matches, {pid: list(ks) for pid, ks in sorted(result.matched_keywords.items())})
    print(f"retained {len(result.posts)} of {len(posts)} posts")
    return 0


def cmd_match(args) -> int:
    posts = _load_posts(args.posts)
    lexicon = _load_lexicon(args)
    matcher = MentionMatcher(lexicon)
    mentions = match_corpus(posts, matcher)
    records = mention_records(mentions, posts, lexicon)
    write_text(args.out, write_mentions(records))
    print(f"matched {len(records)} mentions in {len(posts)} posts ({scan_backend()} kernel)")
    return 0


def cmd_window(args) -> int:
    posts = _load_posts(args.posts)
    records = read_mentions(read_text(args.mentions))
    windows = extract_windows(posts, _mentions_from_records(records), max_chars=args.max_chars)
    write_text(args.out, write_windows(windows))
    print(f"wrote {len(windows)} windows")
    return 0


def cmd_classify_rule(args) -> int:
    window_map = read_windows(read_text(args.windows))
    if args.pos_cues or args.neg_cues:
        if not (args.pos_cues and args.neg_cues):
            raise ValueError("--pos-cues and --neg-cues must be given together")
        pos = tuple(l.strip().lower() for l in read_text(args.pos_cues).splitlines() if l.strip() and not l.startswith("#"))
        neg = tuple(l.strip().lower() for l in read_text(args.neg_cues).splitlines() if l.strip() and not l.startswith("#"))
    else:
        pos, neg = load_reference_cues()
    labeled = []
    for mid in sorted(window_map):
        text = window_map[mid]
        offset = text.find(PLACEHOLDER)
        window = ContextWindow(
            mention_id=mid, masked_text=text, window_span=(0, len(text)), placeholder_offset=max(offset, 0)
        )
        labeled.append(rule_classify(window, pos, neg))
    write_text(args.out, write_predictions(labeled))
    print(f"classified {len(labeled)} windows")
    return 0


def cmd_ingest_predictions(args) -> int:
    records = read_mentions(read_text(args.mentions))
    join = ingest_predictions(read_lines(args.predictions), [r.mention_id for r in records], source=args.source)
    rows = labeled_records(records, list(join.labeled))
    write_text(args.out, write_labeled(rows))
    if args.missing:
        write_text(args.missing, "\n".join(join.missing) + ("\n" if join.missing else ""))
    print(f"joined {len(join.labeled)} predictions ({len(join.missing)} mentions unpredicted)")
    return 0


def _read_label_map(path: str) -> dict[str, str]:
    import json

    out: dict[str, str] = {}
    for line in read_lines(path):
        if not line.strip():
            continue
        rec = json.loads(line)
        mid = str(rec["mention_id"])
        if mid in out:
            raise ValueError(f"duplicate mention_id {mid} in {path}")
        out[mid] = parse_label(rec["label"]).value
    return out


def cmd_evaluate(args) -> int:
    gold = _read_label_map(args.gold)
    pred = _read_label_map(args.predictions)
    if set(gold) != set(pred):
        only_g = len(set(gold) - set(pred))
        only_p = len(set(pred) - set(gold))
        raise ValueError(f"gold/prediction id sets differ ({only_g} only in gold, {only_p} only in predictions)")
    ids = sorted(gold)
    rep = evaluate(
        [gold[i] for i in ids],
        [pred[i] for i in ids],
        bootstrap_resamples=args.resamples,
        ci_level=args.ci_level,
        seed=args.seed,
    )
    write_json(
        args.out,
        {
            "n": rep.n,
            "micro_f1": round(rep.micro_f1, 6),
            "micro_f1_ci": [round(rep.micro_f1_ci[0], 6), round(rep.micro_f1_ci[1], 6)],
            "macro_f1": round(rep.macro_f1, 6),
            "per_class": {
                k: {"precision": round(v.precision, 6), "recall": round(v.recall, 6), "f1": round(v.f1, 6)}
                for k, v in rep.per_class.items()
            },
            "confusion": [list(row) for row in rep.confusion],
            "bootstrap_resamples": rep.bootstrap_resamples,
            "ci_level": rep.ci_level,
            "seed": rep.seed,
        },
    )
    print(f"micro_f1 {rep.micro_f1:.4f} macro_f1 {rep.macro_f1:.4f} (n={rep.n})")
    return 0


def cmd_stats(args) -> int:
    if args.counts and not args.out:
        raise ValueError("--counts requires --out")
    if args.labeled and not args.outdir:
        raise ValueError("--labeled requires --outdir")
    if args.counts:
        battery = battery_from_counts(read_counts(read_text(args.counts)))
        write_text(args.out, battery_table(battery))
        print(f"tested {len(battery.results)} entities ({len(battery.ineligible)} ineligible)")
        return 0

    labeled = read_labeled(read_text(args.labeled))
    outdir = Path(args.outdir)
    counts = {
        name: (
            sum(1 for lr in labeled if lr.mention.generic_name == name and lr.label == "Positive"),
            sum(1 for lr in labeled if lr.mention.generic_name == name and lr.label == "Negative"),
        )
        for name in sorted({lr.mention.generic_name for lr in labeled})
    }
    battery = battery_from_counts(counts)
    write_text(outdir / "battery.tsv", battery_table(battery))

    classes = sorted({lr.mention.therapy_class for lr in labeled})
    table = [
        [sum(1 for lr in labeled if lr.mention.therapy_class == c and lr.label == lab) for lab in ("Negative", "Neutral", "Positive")]
        for c in classes
    ]
    contingency = analyze_contingency(table)
    pairwise = pairwise_class_tests(table, classes)
    write_json(
        outdir / "contingency.json",
        {
            "classes": classes,
            "table": table,
            "chi2": round(contingency.chi2, 6),
            "df": contingency.df,
            "p": f"{contingency.p:.2e}",
            "cramers_v": round(contingency.cramers_v, 6),
            "residuals": [[round(v, 6) for v in row] for row in contingency.residuals],
            "pairwise": [
                {
                    "class_a": p.class_a,
                    "class_b": p.class_b,
                    "chi2": None if p.chi2 is None else round(p.chi2, 6),
                    "p_raw": None if p.p_raw is None else f"{p.p_raw:.2e}",
                    "p_fdr": None if p.p_fdr is None else f"{p.p_fdr:.2e}",
                    "tested": p.tested,
                }
                for p in pairwise
            ],
        },
    )
    print(f"tested {len(battery.results)} entities, {len(pairwise)} class pairs")
    return 0


def cmd_report(args) -> int:
    posts = _load_posts(args.posts)
    records = read_mentions(read_text(args.mentions))
    labeled = read_labeled(read_text(args.labeled))
    end = _parse_date(args.collection_end) if args.collection_end else None
    bundle = build_report(posts, records, labeled, collection_end=end)
    files = write_bundle(bundle, args.outdir)
    print(f"wrote {len(files)} report files to {args.outdir}")
    return 0


def cmd_sample_review(args) -> int:
    labeled_rows = read_labeled(read_text(args.labeled))
    windows = read_windows(read_text(args.windows))
    labeled = [
        LabeledMention(
            mention_id=r.mention.mention_id,
            label=parse_label(r.label),
            confidence=r.confidence,
            source=r.source,
        )
        for r in labeled_rows
    ]
    rows = sample_for_review(labeled, windows, n=args.n, seed=args.seed)
    write_text(args.out, write_review(rows))
    print(f"sampled {len(rows)} of {len(labeled)}")
    return 0


def cmd_lexicon_compile(args) -> int:
    lexicon = _load_lexicon(args)
    stats = lexicon.stats
    payload = {
        "entity_count": stats.entity_count,
        "variant_count": stats.variant_count,
        "median_variants": stats.median_variants,
        "min_variants": stats.min_variants,
        "max_variants": stats.max_variants,
    }
    if args.stats_out:
        write_json(args.stats_out, payload)
    if args.normalized_out:
        write_text(args.normalized_out, lexicon.to_jsonl())
    print(
        f"{stats.entity_count} entities, {stats.variant_count} variants "
        f"(median {stats.median_variants:g}, range {stats.min_variants}-{stats.max_variants})"
    )
    return 0


def cmd_lexicon_variants(args) -> int:
    if args.vocab:
        vocab = [l.strip() for l in read_text(args.vocab).splitlines() if l.strip()]
    else:
        vocab = vocabulary_of_posts(_load_posts(args.posts))
    variants = generate_misspelling_variants(args.generic, vocab, args.max_edit)
    write_text(args.out, "\n".join(variants) + ("\n" if variants else ""))
    print(f"{len(variants)} candidates for {args.generic}")
    return 0


def cmd_prompts(args) -> int:
    if args.kind == "variant":
        if not args.generic:
            raise ValueError("--generic is required for --kind variant")
        examples = [l.strip() for l in read_text(args.examples).splitlines() if l.strip()] if args.examples else []
        spec = build_variant_prompt(args.generic, examples)
        write_text(args.out, spec.text)
        if args.metadata_out:
            write_json(args.metadata_out, dict(spec.metadata))
        print(f"wrote variant prompt for {args.generic}")
        return 0

    if not (args.posts and args.mentions and args.labeled):
        raise ValueError("--posts, --mentions, and --labeled are required for --kind augment")

    import json

    posts = {p.post_id: p for p in _load_posts(args.posts)}
    records = {r.mention_id: r for r in read_mentions(read_text(args.mentions))}
    labeled = read_labeled(read_text(args.labeled))
    lines = []
    for lr in sorted(labeled, key=lambda x: x.mention.mention_id):
        if lr.label == SentimentLabel.NEUTRAL.value:
            continue
        r = records[lr.mention.mention_id]
        post = posts[r.post_id]
        text = post.title if r.field == "title" else post.body
        prompt = build_augmentation_prompt(text, (r.start, r.end), parse_label(lr.label), n_variants=args.variants)
        lines.append(
            json.dumps(
                {"mention_id": r.mention_id, "label": lr.label, "prompt": prompt},
                sort_keys=True,
                ensure_ascii=False,
            )
        )
    write_text(args.out, "\n".join(lines) + ("\n" if lines else ""))
    print(f"wrote {len(lines)} augmentation prompts")
    return 0


# --- parser -------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="trdsent",
        description="Medication-sentiment corpus pipeline: filter, match, window, label, analyze.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="validate raw post records")
    p.add_argument("--posts", required=True, help="raw line-delimited post records")
    p.add_argument("--out", required=True, help="validated posts file")
    p.add_argument("--report", help="ingest report JSON")
    p.add_argument("--collection-end", help="reject records after this date (YYYY-MM-DD)")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("filter", help="keep posts matching the cohort keywords")
    p.add_argument("--posts", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--keywords", help="keyword file (default: bundled list)")
    p.add_argument("--matches", help="JSON map of post_id -> matched keywords")
    p.set_defaults(func=cmd_filter)

    p = sub.add_parser("match", help="detect medication mentions")
    p.add_argument("--posts", required=True)
    p.add_argument("--out", required=True, help="mentions table (TSV)")
    p.add_argument("--lexicon", help="lexicon JSONL (default: bundled)")
    p.add_argument("--taxonomy", help="taxonomy JSON (default: bundled)")
    p.set_defaults(func=cmd_match)

    p = sub.add_parser("window", help="build masked context windows")
    p.add_argument("--posts", required=True)
    p.add_argument("--mentions", required=True)
    p.add_argument("--out", required=True, help="windows file (JSONL)")
    p.add_argument("--max-chars", type=int, default=1000)
    p.set_defaults(func=cmd_window)

    p = sub.add_parser("classify-rule", help="label windows with the rule-based reference classifier")
    p.add_argument("--windows", required=True)
    p.add_argument("--out", required=True, help="predictions file (JSONL)")
    p.add_argument("--pos-cues", help="positive cue phrases, one per line")
    p.add_argument("--neg-cues", help="negative cue phrases, one per line")
    p.set_defaults(func=cmd_classify_rule)

    p = sub.add_parser("ingest-predictions", help="join predictions onto the mention table")
    p.add_argument("--predictions", required=True)
    p.add_argument("--mentions", required=True)
    p.add_argument("--out", required=True, help="labeled mentions table (TSV)")
    p.add_argument("--source", default="external", choices=["external", "rule"])
    p.add_argument("--missing", help="write unpredicted mention_ids here")
    p.set_defaults(func=cmd_ingest_predictions)

    p = sub.add_parser("evaluate", help="score predictions against gold labels")
    p.add_argument("--gold", required=True)
    p.add_argument("--predictions", required=True)
    p.add_argument("--out", required=True, help="evaluation report JSON")
    p.add_argument("--resamples", type=int, default=1000)
    p.add_argument("--ci-level", type=float, default=0.95)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("stats", help="asymmetry battery and contingency analysis")
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--counts", help="name/positive_n/negative_n TSV")
    group.add_argument("--labeled", help="labeled mentions table")
    p.add_argument("--out", help="battery TSV (with --counts)")
    p.add_argument("--outdir", help="output directory (with --labeled)")
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("report", help="assemble the full report bundle")
    p.add_argument("--posts", required=True)
    p.add_argument("--mentions", required=True)
    p.add_argument("--labeled", required=True)
    p.add_argument("--outdir", required=True)
    p.add_argument("--collection-end", help="flag the final partial year (YYYY-MM-DD)")
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("sample-review", help="draw a seeded spot-check sample")
    p.add_argument("--labeled", required=True)
    p.add_argument("--windows", required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_sample_review)

    p = sub.add_parser("lexicon-compile", help="validate a lexicon and report its shape")
    p.add_argument("--lexicon", help="lexicon JSONL (default: bundled)")
    p.add_argument("--taxonomy", help="taxonomy JSON (default: bundled)")
    p.add_argument("--stats-out", help="stats JSON")
    p.add_argument("--normalized-out", help="normalized lexicon JSONL")
    p.set_defaults(func=cmd_lexicon_compile)

    p = sub.add_parser("lexicon-variants", help="misspelling candidates from a corpus vocabulary")
    p.add_argument("--generic", required=True)
    p.add_argument("--max-edit", type=int, default=1)
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--vocab", help="one token per line")
    group.add_argument("--posts", help="posts file to draw the vocabulary from")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_lexicon_variants)

    p = sub.add_parser("prompts", help="emit generation prompts as data")
    p.add_argument("--kind", required=True, choices=["variant", "augment"])
    p.add_argument("--generic", help="target generic name (variant kind)")
    p.add_argument("--examples", help="usage examples, one per line (variant kind)")
    p.add_argument("--metadata-out", help="decoding metadata JSON (variant kind)")
    p.add_argument("--posts", help="posts file (augment kind)")
    p.add_argument("--mentions", help="mentions table (augment kind)")
    p.add_argument("--labeled", help="labeled mentions table (augment kind)")
    p.add_argument("--variants", type=int, default=5, help="synthetic variants per instance")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_prompts)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except PipelineError as exc:
        print(f"error: {exc.kind}: {exc}", file=sys.stderr)
        return 2
    except (ValueError, OSError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
