"""Benchmark the mention-scan kernels: compiled extension vs pure Python.

Generates a seeded synthetic corpus salted with real lexicon surfaces, then
times the full per-post matching path (fold, scan, overlap resolution,
sentence indexing) under each kernel.

    python3 benchmarks/bench_matcher.py --posts 2000 --chars 1200 --repeats 3
"""

from __future__ import annotations

import argparse
import os
import random
import statistics
import sys
from time import perf_counter

from trdsent.corpus import Post
from trdsent.lexicon import load_reference_lexicon
from trdsent.matcher import MentionMatcher, match_corpus, scan_backend

FILLER = (
    "after weeks of this i honestly could not tell whether anything changed "
    "my doctor suggested we keep the dose where it is and wait another month "
    "the side effects were mostly mild but the brain fog made work difficult "
    "has anyone here switched and noticed a real difference in their energy"
).split()


def build_corpus(n_posts: int, chars_per_post: int, seed: int) -> list[Post]:
    lexicon = load_reference_lexicon()
    surfaces = sorted(lexicon.surface_index)
    rng = random.Random(seed)
    posts = []
    for i in range(n_posts):
        words: list[str] = []
        length = 0
        while length < chars_per_post:
            if rng.random() < 0.08:
                w = rng.choice(surfaces)
                if rng.random() < 0.3:
                    w = w.upper()
            else:
                w = rng.choice(FILLER)
            words.append(w)
            length += len(w) + 1
        body = " ".join(words)
        posts.append(
            Post(
                post_id=f"b{i:06d}",
                subreddit="TRD",
                author_id=f"u{i % 199}",
                created_at=1546300800 + i,
                title="synthetic benchmark post",
                body=body,
            )
        )
    return posts


def time_backend(posts: list[Post], repeats: int, force_python: bool) -> tuple[float, int]:
    """Median seconds per full corpus pass, and the mention count found."""
    if force_python:
        os.environ["TRDSENT_FORCE_PY_SCAN"] = "1"
    else:
        os.environ.pop("TRDSENT_FORCE_PY_SCAN", None)
    lexicon = load_reference_lexicon()
    matcher = MentionMatcher(lexicon)
    timings = []
    mentions = 0
    for _ in range(repeats):
        t0 = perf_counter()
        mentions = len(match_corpus(posts, matcher))
        timings.append(perf_counter() - t0)
    return statistics.median(timings), mentions


def time_kernel_only(posts: list[Post], repeats: int) -> tuple[float, float]:
    """Median seconds per pass for just the automaton scan, (python, compiled)."""
    from trdsent._automaton import build_automaton
    from trdsent._scan import find_hits as find_hits_c
    from trdsent._scan_py import find_hits as find_hits_py
    from trdsent.textutil import fold_text

    lexicon = load_reference_lexicon()
    automaton = build_automaton(sorted(lexicon.surface_index))
    texts = [fold_text(p.body) for p in posts]

    def run(find_hits):
        timings = []
        for _ in range(repeats):
            t0 = perf_counter()
            for text in texts:
                find_hits(text, automaton)
            timings.append(perf_counter() - t0)
        return statistics.median(timings)

    return run(find_hits_py), run(find_hits_c)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--posts", type=int, default=2000)
    parser.add_argument("--chars", type=int, default=1200, help="approx body length per post")
    parser.add_argument("--repeats", type=int, default=3)
    parser.add_argument("--seed", type=int, default=1)
    args = parser.parse_args(argv)

    posts = build_corpus(args.posts, args.chars, args.seed)
    total_chars = sum(len(p.title) + len(p.body) for p in posts)
    print(f"corpus: {len(posts)} posts, {total_chars / 1e6:.1f} MB of text, seed {args.seed}")

    os.environ.pop("TRDSENT_FORCE_PY_SCAN", None)
    have_compiled = scan_backend() == "compiled"
    if not have_compiled:
        print("note: compiled kernel not available; timing pure Python only")

    py_time, py_mentions = time_backend(posts, args.repeats, force_python=True)
    print(f"python   kernel: {py_time:8.3f} s/pass  {total_chars / py_time / 1e6:6.1f} MB/s  ({py_mentions} mentions)")

    if have_compiled:
        c_time, c_mentions = time_backend(posts, args.repeats, force_python=False)
        print(f"compiled kernel: {c_time:8.3f} s/pass  {total_chars / c_time / 1e6:6.1f} MB/s  ({c_mentions} mentions)")
        if c_mentions != py_mentions:
            print("error: kernels disagree on mention count", file=sys.stderr)
            return 1
        print(f"speedup (full matching path): {py_time / c_time:.1f}x")

        ko_py, ko_c = time_kernel_only(posts, args.repeats)
        scan_chars = sum(len(p.body) for p in posts)
        print(f"scan only, python  : {ko_py:8.3f} s/pass  {scan_chars / ko_py / 1e6:6.1f} MB/s")
        print(f"scan only, compiled: {ko_c:8.3f} s/pass  {scan_chars / ko_c / 1e6:6.1f} MB/s")
        print(f"speedup (scan kernel alone): {ko_py / ko_c:.1f}x")
    return 0


if __name__ == "__main__":
    sys.exit(main())
