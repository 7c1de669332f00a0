import json
from pathlib import Path

import pytest

# --- acceptance summary: one pass/fail line per numbered criterion ------------

_ACCEPTANCE: dict[str, str] = {}


def pytest_runtest_logreport(report):
    name = report.nodeid.rsplit("::", 1)[-1]
    if "test_criterion_" not in name:
        return
    if report.when == "call" or report.outcome != "passed":
        _ACCEPTANCE[name] = report.outcome


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(_ACCEPTANCE):
        label = name.split("test_criterion_", 1)[1]
        terminalreporter.write_line(f"criterion {label}: {_ACCEPTANCE[name].upper()}")

from trdsent.corpus import filter_trd, ingest, load_reference_keywords
from trdsent.lexicon import load_reference_lexicon
from trdsent.matcher import MentionMatcher, match_corpus

FIXTURES = Path(__file__).resolve().parent.parent / "data" / "fixtures"


@pytest.fixture(scope="session")
def fixture_dir() -> Path:
    return FIXTURES


@pytest.fixture(scope="session")
def raw_posts():
    posts, report = ingest((FIXTURES / "posts.jsonl").read_text().splitlines())
    assert not report.issues
    return posts


@pytest.fixture(scope="session")
def cohort(raw_posts):
    return list(filter_trd(raw_posts, load_reference_keywords()).posts)


@pytest.fixture(scope="session")
def lexicon():
    return load_reference_lexicon()


@pytest.fixture(scope="session")
def matcher(lexicon):
    return MentionMatcher(lexicon)


@pytest.fixture(scope="session")
def mentions(cohort, matcher):
    return match_corpus(cohort, matcher)


@pytest.fixture(scope="session")
def gold_labels():
    out = {}
    for line in (FIXTURES / "gold.jsonl").read_text().splitlines():
        rec = json.loads(line)
        out[rec["mention_id"]] = rec["label"]
    return out
