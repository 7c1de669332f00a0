"""Round-trip and format tests for the table/JSONL readers and writers."""

import json

import pytest
from hypothesis import given, strategies as st

from trdsent.context import extract_window
from trdsent.corpus import Post
from trdsent.fileio import (
    LABELED_COLUMNS,
    MENTION_COLUMNS,
    MentionRecord,
    LabeledRecord,
    _escape,
    _unescape,
    labeled_records,
    mention_records,
    read_counts,
    read_labeled,
    read_lines,
    read_mentions,
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
from trdsent.lexicon import ClassTaxonomy, compile_lexicon
from trdsent.matcher import Mention, match_mentions
from trdsent.sentiment import InvalidLabel, LabeledMention, ReviewRow, SentimentLabel

ONE_CLASS = ClassTaxonomy(classes=("c",), source_named=frozenset({"c"}))

HOSTILE = [
    "plain",
    "tab\there",
    "new\nline",
    "carriage\rreturn",
    "back\\slash",
    "\\t literal backslash-t",
    "mixed \t\n\r\\ everything",
    "unicode ünïcødé 💊 İstanbul",
    "trailing backslash \\",
    "",
]


def small_lexicon(entities):
    lines = [
        json.dumps({"generic_name": g, "therapy_class": "c", "variants": vs})
        for g, vs in entities.items()
    ]
    return compile_lexicon("\n".join(lines) + "\n", ONE_CLASS)


def make_record(mention_id="p1:0000", **overrides):
    base = dict(
        mention_id=mention_id,
        post_id="p1",
        subreddit="TRD",
        author="user_a",
        created_utc=1551787200,
        generic_name="ketamine",
        therapy_class="c",
        surface="ketamine",
        field="body",
        start=0,
        end=8,
        sentence_index=0,
    )
    base.update(overrides)
    return MentionRecord(**base)


class TestEscaping:
    @pytest.mark.parametrize("text", HOSTILE)
    def test_round_trip(self, text):
        assert _unescape(_escape(text)) == text

    def test_escaped_text_is_single_line_no_tabs(self):
        for text in HOSTILE:
            escaped = _escape(text)
            assert "\t" not in escaped
            assert "\n" not in escaped
            assert "\r" not in escaped

    def test_unknown_escape_preserved(self):
        assert _unescape("\\x") == "\\x"

    def test_lone_trailing_backslash_preserved(self):
        assert _unescape("abc\\") == "abc\\"

    @given(st.text(max_size=60))
    def test_round_trip_fuzzed(self, text):
        assert _unescape(_escape(text)) == text


class TestMentionsTable:
    def test_join_and_sort(self):
        lexicon = small_lexicon({"ketamine": ["ketamine"], "lithium": ["lithium"]})
        posts = [
            Post(
                post_id="p1",
                subreddit="TRD",
                author_id="user_a",
                created_at=1551787200,
                title="ketamine",
                body="then lithium",
            )
        ]
        mentions = match_mentions(posts[0], lexicon)
        records = mention_records(mentions, posts, lexicon)
        assert [r.mention_id for r in records] == sorted(r.mention_id for r in records)
        assert {r.generic_name for r in records} == {"ketamine", "lithium"}
        assert all(r.subreddit == "TRD" and r.author == "user_a" for r in records)
        assert all(r.therapy_class == "c" for r in records)

    def test_round_trip_hostile_text_columns(self):
        records = [
            make_record("p1:0000", subreddit=HOSTILE[6], author="a\tb", surface="x\ny"),
            make_record("p1:0001", start=5, end=9, sentence_index=3),
        ]
        assert read_mentions(write_mentions(records)) == records

    def test_one_line_per_record(self):
        records = [make_record(surface="multi\nline\tsurface")]
        text = write_mentions(records)
        assert len(text.splitlines()) == 2  # header + one row

    def test_header_written(self):
        assert write_mentions([]).splitlines()[0] == "\t".join(MENTION_COLUMNS)

    def test_bad_header_rejected(self):
        with pytest.raises(ValueError, match="header"):
            read_mentions("mention_id\tpost_id\nx\ty\n")

    def test_bad_row_rejected(self):
        text = write_mentions([]) + "only\tthree\tcolumns\n"
        with pytest.raises(ValueError, match="bad mentions row"):
            read_mentions(text)

    def test_integer_columns_parsed(self):
        rec = read_mentions(write_mentions([make_record(start=17, end=25, sentence_index=2)]))[0]
        assert (rec.start, rec.end, rec.sentence_index) == (17, 25, 2)
        assert isinstance(rec.created_utc, int)


class TestWindowsFile:
    def test_round_trip(self):
        lexicon = small_lexicon({"ketamine": ["ketamine"]})
        post = Post(
            post_id="p1",
            subreddit="s",
            author_id="a",
            created_at=0,
            title="",
            body="ketamine helped, honestly.",
        )
        mentions = match_mentions(post, lexicon)
        windows = [extract_window(post, m, max_chars=50) for m in mentions]
        mapping = read_windows(write_windows(windows))
        assert mapping == {w.mention_id: w.masked_text for w in windows}

    def test_sorted_by_mention_id(self):
        lexicon = small_lexicon({"ketamine": ["ketamine"], "lithium": ["lithium"]})
        post = Post(
            post_id="p1",
            subreddit="s",
            author_id="a",
            created_at=0,
            title="lithium",
            body="ketamine",
        )
        windows = [extract_window(post, m, max_chars=50) for m in match_mentions(post, lexicon)]
        ids = [json.loads(line)["mention_id"] for line in write_windows(windows).splitlines()]
        assert ids == sorted(ids)

    def test_empty_is_empty_string(self):
        assert write_windows([]) == ""
        assert read_windows("") == {}

    def test_newlines_in_text_stay_one_record_per_line(self):
        lexicon = small_lexicon({"ketamine": ["ketamine"]})
        post = Post(
            post_id="p1",
            subreddit="s",
            author_id="a",
            created_at=0,
            title="",
            body="line one\nketamine\nline three",
        )
        windows = [extract_window(post, m, max_chars=100) for m in match_mentions(post, lexicon)]
        text = write_windows(windows)
        assert len(text.splitlines()) == 1
        assert "\n" in next(iter(read_windows(text).values()))


class TestPredictionsFile:
    def test_format_and_order(self):
        labeled = [
            LabeledMention("p2:0000", SentimentLabel.NEGATIVE, 0.5, "external"),
            LabeledMention("p1:0000", SentimentLabel.POSITIVE, 1.0, "external"),
        ]
        lines = write_predictions(labeled).splitlines()
        assert [json.loads(l)["mention_id"] for l in lines] == ["p1:0000", "p2:0000"]
        first = json.loads(lines[0])
        assert first == {"confidence": 1.0, "label": "Positive", "mention_id": "p1:0000"}

    def test_keys_sorted_in_json(self):
        labeled = [LabeledMention("p1:0000", SentimentLabel.NEUTRAL, 0.25, "rule")]
        line = write_predictions(labeled).strip()
        keys = list(json.loads(line, object_pairs_hook=lambda pairs: [k for k, _ in pairs]))
        assert keys == sorted(keys)


class TestLabeledTable:
    def _rows(self):
        records = [make_record("p1:0000"), make_record("p1:0001", start=3, end=7)]
        labeled = [
            LabeledMention("p1:0000", SentimentLabel.POSITIVE, 1 / 3, "rule"),
            LabeledMention("p1:0001", SentimentLabel.NEGATIVE, 1.0, "external"),
        ]
        return labeled_records(records, labeled)

    def test_join_keeps_only_labeled(self):
        records = [make_record("p1:0000"), make_record("p1:0001", start=3, end=7)]
        labeled = [LabeledMention("p1:0001", SentimentLabel.NEUTRAL, 0.5, "rule")]
        rows = labeled_records(records, labeled)
        assert [r.mention.mention_id for r in rows] == ["p1:0001"]

    def test_round_trip_exact_floats(self):
        rows = self._rows()
        back = read_labeled(write_labeled(rows))
        assert back == rows
        assert back[0].confidence == 1 / 3  # repr round-trips floats bit-exactly

    def test_header(self):
        assert write_labeled([]).splitlines()[0] == "\t".join(LABELED_COLUMNS)
        assert LABELED_COLUMNS[:12] == MENTION_COLUMNS

    def test_bad_header_rejected(self):
        with pytest.raises(ValueError, match="header"):
            read_labeled(write_mentions([]))

    def test_bad_row_rejected(self):
        text = write_labeled([]) + "short\trow\n"
        with pytest.raises(ValueError, match="bad labeled row"):
            read_labeled(text)

    def test_non_canonical_label_rejected(self):
        rows = self._rows()
        text = write_labeled(rows).replace("\tPositive\t", "\tpositive\t")
        with pytest.raises(InvalidLabel):
            read_labeled(text)


class TestReviewSheet:
    def test_format(self):
        rows = [ReviewRow("p1:0000", "took <MEDICATION>\tfine", "Positive", 1.0)]
        lines = write_review(rows).splitlines()
        assert lines[0] == "mention_id\tmasked_text\tlabel\tconfidence"
        assert lines[1] == "p1:0000\ttook <MEDICATION>\\tfine\tPositive\t1.0"


class TestReadCounts:
    def test_basic(self):
        text = "ketamine\t496\t370\nsertraline\t52\t174\n"
        assert read_counts(text) == {"ketamine": (496, 370), "sertraline": (52, 174)}

    def test_header_and_comments_and_blanks_skipped(self):
        text = "# counts\nname\tpositive_n\tnegative_n\n\nketamine\t1\t2\n"
        assert read_counts(text) == {"ketamine": (1, 2)}

    def test_duplicate_rejected(self):
        with pytest.raises(ValueError, match="duplicate"):
            read_counts("a\t1\t2\na\t3\t4\n")

    def test_bad_row_rejected(self):
        with pytest.raises(ValueError, match="bad counts row"):
            read_counts("a\t1\n")

    def test_non_integer_rejected(self):
        with pytest.raises(ValueError):
            read_counts("a\t1.5\t2\n")


class TestHelpers:
    def test_write_text_creates_parents(self, tmp_path):
        target = tmp_path / "deep" / "nested" / "file.txt"
        write_text(target, "hello\n")
        assert target.read_text(encoding="utf-8") == "hello\n"

    def test_write_json_sorted_and_trailing_newline(self, tmp_path):
        target = tmp_path / "out.json"
        write_json(target, {"b": 1, "a": [2, 3]})
        text = target.read_text(encoding="utf-8")
        assert text.endswith("\n")
        assert text.index('"a"') < text.index('"b"')
        assert json.loads(text) == {"b": 1, "a": [2, 3]}

    def test_read_lines_yields_each_line(self, tmp_path):
        target = tmp_path / "lines.txt"
        target.write_text("one\ntwo\n", encoding="utf-8")
        assert list(read_lines(target)) == ["one\n", "two\n"]

    def test_vocabulary_of_posts(self):
        posts = [
            Post(
                post_id="p1",
                subreddit="s",
                author_id="a",
                created_at=0,
                title="Zoloft helped",
                body="zoloft didn't",
            )
        ]
        vocab = vocabulary_of_posts(posts)
        assert vocab == sorted(vocab)
        assert "zoloft" in vocab and "didn't" in vocab
        assert vocab.count("zoloft") == 1
