import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from trdsent.context import (
    ABBREVIATIONS,
    PLACEHOLDER,
    extract_window,
    extract_windows,
    segment_sentences,
    unmask,
)
from trdsent.corpus import Post
from trdsent.errors import SpanOutOfBounds
from trdsent.matcher import Mention


def post(body="", title="", pid="p1"):
    return Post(post_id=pid, subreddit="s", author_id="a", created_at=0, title=title, body=body)


def mention(span, field="body", pid="p1", mid="p1:0000"):
    return Mention(
        mention_id=mid, post_id=pid, generic_name="g", surface="x",
        char_span=span, field=field, sentence_index=0,
    )


def sentences(text):
    return [text[a:b] for a, b in segment_sentences(text)]


class TestSegmentation:
    def test_empty(self):
        assert segment_sentences("") == []

    def test_single_sentence_no_terminator(self):
        assert segment_sentences("no terminator here") == [(0, 18)]

    def test_basic_split_keeps_trailing_space(self):
        assert sentences("One. Two.") == ["One. ", "Two."]

    def test_exclamation_and_question(self):
        assert sentences("Now! Really? Yes.") == ["Now! ", "Really? ", "Yes."]

    def test_newline_breaks(self):
        assert sentences("line one\nline two") == ["line one\n", "line two"]

    def test_newline_swallows_following_blank_lines(self):
        assert sentences("a\n\n  \nb") == ["a\n\n  \n", "b"]

    def test_decimal_point_is_internal(self):
        assert sentences("Took 2.5 mg daily. Felt fine.") == ["Took 2.5 mg daily. ", "Felt fine."]

    def test_abbreviation_guard(self):
        assert sentences("Dr. Smith said no.") == ["Dr. Smith said no."]
        assert sentences("e.g. this one") == ["e.g. this one"]

    def test_non_abbreviation_dotted_word_breaks(self):
        assert sentences("A. B.") == ["A. ", "B."]

    def test_closing_quote_attaches_to_sentence(self):
        assert sentences('He said "stop." Then left.') == ['He said "stop." ', "Then left."]

    def test_whitespace_only_text_is_one_span(self):
        assert segment_sentences("   ") == [(0, 3)]

    def test_leading_whitespace_joins_first_sentence(self):
        assert sentences("\n  First. Second.") == ["\n  First. ", "Second."]

    def test_terminator_at_end_of_text(self):
        assert sentences("Done.") == ["Done."]

    def test_abbreviation_list_loaded(self):
        assert "dr" in ABBREVIATIONS
        assert "e.g" in ABBREVIATIONS
        # plain words that end sentences must not be listed
        assert "no" not in ABBREVIATIONS

    @given(st.text(max_size=300))
    @settings(max_examples=300)
    def test_spans_tile_text(self, text):
        spans = segment_sentences(text)
        if not text:
            assert spans == []
            return
        assert spans[0][0] == 0
        assert spans[-1][1] == len(text)
        for (a1, b1), (a2, b2) in zip(spans, spans[1:]):
            assert b1 == a2
        assert all(a < b for a, b in spans)


class TestWindow:
    def test_small_text_keeps_everything(self):
        p = post(body="before zoloft after")
        w = extract_window(p, mention((7, 13)))
        assert w.masked_text == f"before {PLACEHOLDER} after"
        assert w.window_span == (0, 19)
        assert w.placeholder_offset == 7

    def test_placeholder_exactly_once(self):
        p = post(body="a" * 50 + " zoloft " + "b" * 50)
        w = extract_window(p, mention((51, 57)), max_chars=30)
        assert w.masked_text.count(PLACEHOLDER) == 1

    def test_budget_counts_source_chars(self):
        body = "x" * 500 + "zoloft" + "y" * 500
        w = extract_window(post(body=body), mention((500, 506)), max_chars=100)
        a, b = w.window_span
        assert b - a == 100
        # symmetric split of the 94 leftover chars
        assert w.placeholder_offset == 47

    def test_clipped_start_pours_budget_right(self):
        body = "zoloft" + "y" * 500
        w = extract_window(post(body=body), mention((0, 6)), max_chars=100)
        assert w.window_span == (0, 100)
        assert w.placeholder_offset == 0

    def test_clipped_end_pours_budget_left(self):
        body = "y" * 500 + "zoloft"
        w = extract_window(post(body=body), mention((500, 506)), max_chars=100)
        assert w.window_span == (406, 506)
        assert w.masked_text.endswith(PLACEHOLDER)

    def test_surface_longer_than_budget_still_masked(self):
        body = "ab electroconvulsive therapy cd"
        w = extract_window(post(body=body), mention((3, 28)), max_chars=10)
        assert w.masked_text == PLACEHOLDER
        assert w.window_span == (3, 28)

    def test_title_field(self):
        p = post(title="zoloft on top", body="irrelevant")
        w = extract_window(p, mention((0, 6), field="title"))
        assert w.masked_text.startswith(PLACEHOLDER)

    def test_wrong_post_rejected(self):
        with pytest.raises(ValueError):
            extract_window(post(body="x", pid="other"), mention((0, 1)))

    def test_bad_span_rejected(self):
        with pytest.raises(SpanOutOfBounds):
            extract_window(post(body="short"), mention((2, 99)))
        with pytest.raises(SpanOutOfBounds):
            extract_window(post(body="short"), mention((3, 3)))

    def test_nonpositive_budget_rejected(self):
        with pytest.raises(ValueError):
            extract_window(post(body="abc"), mention((0, 1)), max_chars=0)

    def test_ordering_by_mention_id(self):
        p = post(body="zoloft and zoloft")
        ms = [mention((11, 17), mid="p1:0001"), mention((0, 6), mid="p1:0000")]
        windows = extract_windows([p], ms)
        assert [w.mention_id for w in windows] == ["p1:0000", "p1:0001"]

    @given(
        st.text(alphabet="ab c.\n", min_size=1, max_size=400),
        st.data(),
        st.integers(min_value=1, max_value=60),
    )
    @settings(max_examples=300)
    def test_window_contract_fuzzed(self, body, data, max_chars):
        s = data.draw(st.integers(min_value=0, max_value=len(body) - 1))
        e = data.draw(st.integers(min_value=s + 1, max_value=len(body)))
        p = post(body=body)
        w = extract_window(p, mention((s, e)), max_chars=max_chars)
        a, b = w.window_span
        assert 0 <= a <= s and e <= b <= len(body)
        # source length never exceeds the budget (unless the surface alone does)
        assert b - a <= max(max_chars, e - s)
        # masking is reversible byte for byte
        assert unmask(w, body[s:e]) == body[a:b]
        assert w.masked_text.index(PLACEHOLDER) == w.placeholder_offset
        # full budget is used whenever the field is long enough
        if len(body) >= max_chars:
            assert b - a == max(max_chars, e - s)

    @given(
        st.integers(min_value=1, max_value=50),
        st.integers(min_value=0, max_value=49),
    )
    def test_window_grows_monotonically(self, max_chars, start):
        body = "q" * 120
        m = mention((start, start + 3))
        small = extract_window(post(body=body), m, max_chars=max_chars)
        large = extract_window(post(body=body), m, max_chars=max_chars + 7)
        sa, sb = small.window_span
        la, lb = large.window_span
        assert la <= sa and lb >= sb
