import string

from hypothesis import given
from hypothesis import strategies as st

from trdsent.textutil import fold_text, is_token_boundary, is_token_char, token_spans

text_strategy = st.text(
    alphabet=st.characters(blacklist_categories=("Cs",)), max_size=200
)


@given(text_strategy)
def test_fold_preserves_length(text):
    assert len(fold_text(text)) == len(text)


@given(text_strategy)
def test_fold_idempotent(text):
    folded = fold_text(text)
    assert fold_text(folded) == folded


def test_fold_keeps_multichar_expansions_unfolded():
    # These lowercase to more than one char, so folding must leave them alone.
    assert fold_text("İ") == "İ"  # dotted capital I
    assert fold_text("AİB") == "aİb"


def test_token_spans_basic():
    text = "Zoloft helped, didn't it?"
    spans = token_spans(text)
    assert [text[a:b] for a, b in spans] == ["Zoloft", "helped", "didn't", "it"]


def test_token_spans_hyphen_and_apostrophe_joiners():
    text = "treatment-resistant won't stand-alone- x"
    words = [text[a:b] for a, b in token_spans(text)]
    assert words == ["treatment-resistant", "won't", "stand-alone", "x"]


def test_token_spans_underscore_splits():
    assert token_spans("a_b") == [(0, 1), (2, 3)]


@given(text_strategy)
def test_char_rule_agrees_with_token_regex(text):
    # The per-position rule and the token regex must carve identical sets.
    covered = set()
    for a, b in token_spans(text):
        assert a < b
        covered.update(range(a, b))
    for i in range(len(text)):
        assert is_token_char(text, i) == (i in covered)


@given(text_strategy, st.integers(min_value=0, max_value=210))
def test_boundary_definition(text, k):
    got = is_token_boundary(text, k)
    if k <= 0 or k >= len(text):
        assert got
    else:
        assert got == (not (is_token_char(text, k - 1) and is_token_char(text, k)))


def test_boundary_never_splits_a_span():
    text = "took amphetamine-dextroamphetamine today, didn't I"
    for a, b in token_spans(text):
        assert is_token_boundary(text, a)
        assert is_token_boundary(text, b)
        for k in range(a + 1, b):
            if is_token_char(text, k - 1) and is_token_char(text, k):
                assert not is_token_boundary(text, k)


def test_digits_are_token_chars():
    assert token_spans("5-HTP x2") == [(0, 5), (6, 8)]
    assert all(is_token_char(c, 0) for c in string.ascii_letters + string.digits)
