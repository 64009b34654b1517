from hypothesis import given, strategies as st

from hypfir.words import (
    WordParseError,
    format_word,
    parse_word,
    reduce_word,
    shortlex_key,
    word_inv,
    word_len,
    word_mul,
    words_up_to,
)
import pytest

letters = st.lists(st.sampled_from([1, -1, 2, -2]), max_size=12)


def naive_reduce(xs):
    # repeated scanning; deliberately different from the stack algorithm
    xs = list(xs)
    changed = True
    while changed:
        changed = False
        for i in range(len(xs) - 1):
            if xs[i] == -xs[i + 1]:
                del xs[i:i + 2]
                changed = True
                break
    return tuple(xs)


def test_cancellation_examples():
    assert parse_word("aA") == ()
    assert parse_word("abBa") == parse_word("aa")
    assert parse_word("bAab") == parse_word("bb")
    assert parse_word("a a⁻¹") == ()


def test_multiplication_examples():
    assert word_mul(parse_word("ab", 3), parse_word("Bc", 3)) == parse_word("ac", 3)
    assert word_mul((), parse_word("ab")) == parse_word("ab")
    assert word_mul((1,), (1,)) == (1, 1)


def test_format_round_trip():
    for w in words_up_to(2, 3):
        assert parse_word(format_word(w), 2) == w
    assert format_word(()) == "1"


def test_parse_errors():
    with pytest.raises(WordParseError):
        parse_word("c", 2)
    with pytest.raises(WordParseError):
        parse_word("a?")


def test_ball_sizes():
    # |B_R| in F_2 is 2*3^R - 1
    for R in range(5):
        ws = list(words_up_to(2, R))
        assert len(ws) == 2 * 3 ** R - 1
        assert len(set(ws)) == len(ws)
        assert ws == sorted(ws, key=shortlex_key)


@given(letters)
def test_reduce_matches_naive(xs):
    assert reduce_word(xs) == naive_reduce(xs)


@given(letters, letters, letters)
def test_group_laws(x, y, z):
    u, v, w = reduce_word(x), reduce_word(y), reduce_word(z)
    assert word_mul(word_mul(u, v), w) == word_mul(u, word_mul(v, w))
    assert word_mul(u, word_inv(u)) == ()
    assert word_len(word_mul(u, v)) <= word_len(u) + word_len(v)
