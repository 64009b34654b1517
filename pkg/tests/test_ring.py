from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from hypfir.ring import (
    NEG_INF,
    ElementParseError,
    RingElement,
    abs_value,
    color_key,
    diam,
    format_element,
    is_unit,
    parse_element,
    same_color,
)
from hypfir.scalars import GF, QQ, ZZ, DomainError, parse_domain
from hypfir.words import parse_word, word_mul

F2 = GF(2)


def P(text, dom=QQ):
    return parse_element(text, dom, 2)


def test_parse_examples():
    x = P("1+a+b+ba")
    assert len(x) == 4
    y = P("2/3*ab - A")
    assert y.coeff(parse_word("ab")) == Fraction(2, 3)
    assert y.coeff(parse_word("A")) == -1
    with pytest.raises(ElementParseError) as err:
        P("1+")
    assert err.value.offset == 2


def test_field_rejects_bad_denominator():
    with pytest.raises((ElementParseError, DomainError)):
        parse_element("1/2*a", F2, 2)


def test_addition_examples():
    assert (P("1+a") + P("-1-a")).is_zero()
    assert P("1+a") + P("b") == P("1+a+b")
    assert (P("1+a", F2) + P("1+a", F2)).is_zero()


def test_multiplication_examples():
    assert P("1+a") * P("1+b") == P("1+a+b+ab")
    assert P("1+b") * P("1+a") == P("1+b+a+ba")
    assert (P("1+a+b") * RingElement.zero(QQ)).is_zero()


def test_measures_on_tree(tree):
    assert abs_value(P("1+a"), tree) == 1 and diam(P("1+a"), tree) == 1
    assert abs_value(P("b+ba"), tree) == 2 and diam(P("b+ba"), tree) == 1
    assert abs_value(RingElement.zero(QQ), tree) == NEG_INF
    assert diam(RingElement.zero(QQ), tree) == NEG_INF


def test_units():
    assert is_unit(P("3*ab")) == (3, parse_word("ab"))
    assert is_unit(P("1+a")) is None
    assert is_unit(RingElement.zero(QQ)) is None


def test_color_keys():
    k = color_key(P("b+ba"))
    assert k.rep == P("1+a") and k.translator == parse_word("b") and k.scale == 1
    k = color_key(P("5+5*a"))
    assert k.rep == P("1+a") and k.scale == 5
    assert color_key(P("a")).rep == P("1")
    assert same_color(P("b+ba"), P("2+2*a"))
    assert not same_color(P("1+a"), P("1+b"))


def test_domains():
    assert parse_domain("fp:5") == GF(5)
    assert parse_domain("q") is QQ and parse_domain("z") is ZZ
    with pytest.raises(DomainError):
        parse_domain("fp:6")


def naive_product(x, y):
    # convolution over explicit term lists, independent of the ring code
    out = {}
    for g, a in x.terms.items():
        for h, b in y.terms.items():
            w = word_mul(g, h)
            out[w] = out.get(w, 0) + a * b
    return {w: c for w, c in out.items() if c != 0}


words = st.sampled_from(["1", "a", "b", "A", "B", "ab", "ba", "aB", "bb", "Ab"])
terms = st.lists(st.tuples(st.integers(-3, 3), words), min_size=0, max_size=5)


def build(ts, dom=QQ):
    if not ts:
        return RingElement.zero(dom)
    text = " + ".join(f"{c}*{w}" for c, w in ts).replace("+ -", "- ")
    return parse_element(text, dom, 2)


@settings(max_examples=80)
@given(terms, terms, terms)
def test_ring_axioms(a, b, c):
    x, y, z = build(a), build(b), build(c)
    assert (x * y) * z == x * (y * z)
    assert x * (y + z) == x * y + x * z
    assert (x * y).terms == naive_product(x, y)


@settings(max_examples=80)
@given(terms)
def test_format_round_trip(a):
    x = build(a)
    assert parse_element(format_element(x), QQ, 2) == x
