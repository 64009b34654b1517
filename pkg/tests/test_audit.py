import random

import pytest

from hypfir.audit import (
    Context,
    audit_lemmas,
    random_element,
    random_exact_relation,
    random_word,
    zero_divisor_trials,
)
from hypfir.ring import element_sum
from hypfir.scalars import GF, QQ
from hypfir.words import reduce_word


def test_random_words_are_reduced():
    rng = random.Random(1)
    for n in range(8):
        w = random_word(rng, 2, n)
        assert len(w) == n and reduce_word(w) == w


def test_random_relations_are_exact():
    rng = random.Random(2)
    for _ in range(20):
        xis, alphas = random_exact_relation(rng, GF(3), 2, 3, 2, 2)
        assert element_sum((a * x for a, x in zip(alphas, xis)), GF(3)).is_zero()
        assert all(not x.is_zero() for x in xis)


def test_tree_audit_small(tree):
    rep = audit_lemmas(tree, 40, seed=42)
    assert rep.failures == 0
    assert {t.name for t in rep.tallies} >= {"metric", "reduce-postcondition", "path-bound"}
    assert all(sum(t.counts.values()) == 40 for t in rep.tallies)


def test_audit_is_deterministic(tree):
    a = audit_lemmas(tree, 15, seed=7).as_dict()
    b = audit_lemmas(tree, 15, seed=7).as_dict()
    assert a == b


def test_audit_only_filter(tree):
    rep = audit_lemmas(tree, 5, only=["metric"])
    assert [t.name for t in rep.tallies] == ["metric"]


def test_audit_rejects_zero_trials(tree):
    with pytest.raises(ValueError):
        audit_lemmas(tree, 0)


def test_graph_context(cayley6):
    ctx = Context(cayley6)
    assert not ctx.tree and ctx.thin == 4 * cayley6.delta
    assert all(cayley6.norm(p) <= 2 for p in ctx.points)


def test_graph_audit_small(cayley6):
    rep = audit_lemmas(cayley6, 10, seed=3)
    assert rep.failures == 0


def test_zero_divisors_small():
    n, bad = zero_divisor_trials(200, seed=5)
    assert n == 200 and bad == []
    rng = random.Random(0)
    x = random_element(rng, QQ, 2, 8, 3)
    assert not x.is_zero()
