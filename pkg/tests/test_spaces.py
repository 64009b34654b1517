from fractions import Fraction
import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hypfir.spaces import (
    CayleyBallOracle,
    GraphOracle,
    Mid,
    OutOfDomainError,
    TreeOracle,
    check_hypothesis,
    eps_center,
    four_point_delta,
    gromov_product,
    min_displacement,
    parse_oracle,
)
from hypfir.words import parse_word, words_up_to

W = lambda s: parse_word(s, 2)


def test_gromov_products(tree):
    a, ab = W("a"), W("ab")
    assert gromov_product(tree, a, a, ()) == 1
    assert gromov_product(tree, (), W("bab"), ()) == 0
    assert gromov_product(tree, a, ab, ()) == 1


def test_tree_distance_matches_bfs(tree):
    # a plain Cayley ball without extra generators is the tree, computed by search
    ball = CayleyBallOracle(2, [], 6)
    pts = list(words_up_to(2, 3))
    for u in pts:
        for v in pts:
            assert tree.dist(u, v) == ball.dist(u, v)


def test_four_point_examples(tree):
    assert four_point_delta(tree, tree.scan_points(2)) == 0
    cycle = GraphOracle(range(6), [(i, (i + 1) % 6) for i in range(6)])
    assert four_point_delta(cycle, range(6)) == 1
    assert four_point_delta(cycle, [3, 3, 3]) == 0


def naive_four_point(D):
    n = len(D)
    best = 0.0
    for w, x, y, z in itertools.product(range(n), repeat=4):
        gp = lambda p, q: (D[p, w] + D[q, w] - D[p, q]) / 2
        best = max(best, min(gp(x, z), gp(y, z)) - gp(x, y))
    return best


@pytest.mark.parametrize("edges", [
    [(i, (i + 1) % 6) for i in range(6)],
    [(0, 1), (1, 2), (2, 3), (3, 4), (4, 0), (2, 5)],
    [(0, 1), (1, 2), (2, 3), (3, 0), (0, 2)],
])
def test_four_point_against_brute_force(edges):
    n = 1 + max(max(e) for e in edges)
    g = GraphOracle(range(n), edges)
    pts = g.scan_points()
    D = np.array([[float(g.dist(p, q)) for q in pts] for p in pts])
    assert g.delta == Fraction(naive_four_point(D))


def test_min_displacement(tree):
    assert min_displacement(tree, 3) == 1
    assert min_displacement(tree, 1) == 1
    single = GraphOracle(["p"], [])
    with pytest.raises(ValueError):
        min_displacement(single, 1)


def test_eps_center(tree):
    c = eps_center(tree, [W("a"), W("b")])
    assert c.center == () and c.radius_bound == 1
    c = eps_center(tree, [W("ab")])
    assert c.center == W("ab") and c.radius_bound == 0
    c = eps_center(tree, [(), W("a"), W("ab")])
    assert c.center == W("a") and c.radius_bound == 1


def test_cayley_balls():
    plain = parse_oracle("cayley:2:-:3")
    assert plain.delta == 0
    short = parse_oracle("cayley:2:ab:4")
    assert short.dist((), W("ab")) == 1
    line = CayleyBallOracle(1, [], 5)
    assert line.delta == 0 and len(line.vertices) == 11


def test_certified_region():
    o = parse_oracle("cayley:2:ab:4")
    o.require_certified([(), W("aa")])
    with pytest.raises(OutOfDomainError):
        o.require_certified([W("aaa")])


def test_midpoint_distances(tree):
    m = Mid((), W("a"))
    assert tree.dist(m, ()) == Fraction(1, 2)
    assert tree.dist(m, W("b")) == Fraction(3, 2)
    assert tree.dist(m, Mid(W("b"), W("ba"))) == 2


def test_hypothesis_reports(tree):
    for n in (1, 5, 100):
        assert check_hypothesis(tree, n).satisfied

    class Fake(TreeOracle):
        pass

    fake = Fake(2)
    fake.delta = Fraction(1)
    rep = check_hypothesis(fake, 1, displacement=Fraction(1))
    assert rep.threshold == 169 and not rep.satisfied


def test_cayley_hypothesis_not_met(cayley6):
    rep = check_hypothesis(cayley6, 2)
    assert cayley6.delta == Fraction(1, 2)
    assert not rep.satisfied and rep.threshold == Fraction(225, 2)


pts = st.sampled_from(list(words_up_to(2, 3)))


@settings(max_examples=60)
@given(pts, pts, pts, pts)
def test_tree_is_zero_hyperbolic(w, x, y, z):
    tree = TreeOracle(2)
    gp = lambda p, q: gromov_product(tree, p, q, w)
    assert gp(x, y) >= min(gp(x, z), gp(y, z))


@settings(max_examples=60)
@given(pts, pts, pts)
def test_action_is_isometric(g, x, y):
    tree = TreeOracle(2)
    assert tree.dist(tree.act(g, x), tree.act(g, y)) == tree.dist(x, y)
