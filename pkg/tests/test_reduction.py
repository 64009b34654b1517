import random
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hypfir.audit import random_exact_relation, random_ge_product
from hypfir.reduction import (
    Diagonal,
    Elementary,
    HypothesisNotMet,
    PreconditionError,
    ReductionConstants,
    Swap,
    TransformationLog,
    find_dependence,
    ge_factor,
    ideal_basis,
    identity_matrix,
    is_identity,
    mat_mul,
    normalize_unimodular,
    reduce_step,
    search_dependence,
    submodule_basis,
    zero_coordinate,
)
from hypfir.ring import RingElement, diam, element_sum, parse_element
from hypfir.scalars import GF, QQ
from hypfir.spaces import TreeOracle
from hypfir.words import parse_word, words_up_to

F2, F5 = GF(2), GF(5)


def P(s, dom=QQ):
    return parse_element(s, dom, 2)


def V(*xs, dom=QQ):
    return tuple(P(x, dom) for x in xs)


def test_constants_ladder():
    c = ReductionConstants.for_colors(1, 4)
    assert c.ladder == (0, 11, 24, 39, 56)
    assert c.delta_n == 4 ** 2 + 10 * 4
    assert ReductionConstants.for_colors(0, 7).delta_n == 0


# ---------------------------------------------------------------------------
# dependence search


def test_dependence_examples():
    alpha = find_dependence([P("1+a"), P("1+a+b+ba")], 1)
    lam = alpha[1].coeff(())
    assert [a.scale(Fraction(-1) / lam) for a in alpha] == [P("1+b"), P("-1")]
    assert find_dependence([P("1+a"), P("1+a")], 0) == [P("1"), P("-1")] or \
        find_dependence([P("1+a"), P("1+a")], 0) == [P("-1"), P("1")]
    s = search_dependence([P("1+a"), P("1+b")], 4)
    assert s.alpha is None and s.searched == [0, 1, 2, 3, 4]


def dense_rank(xis, R):
    # numeric rank of the map (alpha_1..alpha_n) -> sum alpha_i xi_i on the R-ball
    ball = list(words_up_to(2, R))
    rows = {}
    cols = []
    for i, x in enumerate(xis):
        for g in ball:
            col = {}
            for w, c in (RingElement.monomial(QQ, g) * x).terms.items():
                col[w] = float(c)
                rows.setdefault(w, len(rows))
            cols.append(col)
    M = np.zeros((len(rows), len(cols)))
    for j, col in enumerate(cols):
        for w, c in col.items():
            M[rows[w], j] = c
    return np.linalg.matrix_rank(M), len(cols)


@pytest.mark.parametrize("R", [0, 1, 2, 3])
def test_no_relation_agrees_with_dense_rank(R):
    xis = [P("1+a"), P("1+b")]
    r, n = dense_rank(xis, R)
    assert r == n
    assert find_dependence(xis, R) is None


def test_relation_agrees_with_dense_rank():
    xis = [P("1+a"), P("1+a+b+ba")]
    r, n = dense_rank(xis, 1)
    assert r < n and find_dependence(xis, 1) is not None


# ---------------------------------------------------------------------------
# reduce_step


@pytest.mark.parametrize("dom", [QQ, F2])
def test_worked_reduction(tree, dom):
    xis = [P("1+a", dom), P("-1-a-b-ba", dom)]
    alphas = [P("1+b", dom), P("1", dom)]
    step = reduce_step(xis, alphas, tree)
    assert step.kind == "tree"
    assert step.result == P("-1-a", dom)
    assert (step.diam_before, step.diam_after) == (3, 1)
    assert step.replaced_color == 1


def test_same_color_step(tree):
    xis = [P("1+a"), P("2*b+2*ba")]
    step = reduce_step(xis, [P("2*b"), P("-1")], tree)
    assert step.kind == "same-color" and step.result.is_zero()


def test_unit_relation_step(tree):
    step = reduce_step([P("1+a"), P("a")], [P("1"), P("-1")], tree)
    assert step.result == P("1")
    assert (step.diam_before, step.diam_after) == (1, 0)


def test_reduce_rejects_non_relation(tree):
    with pytest.raises(PreconditionError):
        reduce_step([P("1+a"), P("1+b")], [P("1"), P("1")], tree)


def test_reduce_refuses_graph_without_hypothesis(cayley6):
    xis, alphas = [P("1+a"), P("-1-a-b-ba")], [P("1+b"), P("1")]
    with pytest.raises(HypothesisNotMet):
        reduce_step(xis, alphas, cayley6)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10_000), st.sampled_from([QQ, F2, F5]), st.integers(2, 4))
def test_reduce_postcondition_random(seed, dom, n):
    tree = TreeOracle(2)
    rng = random.Random(seed)
    xis, alphas = random_exact_relation(rng, dom, 2, n, 3, 2)
    step = reduce_step(xis, alphas, tree)
    combo = element_sum((b * x for b, x in zip(step.beta, xis)), dom)
    assert combo == step.result
    assert step.diam_after < step.diam_before
    assert diam(step.result, tree) == step.diam_after


# ---------------------------------------------------------------------------
# coordinate elimination


def test_zero_coordinate_worked(tree):
    log, xis, steps = zero_coordinate([P("1+a"), P("1+a+b+ba")], [P("1+b"), P("-1")], tree)
    assert xis == [P("1+a"), P("0")]
    assert len(steps) == 2
    assert log.replay([P("1+a"), P("1+a+b+ba")]) == xis


def test_zero_coordinate_same_color(tree):
    log, xis, steps = zero_coordinate([P("1+a"), P("3*b+3*ba")], [P("3*b"), P("-1")], tree)
    assert len(steps) == 1 and xis[1].is_zero()


def test_normalize_unimodular(tree):
    log, lam, g, xis, steps = normalize_unimodular([P("1+a"), P("a")], [P("1"), P("-1")], tree)
    assert xis[1:] == [P("0")]
    assert xis[0] == RingElement(QQ, {g: lam})
    assert log.replay([P("1+a"), P("a")]) == xis
    log, lam, g, xis, steps = normalize_unimodular([P("2*b"), P("0")], [P("1/2*B"), P("0")], tree)
    assert len(log) == 0 and (lam, g) == (2, parse_word("b"))


# ---------------------------------------------------------------------------
# bases


def test_ideal_basis_worked(tree):
    gens = [P("1+a"), P("1+a+b+ba")]
    res = ideal_basis(gens, tree)
    assert res.basis == [P("1+a")] and str(res.status) == "VERIFIED_FREE"
    assert res.log.replay(gens) == res.transformed
    assert res.log.replay_inverse(res.transformed) == gens


def test_ideal_basis_independent(tree):
    res = ideal_basis([P("1+a"), P("1+b")], tree, 4)
    assert res.basis == [P("1+a"), P("1+b")]
    assert str(res.status) == "INDEPENDENT_UP_TO(4)"


def test_ideal_basis_zero_generator(tree):
    res = ideal_basis([P("0"), P("1+b")], tree)
    assert res.basis == [P("1+b")]


def test_submodule_examples(tree):
    res = submodule_basis([V("1+a", "0"), V("0", "1+b")], tree, 3)
    assert res.basis == [V("1+a", "0"), V("0", "1+b")]
    assert str(res.status) == "INDEPENDENT_UP_TO(3)"
    v = V("1+a", "b")
    res = submodule_basis([v, tuple(P("ab") * c for c in v)], tree)
    assert res.basis == [v]
    res = submodule_basis([V("0", "0")], tree)
    assert res.basis == []


# ---------------------------------------------------------------------------
# GE factorization


def column_matrix(op, n, dom):
    """Matrix of an operation acting on a column vector, built from scratch."""
    M = [list(r) for r in identity_matrix(n, dom)]
    if isinstance(op, Elementary):
        M[op.j][op.i] = op.beta
    elif isinstance(op, Diagonal):
        M[op.i][op.i] = RingElement(dom, {op.g: op.lam})
    else:
        M[op.i][op.i] = M[op.j][op.j] = RingElement.zero(dom)
        M[op.i][op.j] = M[op.j][op.i] = RingElement.one(dom)
    return M


def explicit_product(log):
    M = identity_matrix(log.size, log.domain)
    for op in log:
        M = mat_mul(M, column_matrix(op, log.size, log.domain))
    return [tuple(r) for r in M]


def test_ge_examples(tree):
    one, zero = P("1"), P("0")
    X = [(one, zero), (P("1+a"), one)]
    A = [(one, zero), (P("-1-a"), one)]
    log = ge_factor(X, A, tree)
    assert explicit_product(log) == X
    X = [(P("a"), zero), (zero, one)]
    A = [(P("A"), zero), (zero, one)]
    log = ge_factor(X, A, tree)
    assert len(log) == 1 and isinstance(log.ops[0], Diagonal)


def test_ge_rejects_non_inverse(tree):
    one, zero = P("1"), P("0")
    with pytest.raises(PreconditionError):
        ge_factor([(one, zero), (zero, one)], [(one, one), (zero, one)], tree)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000), st.sampled_from([F2, F5, QQ]), st.integers(1, 3), st.integers(1, 8))
def test_ge_round_trip(seed, dom, n, k):
    tree = TreeOracle(2)
    rng = random.Random(seed)
    X, A, _ = random_ge_product(rng, dom, 2, n, k)
    assert is_identity(mat_mul(A, X))
    log = ge_factor(X, A, tree)
    assert all(not isinstance(op, Swap) for op in log)
    assert explicit_product(log) == [tuple(r) for r in X]


# ---------------------------------------------------------------------------
# logs


def test_log_text_round_trip():
    log = TransformationLog(3, F5, [Elementary(0, 2, P("2+3*ab", F5)), Diagonal(1, 4, parse_word("B")), Swap(0, 1)])
    text = log.to_text()
    assert text.splitlines()[0] == "# size 3 domain fp:5"
    back = TransformationLog.from_text(text, rank=2)
    assert back.to_text() == text and back.ops == log.ops


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000))
def test_replay_inverse_undoes_replay(seed):
    rng = random.Random(seed)
    _, _, log = random_ge_product(rng, F5, 2, 3, 6)
    items = [P("1+a", F5), P("b", F5), P("2*ab+B", F5)]
    assert log.replay_inverse(log.replay(items)) == items
    U = log.transform_matrix()
    out = log.replay(items)
    for r in range(3):
        assert out[r] == element_sum((U[r][c] * items[c] for c in range(3)), F5)
