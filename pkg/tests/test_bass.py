import pytest

from hypfir.bass import (
    IntegerSpan,
    StarFailure,
    ZModuleSpec,
    bass_descent,
    check_star,
    lift,
    mod_p_reduce,
)
from hypfir.ring import parse_element
from hypfir.scalars import GF, QQ, ZZ, DomainError


def Z(s):
    return parse_element(s, ZZ, 2)


def vec(*xs):
    return tuple(Z(x) for x in xs)


def test_mod_p_examples():
    F2 = GF(2)
    assert mod_p_reduce(Z("2+2*a"), 2).is_zero()
    assert mod_p_reduce(Z("3+a"), 2) == parse_element("1+a", F2, 2)
    x, y = Z("1+b"), Z("a")
    assert mod_p_reduce(Z("5") * x + y, 5) == mod_p_reduce(y, 5)
    with pytest.raises(DomainError):
        mod_p_reduce(Z("1"), 4)
    assert lift(parse_element("4*a", GF(5), 2)) == Z("4*a")


def test_star_negative_control():
    M = ZModuleSpec(1, [vec("2"), vec("a-1")])
    rep = check_star(M, [2], 4)
    assert not rep.passed and rep.p == 2 and rep.witness == vec("2")


@pytest.mark.parametrize("gens", [[vec("1+a+b")], [vec("1", "0"), vec("0", "1")]])
def test_star_positive(gens):
    rep = check_star(ZModuleSpec(len(gens[0]), gens), [2, 3], 3)
    assert rep.passed


def test_integer_span():
    span = IntegerSpan([vec("2"), vec("a-1")], 1)
    assert span.solve(vec("1"), 4) is None
    c = span.solve(vec("2*a"), 2)
    assert c is not None
    assert c[0] * Z("2") + c[1] * Z("a-1") == Z("2*a")


def test_descent_negative_control(tree):
    with pytest.raises(StarFailure) as err:
        bass_descent(ZModuleSpec(1, [vec("2"), vec("a-1")]), tree)
    assert err.value.p == 2 and err.value.witness == vec("2")


def test_descent_standard_basis(tree):
    res = bass_descent(ZModuleSpec(2, [vec("1", "0"), vec("0", "1")]), tree, 3)
    assert res.status == "VERIFIED" and res.k == 1
    assert res.basis == [vec("1", "0"), vec("0", "1")]
    assert res.steps == []


def test_descent_single_generator(tree):
    res = bass_descent(ZModuleSpec(1, [vec("2+2*a")]), tree)
    assert res.status == "VERIFIED" and res.basis == [vec("2+2*a")]
    assert res.independence == "VERIFIED_FREE"


def test_descent_divides_common_factor(tree):
    res = bass_descent(ZModuleSpec(1, [vec("2+2*a"), vec("3+3*a")]), tree)
    assert res.basis in ([vec("1+a")], [vec("-1-a")])
    assert [s.p for s in res.steps] == [2]


def test_descent_coordinates_are_exact(tree):
    gens = [vec("2", "a"), vec("2*b", "ba")]
    res = bass_descent(ZModuleSpec(2, gens), tree)
    for b, w in zip(res.basis, res.coords_in_generators):
        assert tuple(sum((c * g[k] for c, g in zip(w, gens)), Z("0")) for k in range(2)) == b
    for g, a in zip(gens, res.generators_in_basis):
        assert tuple(sum((c * b[k] for c, b in zip(a, res.basis)), Z("0")) for k in range(2)) == g


def test_genuine_failure_elsewhere(tree):
    with pytest.raises(StarFailure) as err:
        bass_descent(ZModuleSpec(1, [vec("6"), vec("4+4*a")]), tree)
    assert err.value.p == 3


def test_rejects_non_integer_generators():
    with pytest.raises(DomainError):
        ZModuleSpec(1, [(parse_element("1/2", QQ, 2),)])
