"""Free bases of submodules of Z[F]^m by descent from rational and mod-p bases.

A rational basis Y of the rationalized module is scaled into M, giving
kM <= Y <= M.  Each prime p dividing k is removed by splitting Y mod p into
the kernel of Y_p -> M_p and a complement, lifting the elementary operations
to Z[F] and dividing the kernel block by p.  Both containments are kept as
explicit coordinate matrices and re-checked by exact multiplication.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .linalg import FieldEliminator, IntegerEliminator
from .reduction import (
    Elementary,
    ReductionError,
    Swap,
    TransformationLog,
    _entry_order,
    item_is_zero,
    mat_mul,
    submodule_basis,
)
from .ring import RingElement, format_element, format_vector
from .scalars import QQ, ZZ, GF, DomainError, is_prime
from .spaces import SpaceOracle
from .words import words_up_to


class StarFailure(ReductionError):
    def __init__(self, p: int, witness: tuple, radius: int):
        self.p = p
        self.witness = witness
        self.radius = radius
        super().__init__(
            f"condition (star) fails at p={p}: {format_vector(witness)} lies in M with all "
            f"coefficients divisible by {p}, but no witness for it in {p}M up to radius {radius}"
        )


class ContainmentError(ReductionError):
    pass


@dataclass
class ZModuleSpec:
    rank: int
    generators: list

    def __post_init__(self):
        gens = []
        for v in self.generators:
            v = (v,) if isinstance(v, RingElement) else tuple(v)
            if len(v) != self.rank:
                raise ValueError(f"generator of length {len(v)} in a module of rank {self.rank}")
            if any(c.domain != ZZ for c in v):
                raise DomainError("generators must have integer coefficients")
            if not item_is_zero(v):
                gens.append(v)
        self.generators = gens


def mod_p_reduce(x, p: int):
    if not is_prime(p):
        raise DomainError(f"{p} is not prime")
    F = GF(p)
    if isinstance(x, RingElement):
        return x.to_domain(F)
    return tuple(c.to_domain(F) for c in x)


def lift(x, domain=ZZ):
    """Coefficientwise lift from F_p (representatives 0..p-1) or Q (integers only)."""
    if isinstance(x, RingElement):
        return RingElement(domain, {w: domain.convert(c) for w, c in x.terms.items()})
    return tuple(lift(c, domain) for c in x)


def _vec_add(x, y):
    return tuple(a + b for a, b in zip(x, y))


def _vec_lmul(c: RingElement, x):
    return tuple(c * a for a in x)


def _combine(coeffs: Sequence[RingElement], vectors: Sequence[tuple], m: int):
    out = tuple(RingElement.zero(ZZ) for _ in range(m))
    for c, v in zip(coeffs, vectors):
        if not c.is_zero():
            out = _vec_add(out, _vec_lmul(c, v))
    return out


def _rank_of(vectors) -> int:
    r = 1
    for v in vectors:
        for c in v:
            for w in c.terms:
                for x in w:
                    r = max(r, abs(x))
    return r


def _column(v: tuple, g) -> dict:
    out = {}
    for k, c in enumerate(v):
        for w, x in c.translate(g).terms.items():
            out[(k, w)] = x
    return out


class IntegerSpan:
    """Bounded membership in the Z[F]-span of fixed integral vectors."""

    def __init__(self, vectors: Sequence[tuple], rank: int):
        self.vectors = list(vectors)
        self.rank = rank
        self.elim = IntegerEliminator(_entry_order)
        self.radius = -1
        self._words = []

    def grow(self, R: int) -> None:
        for g in words_up_to(self.rank, R):
            if len(g) <= self.radius:
                continue
            for j, v in enumerate(self.vectors):
                self.elim.insert(_column(v, g), (g, j))
        self.radius = max(self.radius, R)

    def solve(self, target: tuple, R: int):
        """Coefficients c_j (supports in the R-ball) with sum c_j v_j = target, or None."""
        vec = {}
        for k, c in enumerate(target):
            for w, x in c.terms.items():
                vec[(k, w)] = x
        for r in range(0, R + 1):
            if r > self.radius:
                self.grow(r)
            sol = self.elim.solve(vec)
            if sol is not None:
                coeffs = [dict() for _ in self.vectors]
                for (g, j), c in sol.items():
                    coeffs[j][g] = coeffs[j].get(g, 0) + c
                return [RingElement(ZZ, c) for c in coeffs]
        return None


@dataclass
class StarReport:
    passed: bool
    primes: list
    radius: int
    p: int | None = None
    witness: tuple | None = None
    checked: int = 0

    def __str__(self):
        if self.passed:
            return f"PASS_UP_TO({','.join(map(str, self.primes))}; {self.radius})"
        return f"FAIL(p={self.p}, m={format_vector(self.witness)})"

    def as_dict(self) -> dict:
        return {
            "status": "PASS_UP_TO" if self.passed else "FAIL",
            "primes": self.primes,
            "radius": self.radius,
            "p": self.p,
            "witness": None if self.witness is None else format_vector(self.witness),
            "kernel_vectors_checked": self.checked,
        }


def check_star(M: ZModuleSpec, primes: Sequence[int], R: int, span: IntegerSpan | None = None) -> StarReport:
    """Look for m in M with m = 0 mod p but m not in pM (supports bounded by R).

    Every mod-p relation among the generators lifts to such a candidate; a
    basis of the bounded mod-p kernel suffices because pM is a submodule.
    """
    gens = M.generators
    rank = _rank_of(gens)
    span = span or IntegerSpan(gens, rank)
    checked = 0
    for p in primes:
        F = GF(p)
        reduced = [mod_p_reduce(v, p) for v in gens]
        elim = FieldEliminator(F, _entry_order)
        for g in words_up_to(rank, R):
            for j, v in enumerate(reduced):
                dep = elim.insert(_column(v, g), (g, j))
                if dep is None:
                    continue
                coeffs = [dict() for _ in gens]
                for (h, k), c in dep.items():
                    coeffs[k][h] = c
                lifted = [RingElement(ZZ, c) for c in coeffs]
                m = _combine(lifted, gens, M.rank)
                if any(x % p for c in m for x in c.terms.values()):
                    raise ReductionError("lifted mod-p relation is not divisible by p")
                checked += 1
                half = tuple(RingElement(ZZ, {w: x // p for w, x in c.terms.items()}) for c in m)
                if span.solve(half, R + 1) is None:
                    return StarReport(False, list(primes), R, p, m, checked)
    return StarReport(True, list(primes), R, checked=checked)


# ---------------------------------------------------------------------------
# descent


@dataclass
class DescentStep:
    p: int
    k_before: int
    kernel_block: list
    log: str


@dataclass
class DescentResult:
    basis: list
    k: int
    independence: str
    coords_in_generators: list  # basis_i = sum W[i][j] x_j
    generators_in_basis: list  # x_j = sum A[j][i] basis_i
    steps: list = field(default_factory=list)
    star: list = field(default_factory=list)

    @property
    def status(self) -> str:
        return "VERIFIED" if self.k == 1 else "INCOMPLETE"

    def as_dict(self) -> dict:
        return {
            "status": self.status,
            "basis": [format_vector(b) for b in self.basis],
            "independence": self.independence,
            "basis_in_generators": [[format_element(c) for c in row] for row in self.coords_in_generators],
            "generators_in_basis": [[format_element(c) for c in row] for row in self.generators_in_basis],
            "descent": [{"p": s.p, "k_before": s.k_before, "kernel_block": [i + 1 for i in s.kernel_block]}
                        for s in self.steps],
            "star": [r.as_dict() for r in self.star],
        }


def _smallest_prime(k: int) -> int:
    f = 2
    while f * f <= k:
        if k % f == 0:
            return f
        f += 1
    return k


def _denominators(x: RingElement) -> int:
    return math.lcm(1, *(Fraction(c).denominator for c in x.terms.values()))


def _divide(x: RingElement, p: int) -> RingElement | None:
    if any(c % p for c in x.terms.values()):
        return None
    return RingElement(ZZ, {w: c // p for w, c in x.terms.items()})


def _check(k: int, gens, basis, W, A, m) -> None:
    for i, b in enumerate(basis):
        if _combine(W[i], gens, m) != b:
            raise ContainmentError(f"basis vector {i + 1} does not match its generator coordinates")
    kk = RingElement(ZZ, {(): k})
    for j, x in enumerate(gens):
        if _combine(A[j], basis, m) != _vec_lmul(kk, x):
            raise ContainmentError(f"{k}*x_{j + 1} does not match its basis coordinates")


def bass_descent(M: ZModuleSpec, oracle: SpaceOracle, R_max: int = 6, unsafe: bool = False) -> DescentResult:
    gens = M.generators
    m = M.rank
    if not gens:
        return DescentResult([], 1, "VERIFIED_FREE", [], [])
    rank = _rank_of(gens)
    span = IntegerSpan(gens, rank)

    # rational basis scaled into M
    qgens = [tuple(c.to_domain(QQ) for c in v) for v in gens]
    res = submodule_basis(qgens, oracle, R_max, unsafe=unsafe)
    U = res.log.transform_matrix()
    Uinv = res.log.inverse_transform_matrix()
    W, scales = [], []
    for i in res.positions:
        D = math.lcm(1, *(_denominators(c) for c in U[i]))
        scales.append(D)
        W.append([lift(c.scale(D)) for c in U[i]])
    basis = [_combine(w, gens, m) for w in W]
    a_rat = [[Uinv[j][i].scale(Fraction(1, D)) for i, D in zip(res.positions, scales)] for j in range(len(gens))]
    k = math.lcm(1, *(_denominators(c) for row in a_rat for c in row))
    A = [[lift(c.scale(k)) for c in row] for row in a_rat]
    _check(k, gens, basis, W, A, m)
    out = DescentResult(basis, k, str(res.status), W, A)

    while k > 1:
        p = _smallest_prime(k)
        star = check_star(M, [p], R_max, span)
        out.star.append(star)
        if not star.passed:
            raise StarFailure(p, star.witness, R_max)
        F = GF(p)
        reduced = [mod_p_reduce(b, p) for b in basis]
        sub = submodule_basis(reduced, oracle, R_max, unsafe=unsafe)
        L = TransformationLog(len(basis), ZZ)
        for op in sub.log:
            if isinstance(op, Elementary):
                L.append(Elementary(op.i, op.j, lift(op.beta)))
            elif isinstance(op, Swap):
                L.append(op)
            else:
                raise ReductionError("mod-p basis used a diagonal operation; it cannot be lifted")
        kernel = [i for i in range(len(basis)) if i not in sub.positions]
        moved = L.replay(basis)
        Lm = L.transform_matrix()
        Linv = L.inverse_transform_matrix()
        W2 = mat_mul(Lm, W) if W else []
        A2 = mat_mul(A, Linv) if A else []
        new_basis, new_W = [], []
        for i, y in enumerate(moved):
            if i in kernel:
                z = tuple(_divide(c, p) for c in y)
                if any(c is None for c in z):
                    raise ContainmentError(f"kernel vector {i + 1} is not divisible by {p}")
                coords = [_divide(c, p) for c in W2[i]]
                if any(c is None for c in coords):
                    coords = span.solve(z, R_max + 1)
                    if coords is None:
                        raise ContainmentError(f"could not express {format_vector(z)} in the generators")
                new_basis.append(z)
                new_W.append(list(coords))
            else:
                new_basis.append(y)
                new_W.append(list(W2[i]))
        new_A = []
        for row in A2:
            new_row = []
            for i, c in enumerate(row):
                if i in kernel:
                    new_row.append(c)
                else:
                    q = _divide(c, p)
                    if q is None:
                        raise ContainmentError(
                            f"complement coordinate not divisible by {p}; the mod-{p} basis is not independent"
                        )
                    new_row.append(q)
            new_A.append(new_row)
        out.steps.append(DescentStep(p, k, kernel, L.to_text()))
        k //= p
        basis, W, A = new_basis, new_W, new_A
        _check(k, gens, basis, W, A, m)
    out.basis, out.k, out.coords_in_generators, out.generators_in_basis = basis, k, W, A
    return out
