"""The geometric Euclidean algorithm and its consumers.

Conventions: a list of ring elements (or of vectors of ring elements) is
acted on by elementary operations from the left.  ``E i j b`` replaces item j
by ``item_j + b*item_i``, ``D i l g`` replaces item i by ``l*g*item_i`` and
``P i j`` swaps two items.  Relations are written ``sum alpha_i * xi_i``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence, Union

from .extremal import Family, build_gamma, expand_relation, is_mu_relation
from .linalg import FieldEliminator
from .ring import (
    NEG_INF,
    RingElement,
    abs_value,
    diam,
    element_sum,
    format_element,
    is_unit,
    parse_element,
    same_color,
)
from .scalars import Domain
from .spaces import SpaceOracle, TreeOracle, check_hypothesis, gromov_product
from .words import IDENTITY, Word, format_word, parse_word, shortlex_key, word_inv, words_up_to

Item = Union[RingElement, tuple]


class ReductionError(Exception):
    pass


class PreconditionError(ReductionError, ValueError):
    pass


class HypothesisNotMet(ReductionError):
    """The displacement hypothesis fails, or a step could not be certified."""

    def __init__(self, message: str, diagnostics: Sequence[str] = ()):
        self.diagnostics = list(diagnostics)
        super().__init__(message)


@dataclass(frozen=True)
class ReductionConstants:
    delta: Fraction
    n: int
    ladder: tuple

    @classmethod
    def for_colors(cls, delta, n: int) -> "ReductionConstants":
        delta = Fraction(delta)
        ladder = [Fraction(0)]
        for k in range(1, n + 1):
            ladder.append(ladder[-1] + (2 * k + 9) * delta)
        return cls(delta, n, tuple(ladder))

    def delta_k(self, k: int) -> Fraction:
        return self.ladder[k]

    @property
    def delta_n(self) -> Fraction:
        return self.ladder[self.n]


# ---------------------------------------------------------------------------
# items and operations


def _lmul(b: RingElement, x: Item) -> Item:
    if isinstance(x, RingElement):
        return b * x
    return tuple(b * c for c in x)


def _add(x: Item, y: Item) -> Item:
    if isinstance(x, RingElement):
        return x + y
    return tuple(a + c for a, c in zip(x, y))


def item_is_zero(x: Item) -> bool:
    if isinstance(x, RingElement):
        return x.is_zero()
    return all(c.is_zero() for c in x)


@dataclass(frozen=True)
class Elementary:
    i: int
    j: int
    beta: RingElement

    def inverse(self):
        return Elementary(self.i, self.j, -self.beta)


@dataclass(frozen=True)
class Diagonal:
    i: int
    lam: object
    g: Word


@dataclass(frozen=True)
class Swap:
    i: int
    j: int

    def inverse(self):
        return self


Op = Union[Elementary, Diagonal, Swap]


def apply_op(items: list, op: Op, domain: Domain) -> None:
    """Apply one operation in place."""
    if isinstance(op, Elementary):
        if op.i == op.j:
            raise ValueError("elementary operation needs i != j")
        items[op.j] = _add(items[op.j], _lmul(op.beta, items[op.i]))
    elif isinstance(op, Diagonal):
        u = RingElement(domain, {op.g: op.lam})
        items[op.i] = _lmul(u, items[op.i])
    else:
        items[op.i], items[op.j] = items[op.j], items[op.i]


def invert_op(op: Op, domain: Domain) -> Op:
    if isinstance(op, Diagonal):
        return Diagonal(op.i, domain.inv(op.lam), word_inv(op.g))
    return op.inverse()


def update_alpha(alpha: list, op: Op, domain: Domain) -> None:
    """Keep sum alpha_i*item_i fixed when ``op`` is applied to the items."""
    if isinstance(op, Elementary):
        alpha[op.i] = alpha[op.i] - alpha[op.j] * op.beta
    elif isinstance(op, Diagonal):
        u_inv = RingElement(domain, {word_inv(op.g): domain.inv(op.lam)})
        alpha[op.i] = alpha[op.i] * u_inv
    else:
        alpha[op.i], alpha[op.j] = alpha[op.j], alpha[op.i]


@dataclass
class TransformationLog:
    size: int
    domain: Domain
    ops: list = field(default_factory=list)

    def __len__(self):
        return len(self.ops)

    def __iter__(self):
        return iter(self.ops)

    def append(self, op: Op) -> None:
        for k in (op.i, getattr(op, "j", op.i)):
            if not 0 <= k < self.size:
                raise IndexError(f"operation index {k + 1} outside 1..{self.size}")
        self.ops.append(op)

    def extend(self, ops) -> None:
        for op in ops:
            self.append(op)

    def remapped(self, index_map: Sequence[int], size: int) -> "TransformationLog":
        out = TransformationLog(size, self.domain)
        for op in self.ops:
            if isinstance(op, Elementary):
                out.append(Elementary(index_map[op.i], index_map[op.j], op.beta))
            elif isinstance(op, Diagonal):
                out.append(Diagonal(index_map[op.i], op.lam, op.g))
            else:
                out.append(Swap(index_map[op.i], index_map[op.j]))
        return out

    def replay(self, items: Sequence[Item]) -> list:
        if len(items) != self.size:
            raise ValueError(f"log acts on {self.size} items, got {len(items)}")
        out = list(items)
        for op in self.ops:
            apply_op(out, op, self.domain)
        return out

    def replay_inverse(self, items: Sequence[Item]) -> list:
        if len(items) != self.size:
            raise ValueError(f"log acts on {self.size} items, got {len(items)}")
        out = list(items)
        for op in reversed(self.ops):
            apply_op(out, invert_op(op, self.domain), self.domain)
        return out

    def transform_matrix(self) -> list[list[RingElement]]:
        """U with replay(x) = U x (the ops composed in application order)."""
        rows = identity_matrix(self.size, self.domain)
        for op in self.ops:
            apply_op(rows, op, self.domain)
        return rows

    def inverse_transform_matrix(self) -> list[list[RingElement]]:
        rows = identity_matrix(self.size, self.domain)
        for op in reversed(self.ops):
            apply_op(rows, invert_op(op, self.domain), self.domain)
        return rows

    def product(self) -> list[list[RingElement]]:
        """M(op_1) M(op_2) ... M(op_k), each M(op) being the matrix of op acting on a column."""
        rows = identity_matrix(self.size, self.domain)
        for op in reversed(self.ops):
            apply_op(rows, op, self.domain)
        return rows

    # text form, 1-based
    def to_text(self) -> str:
        dom = self.domain
        lines = [f"# size {self.size} domain {dom.name}"]
        for op in self.ops:
            if isinstance(op, Elementary):
                lines.append(f"E {op.i + 1} {op.j + 1} {format_element(op.beta)}")
            elif isinstance(op, Diagonal):
                lines.append(f"D {op.i + 1} {dom.fmt(op.lam)} {format_word(op.g)}")
            else:
                lines.append(f"P {op.i + 1} {op.j + 1}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str, domain: Domain | None = None, size: int | None = None,
                  rank: int | None = None) -> "TransformationLog":
        from .scalars import parse_domain

        rows = []
        for raw in text.splitlines():
            ln = raw.strip()
            if not ln:
                continue
            if ln.startswith("#"):
                parts = ln[1:].split()
                if "size" in parts and size is None:
                    size = int(parts[parts.index("size") + 1])
                if "domain" in parts and domain is None:
                    domain = parse_domain(parts[parts.index("domain") + 1])
                continue
            rows.append(ln)
        if domain is None:
            raise ValueError("log has no domain header and none was given")
        ops = []
        for ln in rows:
            kind, rest = ln[0], ln[1:].split(None, 2)
            if kind == "E":
                ops.append(Elementary(int(rest[0]) - 1, int(rest[1]) - 1, parse_element(rest[2], domain, rank)))
            elif kind == "D":
                lam = domain.convert(Fraction(rest[1]))
                ops.append(Diagonal(int(rest[0]) - 1, lam, parse_word(rest[2], rank)))
            elif kind == "P":
                ops.append(Swap(int(rest[0]) - 1, int(rest[1]) - 1))
            else:
                raise ValueError(f"unknown log operation {ln!r}")
        if size is None:
            size = max((max(op.i, getattr(op, "j", op.i)) for op in ops), default=-1) + 1
        log = cls(size, domain)
        log.extend(ops)
        return log


# ---------------------------------------------------------------------------
# matrices over K[F] (lists of rows)


def identity_matrix(n: int, domain: Domain) -> list[list[RingElement]]:
    z, o = RingElement.zero(domain), RingElement.one(domain)
    return [tuple(o if r == c else z for c in range(n)) for r in range(n)]


def mat_mul(A, B) -> list[tuple]:
    n, m, k = len(A), len(B), len(B[0]) if B else 0
    dom = A[0][0].domain
    out = []
    for r in range(n):
        row = []
        for c in range(k):
            acc = RingElement.zero(dom)
            for t in range(m):
                if not A[r][t].is_zero() and not B[t][c].is_zero():
                    acc = acc + A[r][t] * B[t][c]
            row.append(acc)
        out.append(tuple(row))
    return out


def is_identity(M) -> bool:
    dom = M[0][0].domain
    return [tuple(r) for r in M] == identity_matrix(len(M), dom)


# ---------------------------------------------------------------------------
# dependence search


@dataclass
class DependenceSearch:
    alpha: list | None
    radius: int | None  # radius at which the relation appeared
    searched: list  # radii fully searched without finding a relation
    columns: int = 0


def _column(x: Item, g: Word) -> dict:
    if isinstance(x, RingElement):
        return dict(x.translate(g).terms)
    out = {}
    for c, coord in enumerate(x):
        for w, v in coord.translate(g).terms.items():
            out[(c, w)] = v
    return out


def _entry_order(key):
    if isinstance(key, tuple) and key and isinstance(key[0], int) and len(key) == 2 and isinstance(key[1], tuple):
        return (key[0], shortlex_key(key[1]))
    return shortlex_key(key)


def search_dependence(xis: Sequence[Item], R: int, domain: Domain | None = None, rank: int | None = None) -> DependenceSearch:
    """Canonical relation with supports in the ball of radius R, or none.

    Unknowns alpha_i^g are ordered by (shortlex g, i); the first column that
    depends on earlier ones yields the relation, normalized to coefficient 1
    at that unknown.  Columns arrive radius by radius, so the search is
    incremental over the schedule 0..R.
    """
    if not xis:
        return DependenceSearch(None, None, list(range(R + 1)))
    first = xis[0] if isinstance(xis[0], RingElement) else xis[0][0]
    dom = domain or first.domain
    if rank is None:
        rank = 1
        for x in xis:
            for c in (x,) if isinstance(x, RingElement) else x:
                for w in c.terms:
                    for l in w:
                        rank = max(rank, abs(l))
    elim = FieldEliminator(dom, _entry_order)
    n = len(xis)
    searched = []
    current = 0
    cols = 0
    for g in words_up_to(rank, R):
        if len(g) > current:
            searched.append(current)
            current = len(g)
        for i in range(n):
            cols += 1
            dep = elim.insert(_column(xis[i], g), (g, i))
            if dep is not None:
                alpha = [dict() for _ in range(n)]
                for (h, k), c in dep.items():
                    alpha[k][h] = c
                return DependenceSearch([RingElement(dom, a) for a in alpha], current, searched, cols)
    searched.append(current)
    return DependenceSearch(None, None, searched, cols)


def find_dependence(xis: Sequence[Item], R: int, domain: Domain | None = None, rank: int | None = None):
    return search_dependence(xis, R, domain, rank).alpha


# ---------------------------------------------------------------------------
# one reduction step


@dataclass
class ReductionStep:
    kind: str  # "same-color", "tree", "general", "general-fallback"
    v_star: int
    S: list
    replaced_color: int  # coordinate index whose element is replaced
    beta: list  # per coordinate; result = sum beta_i * xi_i
    result: RingElement
    diam_before: object
    diam_after: object
    ops: list  # operations on the coordinates realizing the step
    new_value: RingElement
    diagnostics: list = field(default_factory=list)

    def as_dict(self) -> dict:
        return {
            "kind": self.kind,
            "v_star": self.v_star,
            "S": list(self.S),
            "replaced": self.replaced_color + 1,
            "beta": [format_element(b) for b in self.beta],
            "result": format_element(self.result),
            "diam_before": _fmt_q(self.diam_before),
            "diam_after": _fmt_q(self.diam_after),
        }


def _fmt_q(x) -> str:
    if x == NEG_INF:
        return "-inf"
    return str(x)


_HYP_CACHE: dict = {}


def _hypothesis_ok(oracle: SpaceOracle, n: int):
    if isinstance(oracle, TreeOracle):
        return True, None
    key = (id(oracle), n)
    rep = _HYP_CACHE.get(key)
    if rep is None:
        rep = check_hypothesis(oracle, n)
        _HYP_CACHE[key] = rep
    return rep.satisfied, rep


def reduce_step(xis: Sequence[RingElement], alphas: Sequence[RingElement], oracle: SpaceOracle,
                constants: ReductionConstants | None = None, unsafe: bool = False) -> ReductionStep:
    """One application of the reduction theorem to a relation sum alpha_i xi_i.

    Returns a step replacing one xi_{i*} by xi_{i*} + sum beta_i xi_i of
    diameter smaller than diam(xi_{i*}) - delta.
    """
    n = len(xis)
    if len(alphas) != n:
        raise PreconditionError("xi and alpha must have the same length")
    dom = xis[0].domain
    if not dom.is_field:
        raise PreconditionError("reduction needs a field of coefficients")
    delta = oracle.delta

    # two coordinates of the same color
    for j in range(n):
        for i in range(j):
            if xis[i].is_zero() or xis[j].is_zero():
                continue
            hit = same_color(xis[i], xis[j])
            if hit is None:
                continue
            lam, g = hit
            u = RingElement(dom, {g: lam})
            beta = [RingElement.zero(dom) for _ in range(n)]
            beta[i] = -u
            beta[j] = RingElement.one(dom)
            zero = RingElement.zero(dom)
            return ReductionStep("same-color", j, [i], j, beta, zero, diam(xis[j], oracle), NEG_INF,
                                 [Elementary(i, j, -u)], zero)

    active = [i for i in range(n) if not xis[i].is_zero() and not alphas[i].is_zero()]
    products = {i: alphas[i] * xis[i] for i in active}
    top = max((abs_value(p, oracle) for p in products.values()), default=NEG_INF)
    total = element_sum(products.values(), dom)
    k = len(active)
    if constants is None or constants.n != k:
        constants = ReductionConstants.for_colors(delta, max(k, 1))
    if not (k and abs_value(total, oracle) < top - constants.delta_n):
        raise PreconditionError(
            f"relation inequality fails: |sum| = {_fmt_q(abs_value(total, oracle))} is not below "
            f"max|alpha_i xi_i| - delta_n = {_fmt_q(top - constants.delta_n)}"
        )
    ok, rep = _hypothesis_ok(oracle, k)
    if not ok and not unsafe:
        raise HypothesisNotMet(
            f"displacement {rep.displacement_lower_bound} does not exceed (2n+11)^2*delta = {rep.threshold}; "
            "rerun in unsafe mode to attempt the reduction anyway"
        )
    family = expand_relation(list(xis), list(alphas))
    if delta == 0:
        chosen, kind, diags = _tree_choice(family, oracle)
    else:
        chosen, kind, diags = _general_choice(family, oracle, constants)
    v_star, S = chosen
    return _finish(family, v_star, S, kind, diags, xis, oracle)


def _finish(family: Family, v_star: int, S: list, kind: str, diags: list, xis, oracle) -> ReductionStep:
    dom = xis[0].domain
    n = len(xis)
    star = family[v_star]
    i_star, g_star, c_star = star.origin
    if any(family[v].color == star.color for v in S):
        raise HypothesisNotMet("S contains a member of the replaced color", diags)
    beta_terms: list[dict] = [dict() for _ in range(n)]
    for v in [v_star] + list(S):
        i, g, c = family[v].origin
        beta_terms[i][g] = c
    beta = [RingElement(dom, t) for t in beta_terms]
    result = element_sum((family[v].element for v in [v_star] + list(S)), dom)
    before = diam(star.element, oracle)
    after = diam(result, oracle)
    if not after < before - oracle.delta:
        raise HypothesisNotMet(
            f"postcondition fails: diam {after} is not below {before} - {oracle.delta}", diags
        )
    u_inv = RingElement(dom, {word_inv(g_star): dom.inv(c_star)})
    ops = []
    for i in range(n):
        if i != i_star and not beta[i].is_zero():
            ops.append(Elementary(i, i_star, u_inv * beta[i]))
    new_value = u_inv * result
    return ReductionStep(kind, v_star, sorted(S), i_star, beta, result, before, after, ops, new_value, diags)


def _tree_choice(family: Family, oracle: SpaceOracle):
    g0 = build_gamma(family, 0, oracle)
    color_r = g0.color_radii
    r1 = max(color_r.values())
    top_colors = {c for c, r in color_r.items() if r == r1}
    comps = sorted(g0.components, key=lambda c: (not any(family[v].color in top_colors for v in c), c[0]))
    diags = []
    for comp in comps:
        v_star = max(comp, key=lambda v: (g0.radii[v], -v))
        S = [v for v in comp if v != v_star]
        if any(family[v].color == family[v_star].color for v in S):
            diags.append(f"component {comp}: replaced color repeats")
            continue
        res = element_sum((family[v].element for v in comp), family[0].element.domain)
        if diam(res, oracle) < diam(family[v_star].element, oracle) - oracle.delta:
            return (v_star, S), "tree", diags
        diags.append(f"component {comp}: diameter did not drop")
    raise HypothesisNotMet("no component of the extremal graph yields a reduction", diags)


def _general_choice(family: Family, oracle: SpaceOracle, constants: ReductionConstants):
    diags: list[str] = []
    try:
        return _general_path(family, list(range(len(family))), oracle, constants.delta, diags), "general", diags
    except HypothesisNotMet as exc:
        diags.append(f"general path: {exc}")
    # certified fallback: try every component of every ladder graph
    dom = family[0].element.domain
    for mu in constants.ladder:
        g = build_gamma(family, mu, oracle)
        for comp in g.components:
            v_star = max(comp, key=lambda v: (g.radii[v], -v))
            S = [v for v in comp if v != v_star]
            if any(family[v].color == family[v_star].color for v in S):
                continue
            res = element_sum((family[v].element for v in comp), dom)
            if diam(res, oracle) < diam(family[v_star].element, oracle) - oracle.delta:
                diags.append(f"fallback succeeded with mu={mu} component {comp}")
                return (v_star, S), "general-fallback", diags
    raise HypothesisNotMet("general-delta reduction failed", diags)


def _colors_of(family: Family, W) -> list[int]:
    return sorted({family[v].color for v in W})


def _general_path(family: Family, W: list, oracle: SpaceOracle, delta: Fraction, diags: list):
    """Induction on the number of colors, following the component chase."""
    sub = family.sub(W)
    n = len(_colors_of(family, W))
    if n <= 1:
        raise HypothesisNotMet("a single color carries no relation at this scale", diags)
    consts = ReductionConstants.for_colors(delta, n)
    dn, dprev = consts.delta_n, consts.delta_k(n - 1)
    g_prev = build_gamma(sub, dprev, oracle)
    g_n = build_gamma(sub, dn, oracle)
    d = g_n.d
    v0 = min(v for v in g_n.vertices if g_n.abs_values[v] == d)
    comp_prev = g_prev.component_of(v0)
    if len({sub[v].color for v in comp_prev}) < n:
        if not is_mu_relation(sub.sub(comp_prev), dprev, oracle):
            diags.append(f"component of v0 in the delta_{n - 1} graph is not a delta_{n - 1}-relation")
            raise HypothesisNotMet("relation does not localize to a component", diags)
        return _general_path(family, [W[v] for v in comp_prev], oracle, delta, diags)
    color_r = g_n.color_radii
    order = sorted(color_r, key=lambda c: (-color_r[c], c))
    r1 = color_r[order[0]]
    large = [c for c in order if color_r[c] >= r1 - dn]
    comp = g_n.component_of(v0)
    for c in large:
        hits = [v for v in comp if sub[v].color == c]
        if len(hits) != 1:
            diags.append(f"large color {c} appears {len(hits)} times in the delta_n component")
    ones = [v for v in comp if sub[v].color == order[0]]
    if not ones:
        raise HypothesisNotMet("largest color missing from the component", diags)
    v1 = ones[0]
    _check_centers(g_n, comp, v1, d, r1, consts, n, oracle, diags)
    return W[v1], [W[v] for v in comp if v != v1]


def _check_centers(g, comp, v1, d, r1, consts, n, oracle, diags):
    """Record the center inequalities used by the general-delta argument."""
    delta = oracle.delta
    dn, dprev = consts.delta_n, consts.delta_k(n - 1)
    bound = d - (dn + dprev) / 2 - r1 - (n + 1) * delta
    o = oracle.origin
    for a in range(len(comp)):
        for b in range(a + 1, len(comp)):
            cv, cw = g.center(comp[a]).center, g.center(comp[b]).center
            gp = gromov_product(oracle, cv, cw, o)
            if gp < bound:
                diags.append(f"inequality (1) fails for ({comp[a]},{comp[b]}): {gp} < {bound}")
    c1 = g.center(v1).center
    target = d - dprev - r1 - (n + 1) * delta
    length = oracle.dist(o, c1)
    t = min(max(target, Fraction(0)), length)
    t = Fraction(int(2 * t), 2)
    c_star = oracle.point_along(o, c1, t)
    radius = r1 + (n + 3) * delta
    for w in comp:
        for p in g.family[w].element.support():
            if oracle.norm(p) >= d - dn:
                continue
            if oracle.dist(c_star, p) > radius:
                diags.append(f"radius lemma fails at member {w}: |c*-p| > {radius}")


# ---------------------------------------------------------------------------
# consumers


def _total_diam(xis, oracle):
    return sum((diam(x, oracle) for x in xis if not x.is_zero()), Fraction(0))


def zero_coordinate(xis: Sequence[RingElement], alphas: Sequence[RingElement], oracle: SpaceOracle,
                    unsafe: bool = False, max_steps: int = 100_000):
    """Elementary operations making some coordinate zero, given sum alpha_i xi_i = 0."""
    xis = list(xis)
    alphas = list(alphas)
    dom = xis[0].domain
    if all(a.is_zero() for a in alphas):
        raise PreconditionError("alpha is zero")
    total = element_sum((a * x for a, x in zip(alphas, xis)), dom)
    if not total.is_zero():
        raise PreconditionError("alpha is not a relation: sum alpha_i xi_i != 0")
    log = TransformationLog(len(xis), dom)
    steps = []
    last = _total_diam(xis, oracle)
    while not any(x.is_zero() for x in xis):
        if len(steps) >= max_steps:
            raise ReductionError("step limit reached")
        step = reduce_step(xis, alphas, oracle, unsafe=unsafe)
        for op in step.ops:
            apply_op(xis, op, dom)
            update_alpha(alphas, op, dom)
            log.append(op)
        steps.append(step)
        now = _total_diam(xis, oracle)
        if not (any(x.is_zero() for x in xis) or now < last):
            raise ReductionError("termination metric did not decrease")
        last = now
    return log, xis, steps


def normalize_unimodular(xis: Sequence[RingElement], alphas: Sequence[RingElement], oracle: SpaceOracle,
                         unsafe: bool = False, max_steps: int = 100_000):
    """Operations taking xi to (lambda*g, 0, ..., 0), given sum alpha_i xi_i = 1.

    Returns (log, lambda, g, new_xis, steps).
    """
    xis = list(xis)
    alphas = list(alphas)
    dom = xis[0].domain
    total = element_sum((a * x for a, x in zip(alphas, xis)), dom)
    if total != RingElement.one(dom):
        raise PreconditionError("sum alpha_i xi_i is not 1")
    log = TransformationLog(len(xis), dom)
    steps = []
    while True:
        prods = [a * x for a, x in zip(alphas, xis)]
        top = max((abs_value(p, oracle) for p in prods if not p.is_zero()), default=NEG_INF)
        bound = ReductionConstants.for_colors(oracle.delta, max(1, sum(1 for p in prods if p))).delta_n
        if not top > bound:
            break
        if len(steps) >= max_steps:
            raise ReductionError("step limit reached")
        step = reduce_step(xis, alphas, oracle, unsafe=unsafe)
        for op in step.ops:
            apply_op(xis, op, dom)
            update_alpha(alphas, op, dom)
            log.append(op)
        steps.append(step)
    pick = next((i for i, (a, x) in enumerate(zip(alphas, xis))
                 if not (a * x).is_zero() and is_unit(x) is not None), None)
    if pick is None:
        raise HypothesisNotMet("no coordinate became a trivial unit")
    unit = is_unit(xis[pick])
    if unit is None:
        raise ReductionError("alpha_i xi_i is a unit but xi_i is not a trivial unit")
    lam, g = unit
    if pick != 0:
        op = Swap(0, pick)
        apply_op(xis, op, dom)
        update_alpha(alphas, op, dom)
        log.append(op)
    inv = RingElement(dom, {word_inv(g): dom.inv(lam)})
    for j in range(1, len(xis)):
        if not xis[j].is_zero():
            op = Elementary(0, j, -(xis[j] * inv))
            apply_op(xis, op, dom)
            update_alpha(alphas, op, dom)
            log.append(op)
    return log, lam, g, xis, steps


@dataclass(frozen=True)
class Status:
    kind: str  # VERIFIED_FREE or INDEPENDENT_UP_TO
    bound: int | None = None

    def __str__(self):
        if self.kind == "INDEPENDENT_UP_TO":
            return f"INDEPENDENT_UP_TO({self.bound})"
        return self.kind

    @property
    def conclusive(self) -> bool:
        return self.kind == "VERIFIED_FREE"


@dataclass
class BasisResult:
    basis: list
    log: TransformationLog
    status: Status
    positions: list  # indices of basis members in the transformed list
    transformed: list  # full transformed list, zeros included
    searches: list = field(default_factory=list)
    steps: int = 0

    def as_dict(self) -> dict:
        def fmt(x):
            if isinstance(x, RingElement):
                return format_element(x)
            return "(" + "; ".join(format_element(c) for c in x) + ")"

        return {
            "basis": [fmt(b) for b in self.basis],
            "status": str(self.status),
            "positions": [p + 1 for p in self.positions],
            "log": self.log.to_text().splitlines(),
            "searches": [
                {"radius_found": s.radius, "radii_without_relation": s.searched, "columns": s.columns}
                for s in self.searches
            ],
            "steps": self.steps,
        }


def _require_hypothesis(oracle: SpaceOracle, n: int, unsafe: bool) -> None:
    ok, rep = _hypothesis_ok(oracle, max(n, 1))
    if not ok and not unsafe:
        raise HypothesisNotMet(
            f"hypothesis fails for n={n}: displacement {rep.displacement_lower_bound} "
            f"<= threshold {rep.threshold}; rerun in unsafe mode"
        )


def _reduce_coordinate(items: list, coord, live: list, log: TransformationLog, oracle, R_max, unsafe, res_searches):
    """Run the ideal loop on one coordinate of the live items; return True if verified."""
    dom = log.domain
    steps = 0
    while True:
        vals = [coord(items[i]) for i in live]
        nz = [live[k] for k, v in enumerate(vals) if not v.is_zero()]
        if len(nz) <= 1:
            return True, steps
        search = search_dependence([coord(items[i]) for i in nz], R_max, dom)
        res_searches.append(search)
        if search.alpha is None:
            return False, steps
        sub_log, _, sub_steps = zero_coordinate([coord(items[i]) for i in nz], search.alpha, oracle, unsafe=unsafe)
        steps += len(sub_steps)
        glob = sub_log.remapped(nz, log.size)
        for op in glob:
            apply_op(items, op, dom)
            log.append(op)


def ideal_basis(generators: Sequence[RingElement], oracle: SpaceOracle, R_max: int = 6,
                unsafe: bool = False) -> BasisResult:
    """Free basis of the left ideal generated by ``generators``."""
    gens = list(generators)
    if not gens:
        raise PreconditionError("no generators")
    dom = gens[0].domain
    _require_hypothesis(oracle, len(gens), unsafe)
    log = TransformationLog(len(gens), dom)
    items = list(gens)
    searches: list = []
    verified, steps = _reduce_coordinate(items, lambda x: x, list(range(len(items))), log, oracle,
                                         R_max, unsafe, searches)
    positions = [i for i, x in enumerate(items) if not x.is_zero()]
    status = Status("VERIFIED_FREE") if verified else Status("INDEPENDENT_UP_TO", R_max)
    return BasisResult([items[i] for i in positions], log, status, positions, items, searches, steps)


def submodule_basis(vectors: Sequence[tuple], oracle: SpaceOracle, R_max: int = 6,
                    unsafe: bool = False) -> BasisResult:
    """Free basis of the submodule of K[F]^m generated by ``vectors``.

    Coordinates are processed in turn: the ideal loop runs on coordinate c of
    the vectors whose earlier coordinates vanish, with every operation applied
    to whole vectors; the survivors with nonzero coordinate c are kept and the
    rest move on to coordinate c + 1.
    """
    vecs = [tuple(v) for v in vectors]
    if not vecs:
        raise PreconditionError("no generators")
    m = len(vecs[0])
    if any(len(v) != m for v in vecs):
        raise PreconditionError("vectors of different lengths")
    dom = vecs[0][0].domain
    _require_hypothesis(oracle, len(vecs), unsafe)
    log = TransformationLog(len(vecs), dom)
    items = list(vecs)
    searches: list = []
    steps = 0
    live = [i for i, v in enumerate(items) if not item_is_zero(v)]
    for c in range(m):
        if not live:
            break
        _, s = _reduce_coordinate(items, lambda v, c=c: v[c], live, log, oracle, R_max, unsafe, searches)
        steps += s
        live = [i for i in live if items[i][c].is_zero() and not item_is_zero(items[i])]
    positions = [i for i, v in enumerate(items) if not item_is_zero(v)]
    status = Status("VERIFIED_FREE") if len(positions) <= 1 else Status("INDEPENDENT_UP_TO", R_max)
    return BasisResult([items[i] for i in positions], log, status, positions, items, searches, steps)


# ---------------------------------------------------------------------------
# GE factorization


def _swap_as_ge(op: Swap, dom: Domain) -> list:
    """Elementary and diagonal ops whose in-order product is the swap matrix."""
    one = RingElement.one(dom)
    return [
        Diagonal(op.i, dom.neg(dom.one), IDENTITY),
        Elementary(op.i, op.j, one),
        Elementary(op.j, op.i, -one),
        Elementary(op.i, op.j, one),
    ]


def ge_factor(X: Sequence[Sequence[RingElement]], A: Sequence[Sequence[RingElement]], oracle: SpaceOracle,
              unsafe: bool = False) -> TransformationLog:
    """Elementary and diagonal operations whose in-order product is X, given AX = 1."""
    n = len(X)
    if n == 0 or any(len(r) != n for r in X) or len(A) != n or any(len(r) != n for r in A):
        raise PreconditionError("X and A must be square of the same size")
    dom = X[0][0].domain
    X0 = [tuple(r) for r in X]
    X = [list(r) for r in X]
    A = [list(r) for r in A]
    if not is_identity(mat_mul(A, X)):
        raise PreconditionError("A X is not the identity")
    _require_hypothesis(oracle, n, unsafe)
    row_ops: list = []  # applied to X from the left, in order
    col_ops: list = []  # applied to X from the right, in order
    units = []
    for k in range(n):
        xi = [X[r][k] for r in range(k, n)]
        alpha = [A[k][r] for r in range(k, n)]
        sub, lam, g, _, _ = normalize_unimodular(xi, alpha, oracle, unsafe=unsafe)
        for op in sub.remapped(list(range(k, n)), n):
            # X <- M X on rows, A <- A M^-1 on columns
            apply_op(X, op, dom)
            X = [list(r) for r in X]
            _apply_col_inverse(A, op, dom)
            row_ops.append(op)
        u_inv = RingElement(dom, {word_inv(g): dom.inv(lam)})
        for j in range(k + 1, n):
            if X[k][j].is_zero():
                continue
            gamma = -(u_inv * X[k][j])
            # X <- X (I + gamma e_kj): column j += column k * gamma
            for r in range(n):
                if not X[r][k].is_zero():
                    X[r][j] = X[r][j] + X[r][k] * gamma
            # A <- (I - gamma e_kj) A: row k -= gamma * row j
            A[k] = [A[k][c] - gamma * A[j][c] for c in range(n)]
            col_ops.append(Elementary(j, k, gamma))
        units.append((lam, g))
    log = TransformationLog(n, dom)
    for op in row_ops:
        inv = invert_op(op, dom)
        log.extend(_swap_as_ge(inv, dom) if isinstance(inv, Swap) else [inv])
    for k, (lam, g) in enumerate(units):
        if not (lam == dom.one and g == IDENTITY):
            log.append(Diagonal(k, lam, g))
    for op in reversed(col_ops):
        log.append(op.inverse())
    for k, (lam, g) in enumerate(units):
        if X[k][k] != RingElement(dom, {g: lam}):
            raise ReductionError("reduced matrix is not the expected diagonal")
    if [tuple(r) for r in log.product()] != X0:
        raise ReductionError("GE factorization failed its replay check")
    return log


def _apply_col_inverse(A: list, op: Op, dom: Domain) -> None:
    n = len(A)
    if isinstance(op, Elementary):
        for r in range(n):
            if not A[r][op.j].is_zero():
                A[r][op.i] = A[r][op.i] - A[r][op.j] * op.beta
    elif isinstance(op, Diagonal):
        u_inv = RingElement(dom, {word_inv(op.g): dom.inv(op.lam)})
        for r in range(n):
            A[r][op.i] = A[r][op.i] * u_inv
    else:
        for r in range(n):
            A[r][op.i], A[r][op.j] = A[r][op.j], A[r][op.i]
