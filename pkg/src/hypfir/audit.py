"""Randomized audit of the geometric and algebraic invariants the reductions rely on.

Every invariant is a pair (generator, check).  A trial draws an instance from
a ``random.Random`` seeded by (seed, trial, invariant name), so results do not
depend on the order in which trials run.  A failing instance is shrunk by
greedily deleting list entries while the check keeps failing.
"""

from __future__ import annotations

import copy
import random
import time
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

from .extremal import (
    Family,
    NotAMuRelation,
    build_gamma,
    component_relations,
    expand_relation,
    longest_embedded_path,
    support_center,
)
from .reduction import (
    Diagonal,
    Elementary,
    HypothesisNotMet,
    PreconditionError,
    ReductionError,
    TransformationLog,
    invert_op,
    reduce_step,
)
from .ring import NEG_INF, RingElement, abs_value, color_key, diam, element_sum, format_element, same_color
from .scalars import GF, QQ, Domain
from .spaces import (
    OutOfDomainError,
    SpaceOracle,
    TreeOracle,
    eps_center,
    four_point_delta,
    gromov_product,
    is_mid,
)
from .words import Word, format_word, letters_of_rank

PASS, FAIL, VACUOUS, INCONCLUSIVE = "pass", "fail", "vacuous", "inconclusive"


# ---------------------------------------------------------------------------
# random instances


def random_word(rng: random.Random, rank: int, length: int) -> Word:
    letters = letters_of_rank(rank)
    out: list[int] = []
    for _ in range(length):
        choices = [x for x in letters if not out or x != -out[-1]]
        out.append(rng.choice(choices))
    return tuple(out)


def random_scalar(rng: random.Random, domain: Domain):
    if domain.name.startswith("fp"):
        return rng.randrange(1, domain.p)
    if domain is QQ:
        return Fraction(rng.choice([-3, -2, -1, 1, 2, 3]), rng.choice([1, 1, 2, 3]))
    return rng.choice([-3, -2, -1, 1, 2, 3])


def random_element(rng: random.Random, domain: Domain, rank: int, max_support: int, max_len: int) -> RingElement:
    k = rng.randint(1, max_support)
    terms = {}
    for _ in range(k):
        w = random_word(rng, rank, rng.randint(0, max_len))
        terms[w] = random_scalar(rng, domain)
    return RingElement(domain, {w: domain.convert(c) for w, c in terms.items()})


def random_exact_relation(rng: random.Random, domain: Domain, rank: int, n: int, xi_len: int, alpha_len: int,
                          max_support: int = 3):
    """(xis, alphas) with alpha_n = 1 and xi_n = -sum_{i<n} alpha_i xi_i, all nonzero."""
    while True:
        pairs = [(random_element(rng, domain, rank, max_support, xi_len),
                  random_element(rng, domain, rank, 2, alpha_len)) for _ in range(n - 1)]
        xis, alphas = _close_relation(pairs, domain)
        if xis is not None:
            return xis, alphas


def _close_relation(pairs, domain):
    last = -element_sum((a * x for x, a in pairs), domain)
    if last.is_zero() or not pairs:
        return None, None
    return [x for x, _ in pairs] + [last], [a for _, a in pairs] + [RingElement.one(domain)]


# ---------------------------------------------------------------------------
# context


class Context:
    def __init__(self, oracle: SpaceOracle):
        self.oracle = oracle
        self.tree = isinstance(oracle, TreeOracle)
        self.delta = oracle.delta
        # The center and ball lemmas are thin-triangle statements; a
        # four-point constant delta only guarantees 4*delta-thin triangles.
        self.thin = 4 * oracle.delta
        self.rank = oracle.rank
        if self.tree:
            self.point_radius = 3
            self.word_len = 3
            self.points = [p for p in oracle.scan_points(3) if not is_mid(p)]
            self.candidates = oracle.scan_points(4)
        else:
            self.point_radius = 2
            self.word_len = 2
            cert = oracle.scan_points()
            self.points = [p for p in cert if not is_mid(p) and oracle.norm(p) <= 2]
            self.candidates = cert
        self._radius: dict = {}

    def certified(self, pts) -> bool:
        try:
            self.oracle.require_certified(pts)
        except OutOfDomainError:
            return False
        return True

    def radius(self, X) -> Fraction:
        """Radius of X over the candidate points (exact on trees)."""
        key = frozenset(X)
        hit = self._radius.get(key)
        if hit is not None:
            return hit
        o = self.oracle
        D = _diameter(o, X)
        if self.tree:
            r = D / 2
        else:
            r = min(max(o.dist(c, p) for p in X) for c in self.candidates)
        self._radius[key] = r
        return r

    def domain(self, rng) -> Domain:
        return rng.choice([GF(2), GF(3), QQ])


def _diameter(oracle, X) -> Fraction:
    X = list(X)
    return max((oracle.dist(a, b) for i, a in enumerate(X) for b in X[i + 1:]), default=Fraction(0))


def _sample_points(ctx: Context, rng, lo=1, hi=5) -> list:
    return rng.sample(ctx.points, rng.randint(lo, hi))


# ---------------------------------------------------------------------------
# invariants; each check returns (outcome, detail)


def _gen_points(ctx, rng):
    return {"X": _sample_points(ctx, rng)}


def check_metric(ctx, inst):
    o = ctx.oracle
    X = inst["X"]
    if len(X) < 3:
        return VACUOUS, "need three points"
    p, q, r = X[:3]
    if o.dist(p, q) != o.dist(q, p):
        return FAIL, "asymmetric"
    if o.dist(p, r) > o.dist(p, q) + o.dist(q, r):
        return FAIL, "triangle inequality"
    if (o.dist(p, q) == 0) != (p == q):
        return FAIL, "identity of indiscernibles"
    for g in inst["G"]:
        gp, gq = o.act(g, p), o.act(g, q)
        if not ctx.certified([gp, gq]):
            return INCONCLUSIVE, "translate leaves the certified region"
        if o.dist(gp, gq) != o.dist(p, q):
            return FAIL, f"action by {format_word(g)} is not isometric"
    return PASS, ""


def check_four_point(ctx, inst):
    T = inst["X"]
    S = T[: max(0, len(T) - inst["drop"][0])] if inst["drop"] else T
    dS = four_point_delta(ctx.oracle, S)
    dT = four_point_delta(ctx.oracle, T)
    if dS > dT:
        return FAIL, f"delta of subset {dS} exceeds {dT}"
    if ctx.tree and dT != 0:
        return FAIL, f"tree sample has delta {dT}"
    return PASS, ""


def check_center_product(ctx, inst):
    """|c| >= <p,c> >= (|X| + |p|)/2 - r - eps for a center c with X in B(c, r + eps)."""
    o = ctx.oracle
    X = inst["X"]
    c = eps_center(o, X)
    if not ctx.certified([c.center]):
        return INCONCLUSIVE, "center outside the certified region"
    bound = max(o.dist(c.center, p) for p in X)
    top = max(o.norm(p) for p in X)
    for p in X:
        gp = gromov_product(o, p, c.center, o.origin)
        if not (o.norm(c.center) >= gp >= (top + o.norm(p)) / 2 - bound):
            return FAIL, f"point {o.format_point(p)}: <p,c> = {gp}"
    return PASS, ""


def check_diameter_radius(ctx, inst):
    o = ctx.oracle
    X = inst["X"]
    D = _diameter(o, X)
    r = ctx.radius(X)
    if not (D / 2 <= r <= D / 2 + ctx.thin):
        return FAIL, f"radius {r} outside [{D / 2}, {D / 2 + ctx.thin}]"
    for i, a in enumerate(X):
        for b in X[i + 1:]:
            if o.dist(a, b) != D:
                continue
            m = o.midpoint_on_diameter(a, b)
            if not ctx.certified([m]):
                return INCONCLUSIVE, "midpoint outside the certified region"
            if max(o.dist(m, p) for p in X) > D / 2 + ctx.thin:
                return FAIL, f"midpoint of [{o.format_point(a)}, {o.format_point(b)}] is not a delta-center"
    return PASS, ""


def check_center_midpoint(ctx, inst):
    """Any eps-center is within eps + 2 delta of every diameter midpoint."""
    o = ctx.oracle
    X = inst["X"]
    D = _diameter(o, X)
    if D == 0:
        return VACUOUS, "single point"
    r = ctx.radius(X)
    reach = r + inst["slack"][0]
    cands = [c for c in ctx.candidates if o.dist(c, X[0]) <= reach and max(o.dist(c, p) for p in X) <= reach]
    for i, a in enumerate(X):
        for b in X[i + 1:]:
            if o.dist(a, b) != D:
                continue
            for s, t in ((a, b), (b, a)):
                m = o.midpoint_on_diameter(s, t)
                for c in cands:
                    eps = max(o.dist(c, p) for p in X) - r
                    if o.dist(c, m) > eps + 2 * ctx.thin:
                        return FAIL, f"center {o.format_point(c)} is {o.dist(c, m)} from midpoint {o.format_point(m)}"
    return PASS, ""


def _gen_center_midpoint(ctx, rng):
    return {"X": _sample_points(ctx, rng, 2, 5), "slack": [Fraction(rng.randint(0, 2), 2)]}


def check_free_on_subsets(ctx, inst):
    o = ctx.oracle
    X = set(inst["X"])
    for g in inst["G"]:
        if not g:
            continue
        gX = {o.act(g, p) for p in X}
        if gX == X:
            return FAIL, f"{format_word(g)} fixes the set"
    return PASS, ""


def _gen_free(ctx, rng):
    return {"X": _sample_points(ctx, rng, 1, 6),
            "G": [random_word(rng, ctx.rank, rng.randint(1, 3)) for _ in range(3)]}


def check_center_norm(ctx, inst):
    """|X| - r - eps <= |c| <= |X| - r + 4 delta + eps for computed centers."""
    o = ctx.oracle
    X = inst["X"]
    r = ctx.radius(X)
    top = max(o.norm(p) for p in X)
    for c in (eps_center(o, X), _word_center(o, X)):
        if c is None:
            continue
        if not ctx.certified([c.center]):
            return INCONCLUSIVE, "center outside the certified region"
        eps = max(o.dist(c.center, p) for p in X) - r
        n = o.norm(c.center)
        if not (top - r - eps <= n <= top - r + 4 * ctx.thin + eps):
            return FAIL, f"|c| = {n} with |X| = {top}, r = {r}, eps = {eps}"
    return PASS, ""


def _word_center(o, X):
    if any(is_mid(p) for p in X):
        return None
    return support_center(o, X)


def check_ball_intersection(ctx, inst):
    o = ctx.oracle
    (c1, c2), (r1, r2) = inst["C"], inst["R"]
    both = [p for p in ctx.candidates if o.dist(p, c1) <= r1 and o.dist(p, c2) <= r2]
    if len(both) < 2:
        return VACUOUS, "intersection has fewer than two points"
    if not ctx.tree and any(o.norm(c) + r > o.certified_radius for c, r in ((c1, r1), (c2, r2))):
        return INCONCLUSIVE, "ball leaves the certified region"
    D = _diameter(o, both)
    bound = r1 + r2 - o.dist(c1, c2) + 2 * ctx.thin
    if D > bound:
        return FAIL, f"intersection diameter {D} > {bound}"
    return PASS, ""


def _gen_balls(ctx, rng):
    near = [p for p in ctx.points if ctx.oracle.norm(p) <= 1]
    return {"C": rng.sample(near, 2), "R": [Fraction(rng.randint(1, 4), 2) for _ in range(2)]}


def check_product_chain(ctx, inst):
    o = ctx.oracle
    pts = inst["X"]
    k = inst["k"][0]
    if len(pts) != 2 ** k + 1:
        return VACUOUS, "chain length changed"
    lhs = gromov_product(o, pts[0], pts[-1], o.origin)
    rhs = min(gromov_product(o, a, b, o.origin) for a, b in zip(pts, pts[1:])) - k * ctx.delta
    if lhs < rhs:
        return FAIL, f"<x0,xN> = {lhs} < {rhs}"
    return PASS, ""


def _gen_chain(ctx, rng):
    k = rng.randint(1, 3)
    return {"X": [rng.choice(ctx.points) for _ in range(2 ** k + 1)], "k": [k]}


# -- extremal graphs ---------------------------------------------------------


def _gen_family(ctx, rng):
    dom = ctx.domain(rng)
    L = ctx.word_len - 1
    elems = []
    for _ in range(rng.randint(1, 3)):
        base = random_element(rng, dom, ctx.rank, 3, L)
        for _ in range(rng.randint(1, 3)):
            g = random_word(rng, ctx.rank, rng.randint(0, 1))
            elems.append(base.translate(g).scale(random_scalar(rng, dom)))
    return {"elements": elems, "mu": [Fraction(rng.randint(0, 3), 2)]}


def _graph_data(ctx, inst):
    """(family, graph, centers, radii, eps), or an (outcome, detail) pair."""
    elems = [e for e in inst["elements"] if not e.is_zero()]
    fam = Family.from_elements(elems)
    if len(fam) == 0:
        return VACUOUS, "empty family"
    supports = [pt for m in fam for pt in m.element.support()]
    if not ctx.certified(supports):
        return INCONCLUSIVE, "family leaves the certified region"
    g = build_gamma(fam, inst["mu"][0], ctx.oracle)
    centers, radii, eps = {}, {}, {}
    for m in fam:
        c = g.center(m.index)
        X = m.element.support()
        centers[m.index] = c.center
        radii[m.index] = ctx.radius(X)
        eps[m.index] = max(ctx.oracle.dist(c.center, p) for p in X) - radii[m.index]
    if not ctx.certified(centers.values()):
        return INCONCLUSIVE, "a center leaves the certified region"
    return fam, g, centers, radii, eps


def check_adjacent_centers(ctx, inst):
    data = _graph_data(ctx, inst)
    if len(data) == 2:
        return data
    fam, g, centers, radii, eps = data
    o, mu = ctx.oracle, g.mu
    e = max(eps.values())
    for ed in g.edges:
        v, w = ed.v, ed.w
        bound = abs(radii[v] - radii[w]) + 2 * mu + 10 * ctx.thin + 4 * e
        if o.dist(centers[v], centers[w]) > bound:
            return FAIL, f"adjacent {v},{w}: centers {o.dist(centers[v], centers[w])} apart > {bound}"
    return PASS, ""


def _path_hypothesis(ctx, fam, centers, eps, mu, n, extra=lambda v: 0):
    o = ctx.oracle
    e = max(eps.values())
    for a in fam:
        for b in fam:
            if a.index < b.index and a.color == b.color:
                if o.dist(centers[a.index], centers[b.index]) <= 2 * mu + (10 + 2 * n) * ctx.thin + 4 * e + extra(a):
                    return False
    return True


def check_path_bound(ctx, inst):
    data = _graph_data(ctx, inst)
    if len(data) == 2:
        return data
    fam, g, centers, radii, eps = data
    n = len(fam.colors)
    if not _path_hypothesis(ctx, fam, centers, eps, g.mu, n):
        return VACUOUS, "same-color centers too close"
    L = longest_embedded_path(g)
    if L > 2 ** n - 2:
        return FAIL, f"embedded path of length {L} with {n} colors"
    return PASS, ""


def _component_diameter(g, comp) -> int:
    adj = g.adjacency()
    best = 0
    for s in comp:
        seen = {s: 0}
        q = deque([s])
        while q:
            v = q.popleft()
            for w in adj[v]:
                if w not in seen:
                    seen[w] = seen[v] + 1
                    q.append(w)
        best = max(best, max(seen.values()))
    return best


def check_component_diameter(ctx, inst):
    data = _graph_data(ctx, inst)
    if len(data) == 2:
        return data
    fam, g, centers, radii, eps = data
    n = len(fam.colors)
    if not _path_hypothesis(ctx, fam, centers, eps, g.mu, n):
        return VACUOUS, "same-color centers too close"
    for comp in g.components:
        d = _component_diameter(g, comp)
        if d > 2 ** n - 2:
            return FAIL, f"component {comp} has diameter {d}"
    return PASS, ""


def check_color_uniqueness(ctx, inst):
    data = _graph_data(ctx, inst)
    if len(data) == 2:
        return data
    fam, g, centers, radii, eps = data
    n = len(fam.colors)
    if not _path_hypothesis(ctx, fam, centers, eps, g.mu, n):
        return VACUOUS, "same-color centers too close"
    r1 = max(radii.values())
    checked = 0
    for col in fam.colors:
        members = [m for m in fam if m.color == col]
        ri = radii[members[0].index]
        if not _path_hypothesis(ctx, Family(members), centers, eps, g.mu, n, extra=lambda v: 2 * (r1 - ri)):
            continue
        checked += 1
        for comp in g.components:
            hits = [v for v in comp if fam[v].color == col]
            if len(hits) > 1:
                return FAIL, f"color {col} appears {len(hits)} times in component {comp}"
    return (PASS, "") if checked else (VACUOUS, "no color meets the separation threshold")


def _gen_relation_family(ctx, rng):
    dom = ctx.domain(rng)
    n = rng.randint(2, 4)
    xis, alphas = random_exact_relation(rng, dom, ctx.rank, n, ctx.word_len - 1, 1)
    extra = [random_element(rng, dom, ctx.rank, 2, 1) for _ in range(int(rng.random() < 0.3))]
    return {"pairs": list(zip(xis[:-1], alphas[:-1])), "noise": extra, "mu": [Fraction(rng.randint(0, 3), 2)]}


def check_component_relations(ctx, inst):
    if not inst["pairs"]:
        return VACUOUS, "empty relation"
    dom = inst["pairs"][0][0].domain
    xis, alphas = _close_relation(inst["pairs"], dom)
    if xis is None:
        return VACUOUS, "relation collapsed"
    fam = expand_relation(xis, alphas)
    members = [m.element for m in fam] + list(inst["noise"])
    fam = Family.from_elements(members)
    if len(fam) == 0:
        return VACUOUS, "family cancelled completely"
    supports = [p for m in fam for p in m.element.support()]
    if not ctx.certified(supports):
        return INCONCLUSIVE, "family leaves the certified region"
    mu = inst["mu"][0]
    g = build_gamma(fam, mu, ctx.oracle)
    try:
        verdicts = component_relations(g, fam, mu)
    except NotAMuRelation:
        return VACUOUS, "noise broke the relation"
    for comp, ok in verdicts:
        if not ok:
            return FAIL, f"component {comp} is not a {mu}-relation"
    return PASS, ""


def check_gamma_monotone(ctx, inst):
    elems = [e for e in inst["elements"] if not e.is_zero()]
    if not elems:
        return VACUOUS, "empty family"
    fam = Family.from_elements(elems)
    if len(fam) == 0:
        return VACUOUS, "family cancelled completely"
    if not ctx.certified([p for m in fam for p in m.element.support()]):
        return INCONCLUSIVE, "family leaves the certified region"
    mu = inst["mu"][0]
    small = build_gamma(fam, mu, ctx.oracle)
    big = build_gamma(fam, mu + Fraction(1, 2), ctx.oracle)
    if not set(small.vertices) <= set(big.vertices):
        return FAIL, "vertex set shrank"
    if not set(small.edges) <= set(big.edges):
        return FAIL, "edge set shrank"
    return PASS, ""


# -- algebra -----------------------------------------------------------------


def _gen_pair(ctx, rng):
    dom = ctx.domain(rng)
    L = ctx.word_len - 1
    return {"elements": [random_element(rng, dom, ctx.rank, 4, L) for _ in range(2)],
            "G": [random_word(rng, ctx.rank, 1)],
            "scalar": [random_scalar(rng, dom)]}


def check_filtration(ctx, inst):
    if len(inst["elements"]) < 2:
        return VACUOUS, "need two elements"
    x, y = inst["elements"][:2]
    o = ctx.oracle
    if not ctx.certified(x.support() + y.support()):
        return INCONCLUSIVE, "support outside the certified region"
    ax, ay = abs_value(x, o), abs_value(y, o)
    if abs_value(x - y, o) > max(ax, ay):
        return FAIL, "|x - y| > max(|x|, |y|)"
    wl = lambda e: max((len(w) for w in e.terms), default=NEG_INF)
    if wl(x * y) > wl(x) + wl(y):
        return FAIL, "word length of the product exceeds the sum"
    pos = lambda e: RingElement(e.domain, {tuple(abs(c) for c in w): v for w, v in e.terms.items()})
    px, py = pos(x), pos(y)
    if not px.is_zero() and not py.is_zero() and wl(px * py) != wl(px) + wl(py):
        return FAIL, "word length is not additive on positive words"
    if ctx.tree and abs_value(x * y, o) > ax + ay:
        return FAIL, "|xy| > |x| + |y|"
    g = inst["G"][0]
    gx = x.translate(g)
    if not ctx.certified(gx.support()):
        return INCONCLUSIVE, "translate outside the certified region"
    if diam(gx, o) != diam(x, o):
        return FAIL, f"diameter changed under translation by {format_word(g)}"
    return PASS, ""


def check_zero_divisors(ctx, inst):
    if len(inst["elements"]) < 2:
        return VACUOUS, "need two elements"
    x, y = inst["elements"][:2]
    if x.is_zero() or y.is_zero():
        return VACUOUS, "zero factor"
    if (x * y).is_zero():
        return FAIL, "product of nonzero elements vanished"
    return PASS, ""


def check_color_key(ctx, inst):
    if not inst["elements"]:
        return VACUOUS, "no element"
    x = inst["elements"][0]
    dom = x.domain
    g, lam = inst["G"][0], dom.convert(inst["scalar"][0])
    y = x.translate(g).scale(lam)
    if color_key(x).key() != color_key(y).key():
        return FAIL, "color key changed under a trivial unit"
    hit = same_color(x, y)
    if hit is None or x.translate(hit[1]).scale(hit[0]) != y:
        return FAIL, "no trivial-unit witness for equal colors"
    if len(inst["elements"]) > 1:
        z = inst["elements"][1]
        eq = color_key(x).key() == color_key(z).key()
        hit = same_color(x, z)
        if eq != (hit is not None):
            return FAIL, "color key and witness search disagree"
        if hit is not None and x.translate(hit[1]).scale(hit[0]) != z:
            return FAIL, "bad witness"
    return PASS, ""


# -- the reduction -----------------------------------------------------------


def _gen_reduce(ctx, rng):
    dom = rng.choice([GF(2), GF(3), QQ])
    n = rng.randint(2, 4)
    xis, alphas = random_exact_relation(rng, dom, ctx.rank, n, ctx.word_len - 2 if not ctx.tree else 2, 1)
    return {"pairs": list(zip(xis[:-1], alphas[:-1]))}


def check_reduce_postcondition(ctx, inst):
    if not inst["pairs"]:
        return VACUOUS, "empty relation"
    dom = inst["pairs"][0][0].domain
    xis, alphas = _close_relation(inst["pairs"], dom)
    if xis is None:
        return VACUOUS, "relation collapsed"
    o = ctx.oracle
    fam = expand_relation(xis, alphas)
    if not ctx.certified([p for m in fam for p in m.element.support()] + [p for x in xis for p in x.support()]):
        return INCONCLUSIVE, "relation leaves the certified region"
    try:
        step = reduce_step(xis, alphas, o, unsafe=not ctx.tree)
    except HypothesisNotMet as exc:
        if ctx.tree:
            return FAIL, f"tree reduction failed: {exc}"
        return INCONCLUSIVE, f"hypothesis not met: {exc}"
    except (PreconditionError, ReductionError) as exc:
        return FAIL, f"{type(exc).__name__}: {exc}"
    # independent re-verification
    total = element_sum((b * x for b, x in zip(step.beta, xis)), dom)
    if total != step.result:
        return FAIL, "result is not sum beta_i xi_i"
    if step.kind != "same-color":
        for a, b in zip(alphas, step.beta):
            if any(a.terms.get(w) != c for w, c in b.terms.items()):
                return FAIL, "beta uses a word or coefficient outside alpha"
        before = diam(fam[step.v_star].element, o)
        if not diam(step.result, o) < before - ctx.delta:
            return FAIL, f"diam {diam(step.result, o)} not below {before} - {ctx.delta}"
    return PASS, ""


# ---------------------------------------------------------------------------
# registry and driver


@dataclass(frozen=True)
class Invariant:
    name: str
    statement: str
    generate: Callable
    check: Callable
    thin: bool = False  # uses the thin-triangle constant


def _metric_gen(ctx, rng):
    return {"X": _sample_points(ctx, rng, 3, 3), "G": [random_word(rng, ctx.rank, 1)]}


def _four_gen(ctx, rng):
    return {"X": _sample_points(ctx, rng, 4, 7), "drop": [rng.randint(0, 3)]}


INVARIANTS = [
    Invariant("metric", "distance is a metric and the action is isometric", _metric_gen, check_metric),
    Invariant("four-point", "four-point delta is monotone in the point set and zero on trees",
              _four_gen, check_four_point),
    Invariant("center-product", "|c| >= <p,c> >= (|X|+|p|)/2 - r - eps", _gen_points, check_center_product),
    Invariant("diameter-radius", "diam/2 <= radius <= diam/2 + delta; midpoints are delta-centers",
              _gen_points, check_diameter_radius, thin=True),
    Invariant("center-midpoint", "|c - m| <= eps + 2 delta", _gen_center_midpoint, check_center_midpoint, thin=True),
    Invariant("free-on-subsets", "gX = X forces g = 1", _gen_free, check_free_on_subsets),
    Invariant("center-norm", "|X| - r - eps <= |c| <= |X| - r + 4 delta + eps", _gen_points, check_center_norm, thin=True),
    Invariant("ball-intersection", "diam(B(c1,r1) & B(c2,r2)) <= r1 + r2 - |c1-c2| + 2 delta",
              _gen_balls, check_ball_intersection, thin=True),
    Invariant("product-chain", "<x0,xN> >= min <xi,xi+1> - k delta for N = 2^k", _gen_chain, check_product_chain),
    Invariant("adjacent-centers", "|c_v - c_w| <= |r_v - r_w| + 2 mu + 10 delta + 4 eps on edges",
              _gen_family, check_adjacent_centers, thin=True),
    Invariant("path-bound", "embedded paths have length <= 2^n - 2", _gen_family, check_path_bound, thin=True),
    Invariant("component-diameter", "components have diameter <= 2^n - 2", _gen_family, check_component_diameter, thin=True),
    Invariant("color-uniqueness", "separated colors occur at most once per component",
              _gen_family, check_color_uniqueness, thin=True),
    Invariant("component-relations", "components meeting the extremal set carry their own mu-relation",
              _gen_relation_family, check_component_relations),
    Invariant("gamma-monotone", "the mu graph is a subgraph of the mu' graph for mu <= mu'",
              _gen_family, check_gamma_monotone),
    Invariant("filtration", "|x-y| <= max, |xy| <= |x|+|y|, additivity on positive words, diam invariance",
              _gen_pair, check_filtration),
    Invariant("zero-divisors", "products of nonzero elements are nonzero", _gen_pair, check_zero_divisors),
    Invariant("color-key", "equal color keys iff a trivial-unit witness exists", _gen_pair, check_color_key),
    Invariant("reduce-postcondition", "diam(result) < diam(xi_v*) - delta on exact relations",
              _gen_reduce, check_reduce_postcondition),
]


def shrink(ctx: Context, inv: Invariant, inst: dict, budget: int = 200) -> dict:
    """Greedily delete list entries while the check still fails."""
    inst = {k: list(v) for k, v in inst.items()}
    changed = True
    while changed and budget > 0:
        changed = False
        for key in sorted(inst):
            i = 0
            while i < len(inst[key]) and budget > 0:
                trial = dict(inst)
                trial[key] = inst[key][:i] + inst[key][i + 1:]
                budget -= 1
                try:
                    outcome, _ = inv.check(ctx, trial)
                except Exception:
                    outcome = None
                if outcome == FAIL:
                    inst = trial
                    changed = True
                else:
                    i += 1
    return inst


def format_instance(ctx: Context, inst: dict) -> dict:
    def fmt(x):
        if isinstance(x, RingElement):
            return format_element(x)
        if isinstance(x, tuple) and all(isinstance(y, RingElement) for y in x):
            return [fmt(y) for y in x]
        if isinstance(x, tuple) and all(isinstance(y, int) for y in x) or is_mid(x):
            return ctx.oracle.format_point(x)
        return str(x)

    return {k: [fmt(x) for x in v] for k, v in sorted(inst.items())}


@dataclass
class Tally:
    name: str
    statement: str
    counts: dict = field(default_factory=lambda: {PASS: 0, FAIL: 0, VACUOUS: 0, INCONCLUSIVE: 0})
    counterexamples: list = field(default_factory=list)
    discrepancies: int | None = None  # failures if the four-point constant stood in for the thin one
    discrepancy_example: dict | None = None

    def as_dict(self) -> dict:
        out = {"name": self.name, "statement": self.statement, **self.counts,
               "counterexamples": self.counterexamples}
        if self.discrepancies is not None:
            out["four_point_discrepancies"] = self.discrepancies
            out["discrepancy_example"] = self.discrepancy_example
        return out


@dataclass
class AuditReport:
    oracle: str
    delta: Fraction
    trials: int
    seed: int
    tallies: list
    elapsed: float = 0.0

    @property
    def failures(self) -> int:
        return sum(t.counts[FAIL] for t in self.tallies)

    def as_dict(self) -> dict:
        return {
            "oracle": self.oracle,
            "delta": str(self.delta),
            "thin_delta": str(4 * self.delta),
            "trials": self.trials,
            "seed": self.seed,
            "failures": self.failures,
            "invariants": [t.as_dict() for t in self.tallies],
        }


def audit_lemmas(oracle: SpaceOracle, trials: int, seed: int = 0, only: list | None = None,
                 max_counterexamples: int = 3) -> AuditReport:
    if trials < 1:
        raise ValueError("trials must be >= 1")
    t0 = time.perf_counter()
    ctx = Context(oracle)
    naive = None
    if ctx.delta:
        naive = copy.copy(ctx)
        naive.thin = ctx.delta
    invs = [inv for inv in INVARIANTS if only is None or inv.name in only]
    tallies = []
    for inv in invs:
        tally = Tally(inv.name, inv.statement)
        if inv.thin and naive is not None:
            tally.discrepancies = 0
        for t in range(trials):
            rng = random.Random(f"{seed}:{t}:{inv.name}")
            inst = inv.generate(ctx, rng)
            try:
                outcome, detail = inv.check(ctx, inst)
            except OutOfDomainError as exc:
                outcome, detail = INCONCLUSIVE, str(exc)
            except Exception as exc:  # an unexpected crash is a failure of the implementation
                outcome, detail = FAIL, f"{type(exc).__name__}: {exc}"
            tally.counts[outcome] += 1
            if outcome == FAIL and len(tally.counterexamples) < max_counterexamples:
                small = shrink(ctx, inv, inst)
                tally.counterexamples.append({"trial": t, "detail": detail,
                                              "instance": format_instance(ctx, small)})
            if tally.discrepancies is not None and outcome != FAIL:
                try:
                    n_out, n_detail = inv.check(naive, inst)
                except OutOfDomainError:
                    n_out = INCONCLUSIVE
                if n_out == FAIL:
                    tally.discrepancies += 1
                    if tally.discrepancy_example is None:
                        small = shrink(naive, inv, inst)
                        tally.discrepancy_example = {"trial": t, "detail": n_detail,
                                                     "instance": format_instance(ctx, small)}
        tallies.append(tally)
    spec = getattr(oracle, "spec", repr(oracle))
    return AuditReport(spec, oracle.delta, trials, seed, tallies, time.perf_counter() - t0)


def zero_divisor_trials(trials: int, seed: int = 0, domain: Domain | None = None, rank: int = 2,
                        max_support: int = 8, max_len: int = 3):
    """Multiply random nonzero pairs; return (trials, list of failing pairs)."""
    domain = domain or GF(2)
    bad = []
    for t in range(trials):
        rng = random.Random(f"{seed}:{t}:zero-divisors")
        x = random_element(rng, domain, rank, max_support, max_len)
        y = random_element(rng, domain, rank, max_support, max_len)
        if (x * y).is_zero():
            bad.append((x, y))
    return trials, bad


def random_ge_product(rng: random.Random, domain: Domain, rank: int, n: int, factors: int,
                      max_diam: int = 3, p_elementary: float = 0.75):
    """(X, A, log): X a product of random elementary/diagonal matrices, A its inverse."""
    tree = TreeOracle(rank)
    log = TransformationLog(n, domain)
    for _ in range(factors):
        if n > 1 and rng.random() < p_elementary:
            i, j = rng.sample(range(n), 2)
            while True:
                beta = random_element(rng, domain, rank, 3, 2)
                if diam(beta, tree) <= max_diam:
                    break
            log.append(Elementary(i, j, beta))
        else:
            log.append(Diagonal(rng.randrange(n), domain.convert(random_scalar(rng, domain)),
                                random_word(rng, rank, rng.randint(0, 1))))
    inv = TransformationLog(n, domain, [invert_op(op, domain) for op in reversed(log.ops)])
    return log.product(), inv.product(), log
