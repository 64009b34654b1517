"""Extremal graphs of families of group-ring elements.

A family is an indexed list of nonzero elements with a color partition
(trivial-unit classes).  ``build_gamma`` returns the graph whose vertices are
the members meeting the mu-extremal shell {p : |p| >= d - mu} and whose
edges are the shared extremal points.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Hashable, Sequence

from .ring import NEG_INF, RingElement, abs_value, color_key, diam, element_sum, same_color
from .spaces import CenterResult, SpaceOracle
from .words import IDENTITY, Word, shortlex_key, word_inv, word_mul


class NotAMuRelation(ValueError):
    pass


@dataclass(frozen=True)
class Member:
    index: int
    element: RingElement
    color: int
    origin: tuple | None = None  # (i, g, coeff) when expanded from a relation


@dataclass
class Family:
    members: list[Member]
    merges: list[str] = field(default_factory=list)

    def __len__(self):
        return len(self.members)

    def __iter__(self):
        return iter(self.members)

    def __getitem__(self, v: int) -> Member:
        return self.members[v]

    @property
    def colors(self) -> list[int]:
        return sorted({m.color for m in self.members})

    def total(self) -> RingElement:
        return element_sum((m.element for m in self.members), self.members[0].element.domain)

    def sub(self, indices: Sequence[int]) -> "Family":
        """Sub-family over the given member indices (renumbered, origins kept)."""
        out = []
        for new, v in enumerate(sorted(indices)):
            m = self.members[v]
            out.append(Member(new, m.element, m.color, m.origin))
        return Family(out)

    @classmethod
    def from_elements(cls, elements: Sequence[RingElement], colors: Sequence[int] | None = None) -> "Family":
        """Build a family; colors default to color_key classes.

        Members that are scalar multiples of an earlier member are merged into
        it (coefficients summed); merges are recorded in ``merges``.
        """
        kept: list[tuple[RingElement, int | None, list[int]]] = []
        merges = []
        for pos, x in enumerate(elements):
            if x.is_zero():
                merges.append(f"dropped zero member {pos}")
                continue
            for slot, (y, c, src) in enumerate(kept):
                hit = same_color(y, x)
                if hit is not None and hit[1] == IDENTITY:
                    kept[slot] = (y + x, c, src + [pos])
                    merges.append(f"merged member {pos} into {src[0]} (scalar multiple)")
                    break
            else:
                kept.append((x, None if colors is None else colors[pos], [pos]))
        kept = [(y, c, src) for y, c, src in kept if not y.is_zero()]
        members = []
        keys: list = []
        for v, (y, c, src) in enumerate(kept):
            if c is None:
                k = color_key(y).key()
                if k not in keys:
                    keys.append(k)
                c = keys.index(k)
            members.append(Member(v, y, c, tuple(src)))
        return cls(members, merges)


def expand_relation(xis: Sequence[RingElement], alphas: Sequence[RingElement]) -> Family:
    """Members alpha_i^g * g * xi_i, ordered by (i, shortlex g)."""
    if len(xis) != len(alphas):
        raise ValueError("xi and alpha must have the same length")
    if all(a.is_zero() for a in alphas):
        raise ValueError("all alpha are zero")
    keys: list = []
    color_of: dict[int, int] = {}
    for i, x in enumerate(xis):
        if x.is_zero():
            continue
        k = color_key(x).key()
        if k not in keys:
            keys.append(k)
        color_of[i] = keys.index(k)
    members = []
    for i, (x, a) in enumerate(zip(xis, alphas)):
        if x.is_zero():
            continue
        for g in a.support():
            c = a.terms[g]
            members.append(Member(len(members), x.translate(g).scale(c), color_of[i], (i, g, c)))
    if not members:
        raise ValueError("the relation has no nonzero terms")
    return Family(members)


# ---------------------------------------------------------------------------
# centers


def support_center(oracle: SpaceOracle, X: Sequence[Word]) -> CenterResult:
    """Midpoint of a diameter of a finite orbit set, chosen so that c(gX) = g c(X).

    Among diameter-realizing ordered pairs (a, b) the one minimizing
    (a^-1 b, a^-1 X) in shortlex is used, and the midpoint is taken on the
    oracle's geodesic from o to a^-1 b, then translated by a.  Both data are
    invariant under left translation of X, and a free action leaves no ties.
    """
    pts = sorted(set(X), key=shortlex_key)
    if not pts:
        raise ValueError("center of an empty set")
    if len(pts) == 1:
        return CenterResult(pts[0], oracle.delta, Fraction(0), (pts[0], pts[0]))
    best = Fraction(-1)
    pairs = []
    for i, a in enumerate(pts):
        for b in pts[i + 1:]:
            d = oracle.dist(a, b)
            if d > best:
                best, pairs = d, [(a, b)]
            elif d == best:
                pairs.append((a, b))
    cands = []
    for a, b in pairs:
        for s, t in ((a, b), (b, a)):
            si = word_inv(s)
            h = word_mul(si, t)
            shape = tuple(sorted((shortlex_key(word_mul(si, x)) for x in pts)))
            cands.append(((shortlex_key(h), shape), s, t, h))
    _, s, t, h = min(cands, key=lambda c: c[0])
    m = oracle.point_along(oracle.origin, h, best / 2)
    return CenterResult(oracle.act(s, m), best / 2 + oracle.delta, best, (s, t))


# ---------------------------------------------------------------------------
# the graph


@dataclass(frozen=True)
class Edge:
    v: int
    w: int
    point: Hashable


@dataclass
class ExtremalGraph:
    mu: Fraction
    d: object
    vertices: list[int]
    edges: list[Edge]
    components: list[list[int]]
    radii: dict[int, Fraction]
    abs_values: dict[int, object]
    family: Family
    oracle: SpaceOracle
    _centers: dict = field(default_factory=dict, repr=False)

    @property
    def color_radii(self) -> dict[int, Fraction]:
        out: dict[int, Fraction] = {}
        for m in self.family:
            out.setdefault(m.color, self.radii[m.index])
        return out

    def adjacency(self) -> dict[int, list[int]]:
        adj: dict[int, set] = {v: set() for v in self.vertices}
        for e in self.edges:
            adj[e.v].add(e.w)
            adj[e.w].add(e.v)
        return {v: sorted(s) for v, s in adj.items()}

    def component_of(self, v: int) -> list[int] | None:
        for comp in self.components:
            if v in comp:
                return comp
        return None

    def center(self, v: int) -> CenterResult:
        hit = self._centers.get(v)
        if hit is None:
            hit = support_center(self.oracle, self.family[v].element.support())
            self._centers[v] = hit
        return hit

    def to_edge_list(self) -> str:
        d = self.oracle.delta
        lines = [f"vertices {len(self.family)} delta {d.numerator}/{d.denominator}"]
        for m in self.family:
            lines.append(f"# {m.index} {m.color} {self.radii[m.index]} {self.abs_values[m.index]}")
        lines.extend(f"{e.v} {e.w}" for e in self.edges)
        return "\n".join(lines) + "\n"


def build_gamma(family: Family, mu, oracle: SpaceOracle) -> ExtremalGraph:
    mu = Fraction(mu)
    abs_values = {m.index: abs_value(m.element, oracle) for m in family}
    radii = {m.index: diam(m.element, oracle) / 2 for m in family}
    d = max(abs_values.values(), default=NEG_INF)
    shell = d - mu
    holders: dict = {}
    vertices = []
    for m in family:
        hit = False
        for p in m.element.support():
            if oracle.norm(p) >= shell:
                holders.setdefault(p, []).append(m.index)
                hit = True
        if hit:
            vertices.append(m.index)
    edges = []
    for p in sorted(holders, key=oracle.point_key):
        vs = holders[p]
        for a in range(len(vs)):
            for b in range(a + 1, len(vs)):
                edges.append(Edge(vs[a], vs[b], p))
    edges.sort(key=lambda e: (e.v, e.w, oracle.point_key(e.point)))
    # union-find
    parent = {v: v for v in vertices}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for e in edges:
        a, b = find(e.v), find(e.w)
        if a != b:
            parent[max(a, b)] = min(a, b)
    comps: dict[int, list[int]] = {}
    for v in vertices:
        comps.setdefault(find(v), []).append(v)
    components = sorted((sorted(c) for c in comps.values()), key=lambda c: c[0])
    return ExtremalGraph(mu, d, vertices, edges, components, radii, abs_values, family, oracle)


def is_mu_relation(family: Family, mu, oracle: SpaceOracle) -> bool:
    if len(family) == 0:
        return False
    top = max(abs_value(m.element, oracle) for m in family)
    return abs_value(family.total(), oracle) < top - Fraction(mu)


def component_relations(graph: ExtremalGraph, family: Family, mu, oracle: SpaceOracle | None = None):
    """Per-component verdicts for components meeting the extremal set."""
    oracle = oracle or graph.oracle
    if not is_mu_relation(family, mu, oracle):
        raise NotAMuRelation("the family does not define a mu-relation")
    out = []
    for comp in graph.components:
        if not any(graph.abs_values[v] == graph.d for v in comp):
            continue
        out.append((comp, is_mu_relation(family.sub(comp), mu, oracle)))
    return out


def longest_embedded_path(graph: ExtremalGraph, limit: int = 200_000) -> int:
    """Length (in edges) of the longest simple path, by exhaustive search."""
    adj = graph.adjacency()
    best = 0
    budget = [limit]

    def walk(v, seen, length):
        nonlocal best
        budget[0] -= 1
        if budget[0] < 0:
            raise RuntimeError("embedded path search exceeded its budget")
        best = max(best, length)
        for w in adj[v]:
            if w not in seen:
                seen.add(w)
                walk(w, seen, length + 1)
                seen.discard(w)

    for v in graph.vertices:
        walk(v, {v}, 0)
    return best
