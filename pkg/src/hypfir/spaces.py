"""Metric-space oracles: the Cayley tree of a free group and finite Cayley balls.

Points are either vertices or midpoints of edges (:class:`Mid`).  All
distances are exact ``Fraction`` values on the half-integer lattice.
"""

from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from typing import Hashable, Iterable, NamedTuple, Sequence

import numpy as np

from .words import (
    IDENTITY,
    Word,
    common_prefix,
    format_word,
    letters_of_rank,
    parse_word,
    shortlex_key,
    word_inv,
    word_mul,
    words_up_to,
)

HALF = Fraction(1, 2)


class OutOfDomainError(ValueError):
    """A point lies outside the region where the oracle's metric is trustworthy."""


class ResourceError(RuntimeError):
    pass


class Mid(NamedTuple):
    """Midpoint of the edge ``{u, v}``; ``u`` precedes ``v`` in the vertex order."""

    u: Hashable
    v: Hashable


def is_mid(p) -> bool:
    return isinstance(p, Mid)


class SpaceOracle:
    """Common machinery; subclasses supply vertex distances and geodesics."""

    origin: Hashable
    delta: Fraction
    rank: int

    # -- to be provided -------------------------------------------------
    def vertex_dist(self, u, v) -> int:
        raise NotImplementedError

    def vertex_path(self, u, v) -> list:
        raise NotImplementedError

    def vertex_key(self, u):
        raise NotImplementedError

    def act(self, g: Word, p):
        raise NotImplementedError

    def require_certified(self, points: Iterable) -> None:
        return None

    # -- shared ---------------------------------------------------------
    def mid(self, u, v) -> Mid:
        if self.vertex_key(u) <= self.vertex_key(v):
            return Mid(u, v)
        return Mid(v, u)

    def point_key(self, p):
        if is_mid(p):
            return (1, self.vertex_key(p.u), self.vertex_key(p.v))
        return (0, self.vertex_key(p))

    def dist(self, p, q) -> Fraction:
        if p == q:
            return Fraction(0)
        pm, qm = is_mid(p), is_mid(q)
        if not pm and not qm:
            return Fraction(self.vertex_dist(p, q))
        if pm and not qm:
            return min(self.vertex_dist(p.u, q), self.vertex_dist(p.v, q)) + HALF
        if qm and not pm:
            return min(self.vertex_dist(q.u, p), self.vertex_dist(q.v, p)) + HALF
        return Fraction(
            min(self.vertex_dist(a, b) for a in (p.u, p.v) for b in (q.u, q.v)) + 1
        )

    def norm(self, p) -> Fraction:
        return self.dist(self.origin, p)

    def geodesic(self, p, q) -> list:
        """Points of a geodesic from p to q at half-unit spacing (deterministic)."""
        if p == q:
            return [p]
        d = self.dist(p, q)
        head: list = []
        tail: list = []
        a, b = p, q
        if is_mid(p):
            a = next(x for x in (p.u, p.v) if self.dist(x, q) == d - HALF)
            head = [p]
        if is_mid(q):
            b = next(y for y in (q.u, q.v) if self.dist(a, y) == self.dist(a, q) - HALF)
            tail = [q]
        verts = self.vertex_path(a, b)
        body = [verts[0]]
        for x, y in zip(verts, verts[1:]):
            body.append(self.mid(x, y))
            body.append(y)
        return head + body + tail

    def point_along(self, p, q, t: Fraction):
        """The point at distance t from p on the chosen geodesic [p, q]."""
        t = Fraction(t)
        if (2 * t).denominator != 1:
            raise ValueError(f"only half-integer positions are representable, got {t}")
        path = self.geodesic(p, q)
        k = int(2 * t)
        if not 0 <= k < len(path):
            raise ValueError(f"position {t} outside segment of length {self.dist(p, q)}")
        return path[k]

    def midpoint_on_diameter(self, a, b):
        return self.point_along(a, b, self.dist(a, b) / 2)

    def format_point(self, p) -> str:
        f = self.format_vertex
        if is_mid(p):
            return f"mid({f(p.u)},{f(p.v)})"
        return f(p)

    def format_vertex(self, u) -> str:
        return str(u)


# ---------------------------------------------------------------------------
# the Cayley tree


class TreeOracle(SpaceOracle):
    """Cayley tree of the free group of the given rank with unit edges."""

    def __init__(self, rank: int = 2):
        if rank < 1:
            raise ValueError("rank must be >= 1")
        self.rank = rank
        self.origin: Word = IDENTITY
        self.delta = Fraction(0)

    def __repr__(self):
        return f"TreeOracle(rank={self.rank})"

    @property
    def spec(self) -> str:
        return f"tree:{self.rank}"

    def vertex_key(self, u):
        return shortlex_key(u)

    def vertex_dist(self, u: Word, v: Word) -> int:
        return len(u) + len(v) - 2 * common_prefix(u, v)

    def vertex_path(self, u: Word, v: Word) -> list:
        k = common_prefix(u, v)
        down = [u[:i] for i in range(len(u), k - 1, -1)]
        up = [v[:i] for i in range(k + 1, len(v) + 1)]
        return down + up

    def act(self, g: Word, p):
        if is_mid(p):
            return self.mid(word_mul(g, p.u), word_mul(g, p.v))
        return word_mul(g, p)

    def format_vertex(self, u) -> str:
        return format_word(u)

    def scan_points(self, radius: int) -> list:
        """Vertices and edge midpoints within the given word radius of o."""
        verts = list(words_up_to(self.rank, radius))
        mids = [Mid(w[:-1], w) for w in verts if w]
        return verts + mids


# ---------------------------------------------------------------------------
# finite graphs


class GraphOracle(SpaceOracle):
    """Finite unit-edge graph; distances by breadth-first search.

    Vertices may be any hashable labels.  Without a group action this is only
    a metric oracle (``act`` raises).
    """

    def __init__(self, vertices: Sequence, edges: Iterable[tuple], origin=None,
                 delta: Fraction | None = None):
        self.vertices = list(vertices)
        self.index = {v: i for i, v in enumerate(self.vertices)}
        self.adj: list[list[int]] = [[] for _ in self.vertices]
        for u, v in edges:
            i, j = self.index[u], self.index[v]
            if i == j or j in self.adj[i]:
                continue
            self.adj[i].append(j)
            self.adj[j].append(i)
        self.origin = self.vertices[0] if origin is None else origin
        self.rank = 0
        self._bfs: dict[int, tuple[list[int], list[int]]] = {}
        if delta is None:
            delta = four_point_delta(self, self.scan_points())
        self.delta = Fraction(delta)

    def __repr__(self):
        return f"GraphOracle(vertices={len(self.vertices)}, delta={self.delta})"

    def vertex_key(self, u):
        return self.index[u]

    def _search(self, i: int) -> tuple[list[int], list[int]]:
        hit = self._bfs.get(i)
        if hit is not None:
            return hit
        n = len(self.vertices)
        dist = [-1] * n
        parent = [-1] * n
        dist[i] = 0
        queue = deque([i])
        while queue:
            x = queue.popleft()
            dx = dist[x] + 1
            for y in self.adj[x]:
                if dist[y] < 0:
                    dist[y] = dx
                    parent[y] = x
                    queue.append(y)
        self._bfs[i] = (dist, parent)
        return dist, parent

    def _idx(self, u) -> int:
        try:
            return self.index[u]
        except KeyError:
            raise OutOfDomainError(f"{self.format_vertex(u)} is not a vertex of {self!r}") from None

    def vertex_dist(self, u, v) -> int:
        d = self._search(self._idx(u))[0][self._idx(v)]
        if d < 0:
            raise OutOfDomainError("vertices lie in different components")
        return d

    def vertex_path(self, u, v) -> list:
        # walk BFS parents from v back to u, so the path is read in BFS order from u
        i, j = self._idx(u), self._idx(v)
        dist, parent = self._search(i)
        if dist[j] < 0:
            raise OutOfDomainError("vertices lie in different components")
        out = [j]
        while out[-1] != i:
            out.append(parent[out[-1]])
        return [self.vertices[k] for k in reversed(out)]

    def act(self, g, p):
        raise NotImplementedError("plain graph oracles carry no group action")

    def scan_points(self, radius=None) -> list:
        mids = [Mid(self.vertices[i], self.vertices[j]) for i, j in self.edges()]
        return list(self.vertices) + mids

    def edges(self) -> list[tuple[int, int]]:
        return [(i, j) for i, nbrs in enumerate(self.adj) for j in sorted(nbrs) if i < j]

    def to_edge_list(self) -> str:
        d = self.delta
        lines = [f"vertices {len(self.vertices)} delta {d.numerator}/{d.denominator}"]
        lines.extend(f"{i} {j}" for i, j in self.edges())
        return "\n".join(lines) + "\n"

    @classmethod
    def from_edge_list(cls, text: str) -> "GraphOracle":
        rows = [ln.strip() for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
        head = rows[0].split()
        if len(head) != 4 or head[0] != "vertices" or head[2] != "delta":
            raise ValueError(f"bad edge-list header: {rows[0]!r}")
        n = int(head[1])
        delta = Fraction(head[3])
        edges = []
        for ln in rows[1:]:
            a, b = ln.split()
            edges.append((int(a), int(b)))
        return cls(range(n), edges, origin=0, delta=delta)


class CayleyBallOracle(GraphOracle):
    """Ball in the Cayley graph of F_rank for a generating set enlarged by extra words.

    Distances between points within ``radius/2`` of the origin are the true
    Cayley-graph distances; everything else may be distorted by the boundary.
    """

    def __init__(self, rank: int, extra: Sequence[Word], radius: int, vertex_cap: int = 200_000):
        if rank < 1:
            raise ValueError("rank must be >= 1")
        for w in extra:
            if not w:
                raise ValueError("extra generators must be nontrivial")
        self.rank = rank
        self.extra = [tuple(w) for w in extra]
        self.radius = radius
        gens: list[Word] = [(x,) for x in letters_of_rank(rank)]
        for w in self.extra:
            for s in (w, word_inv(w)):
                if s not in gens:
                    gens.append(s)
        self.generators = gens
        level = {IDENTITY: 0}
        order = [IDENTITY]
        queue = deque([IDENTITY])
        edges = []
        while queue:
            u = queue.popleft()
            du = level[u]
            for s in gens:
                v = word_mul(u, s)
                if v not in level:
                    if du == radius:
                        continue
                    level[v] = du + 1
                    order.append(v)
                    queue.append(v)
                    if len(order) > vertex_cap:
                        raise ResourceError(
                            f"Cayley ball exceeds vertex cap {vertex_cap}; lower the radius"
                        )
                edges.append((u, v))
        self.level = level
        verts = sorted(order, key=shortlex_key)
        self.certified_radius = Fraction(radius, 2)
        self.certified = [v for v in verts if level[v] <= self.certified_radius]
        super().__init__(verts, edges, origin=IDENTITY, delta=Fraction(0))
        self.rank = rank
        # The group is transitive on vertices and on edges of each generator
        # type, so o and one midpoint per generator represent every base point.
        # s^-1 carries mid(o, s) to mid(s^-1, o), so one of s, s^-1 suffices.
        reps: list = [IDENTITY]
        for s in gens:
            if word_inv(s) not in [m.v for m in reps[1:]]:
                reps.append(self.mid(IDENTITY, s))
        self.delta_bases = reps
        self.delta = four_point_delta(self, self.scan_points(), reps)

    def __repr__(self):
        ex = ",".join(format_word(w) for w in self.extra) or "-"
        return f"CayleyBallOracle(rank={self.rank}, extra={ex}, radius={self.radius})"

    @property
    def spec(self) -> str:
        ex = ",".join(format_word(w) for w in self.extra) or "-"
        return f"cayley:{self.rank}:{ex}:{self.radius}"

    @property
    def caveats(self) -> str:
        return (
            f"distances certified only within radius {self.certified_radius} of the origin; "
            f"delta is the four-point constant of the {len(self.certified)} certified vertices"
        )

    def vertex_key(self, u):
        return shortlex_key(u)

    def format_vertex(self, u) -> str:
        return format_word(u)

    def act(self, g: Word, p):
        if is_mid(p):
            q = self.mid(word_mul(g, p.u), word_mul(g, p.v))
            self._idx(q.u), self._idx(q.v)
            return q
        q = word_mul(g, p)
        self._idx(q)
        return q

    def require_certified(self, points: Iterable) -> None:
        for p in points:
            if is_mid(p):
                ok = p.u in self.level and p.v in self.level and self.norm(p) <= self.certified_radius
            else:
                ok = p in self.level and self.level[p] <= self.certified_radius
            if not ok:
                raise OutOfDomainError(
                    f"point {self.format_point(p)} lies outside the certified region "
                    f"(radius {self.certified_radius}) of {self!r}"
                )

    def scan_points(self, radius=None) -> list:
        """Certified vertices plus midpoints of edges between them."""
        cert = set(self.certified)
        mids = []
        for u in self.certified:
            for j in self.adj[self.index[u]]:
                v = self.vertices[j]
                if v in cert and shortlex_key(u) < shortlex_key(v):
                    mids.append(Mid(u, v))
        return list(self.certified) + mids


def build_cayley_ball(rank: int, extra_generators: Sequence[Word], radius: int,
                      vertex_cap: int = 200_000) -> CayleyBallOracle:
    return CayleyBallOracle(rank, extra_generators, radius, vertex_cap=vertex_cap)


def parse_oracle(spec: str):
    """``tree:<rank>`` or ``cayley:<rank>:<extra words, comma separated or ->:<radius>``."""
    parts = spec.strip().split(":")
    kind = parts[0]
    if kind == "tree":
        return TreeOracle(int(parts[1]) if len(parts) > 1 else 2)
    if kind == "cayley":
        if len(parts) != 4:
            raise ValueError(f"expected cayley:<rank>:<extra>:<radius>, got {spec!r}")
        rank = int(parts[1])
        extra = [] if parts[2] in ("", "-") else [parse_word(w, rank) for w in parts[2].split(",")]
        return build_cayley_ball(rank, extra, int(parts[3]))
    raise ValueError(f"unknown oracle kind {kind!r}")


# ---------------------------------------------------------------------------
# metric operations


def gromov_product(oracle: SpaceOracle, p, q, base) -> Fraction:
    return (oracle.dist(p, base) + oracle.dist(q, base) - oracle.dist(p, q)) / 2


class FourPointResult(NamedTuple):
    delta: Fraction
    witness: tuple | None  # (w, x, y, z) attaining the maximum
    degenerate: bool


def four_point_scan(oracle: SpaceOracle, points: Iterable, bases: Iterable | None = None) -> FourPointResult:
    """Largest four-point defect min(<x,y>_w, <y,z>_w) - <x,z>_w, clamped at 0.

    ``w`` ranges over ``bases`` (default: the points themselves); x, y, z over
    the points.
    """
    pts = list(dict.fromkeys(points))
    n = len(pts)
    if n < 4:
        return FourPointResult(Fraction(0), None, True)
    base_list = pts if bases is None else list(dict.fromkeys(bases))
    # doubled distances keep everything integral
    D = np.empty((n, n), dtype=np.int64)
    for i in range(n):
        D[i, i] = 0
        for j in range(i + 1, n):
            D[i, j] = D[j, i] = int(2 * oracle.dist(pts[i], pts[j]))
    best = 0
    arg = None
    chunk = max(1, 4_000_000 // (n * n))
    for w in base_list:
        col = np.array([int(2 * oracle.dist(p, w)) for p in pts], dtype=np.int64)
        # Q[x, y] = 4 <x, y>_w
        Q = col[:, None] + col[None, :] - D
        for lo in range(0, n, chunk):
            blk = Q[lo:lo + chunk]
            # defect[x, y, z] = min(Q[x,y], Q[y,z]) - Q[x,z]
            defect = np.minimum(blk[:, :, None], Q[None, :, :]) - blk[:, None, :]
            m = int(defect.max())
            if m > best:
                best = m
                x, y, z = np.unravel_index(int(defect.argmax()), defect.shape)
                arg = (w, pts[lo + x], pts[y], pts[z])
    return FourPointResult(Fraction(best, 4), arg, False)


def four_point_delta(oracle: SpaceOracle, points: Iterable, bases: Iterable | None = None) -> Fraction:
    return four_point_scan(oracle, points, bases).delta


def min_displacement(oracle: SpaceOracle, group_ball_radius: int, points: Iterable | None = None) -> Fraction:
    """Smallest d(g.p, p) over nontrivial g with |g| <= radius and sampled points p.

    Exact for the tree (witness g = a, p = o); for graph oracles it is the
    minimum over the certified vertices, hence an upper bound on the infimum.
    """
    if points is None:
        if isinstance(oracle, CayleyBallOracle):
            points = oracle.certified
        else:
            points = [oracle.origin]
    points = list(points)
    best = None
    for g in words_up_to(oracle.rank, group_ball_radius):
        if not g:
            continue
        for p in points:
            try:
                gp = oracle.act(g, p)
                d = oracle.dist(gp, p)
            except OutOfDomainError:
                continue
            if best is None or d < best:
                best = d
    if best is None:
        raise ValueError("no nontrivial group element acts on the sampled points")
    return best


@dataclass(frozen=True)
class CenterResult:
    center: Hashable
    radius_bound: Fraction
    diameter: Fraction
    pair: tuple


def eps_center(oracle: SpaceOracle, X: Iterable) -> CenterResult:
    """Midpoint of the lexicographically first diameter-realizing pair."""
    pts = sorted(set(X), key=oracle.point_key)
    if not pts:
        raise ValueError("eps_center of an empty set")
    best = Fraction(-1)
    pair = (pts[0], pts[0])
    for i, a in enumerate(pts):
        for b in pts[i:]:
            d = oracle.dist(a, b)
            if d > best:
                best, pair = d, (a, b)
    c = oracle.point_along(pair[0], pair[1], best / 2)
    return CenterResult(c, best / 2 + oracle.delta, best, pair)


def diameter(oracle: SpaceOracle, X: Sequence) -> Fraction:
    pts = list(X)
    return max(
        (oracle.dist(a, b) for a, b in itertools.combinations(pts, 2)),
        default=Fraction(0),
    )


@dataclass(frozen=True)
class HypothesisReport:
    n: int
    delta: Fraction
    displacement_lower_bound: Fraction
    threshold: Fraction
    satisfied: bool
    caveats: str = ""

    def as_dict(self) -> dict:
        return {
            "n": self.n,
            "delta": str(self.delta),
            "displacement_lower_bound": str(self.displacement_lower_bound),
            "threshold": str(self.threshold),
            "satisfied": self.satisfied,
            "caveats": self.caveats,
        }


def check_hypothesis(oracle: SpaceOracle, n: int, displacement: Fraction | None = None) -> HypothesisReport:
    if n < 1:
        raise ValueError("n must be >= 1")
    if displacement is None:
        # a free group acts on its Cayley graphs without fixed points or edge
        # inversions, so every nontrivial element moves every point by >= 1
        displacement = min_displacement(oracle, 1)
    threshold = (2 * n + 11) ** 2 * oracle.delta
    caveats = getattr(oracle, "caveats", "") if not isinstance(oracle, TreeOracle) else ""
    return HypothesisReport(n, oracle.delta, Fraction(displacement), threshold,
                            Fraction(displacement) > threshold, caveats)
