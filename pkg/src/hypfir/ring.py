"""Exact arithmetic in K[F] for a free group F.

Elements are immutable maps from reduced words to nonzero scalars of a fixed
:class:`~hypfir.scalars.Domain`.  Multiplication is the convolution
``(a*x)(g) = sum_{uv=g} a(u) x(v)``; modules are left modules throughout.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, NamedTuple, Sequence

from .scalars import QQ, Domain, DomainError
from .spaces import TreeOracle
from .words import (
    IDENTITY,
    Word,
    format_word,
    shortlex_key,
    word_inv,
    word_mul,
)

NEG_INF = float("-inf")


class DomainMismatch(ValueError):
    pass


class ElementParseError(ValueError):
    def __init__(self, message: str, offset: int):
        self.offset = offset
        super().__init__(f"{message} at offset {offset}")


class RingElement:
    __slots__ = ("domain", "terms", "_hash")

    def __init__(self, domain: Domain, terms: Mapping[Word, object] | None = None):
        self.domain = domain
        clean = {}
        if terms:
            for w, c in terms.items():
                if c != 0:
                    clean[tuple(w)] = c
        self.terms: dict[Word, object] = clean
        self._hash = None

    @classmethod
    def _raw(cls, domain: Domain, terms: dict) -> "RingElement":
        # terms already pruned and normalized
        obj = cls.__new__(cls)
        obj.domain = domain
        obj.terms = terms
        obj._hash = None
        return obj

    # -- constructors ---------------------------------------------------
    @classmethod
    def zero(cls, domain: Domain) -> "RingElement":
        return cls._raw(domain, {})

    @classmethod
    def one(cls, domain: Domain) -> "RingElement":
        return cls._raw(domain, {IDENTITY: domain.one})

    @classmethod
    def monomial(cls, domain: Domain, word: Word = IDENTITY, coeff=1) -> "RingElement":
        return cls(domain, {tuple(word): domain.convert(coeff)})

    @classmethod
    def parse(cls, text: str, domain: Domain = QQ, rank: int | None = None) -> "RingElement":
        return parse_element(text, domain, rank)

    # -- basic protocol -------------------------------------------------
    def __bool__(self):
        return bool(self.terms)

    def is_zero(self) -> bool:
        return not self.terms

    def __eq__(self, other):
        if not isinstance(other, RingElement):
            return NotImplemented
        return self.domain == other.domain and self.terms == other.terms

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.domain.name, frozenset(self.terms.items())))
        return self._hash

    def __repr__(self):
        return f"RingElement({self.domain.name}, {format_element(self)!r})"

    def __str__(self):
        return format_element(self)

    def __len__(self):
        return len(self.terms)

    def support(self) -> list[Word]:
        return sorted(self.terms, key=shortlex_key)

    def coeff(self, w: Word):
        return self.terms.get(tuple(w), self.domain.zero)

    def _check(self, other: "RingElement"):
        if self.domain != other.domain:
            raise DomainMismatch(f"cannot combine {self.domain} and {other.domain} elements")

    # -- arithmetic -----------------------------------------------------
    def __add__(self, other: "RingElement") -> "RingElement":
        self._check(other)
        dom = self.domain
        out = dict(self.terms)
        for w, c in other.terms.items():
            s = dom.add(out.get(w, 0), c) if w in out else c
            if s == 0:
                out.pop(w, None)
            else:
                out[w] = s
        return RingElement._raw(dom, out)

    def __neg__(self) -> "RingElement":
        dom = self.domain
        return RingElement._raw(dom, {w: dom.neg(c) for w, c in self.terms.items()})

    def __sub__(self, other: "RingElement") -> "RingElement":
        return self + (-other)

    def __mul__(self, other) -> "RingElement":
        if not isinstance(other, RingElement):
            return self.scale(other)
        self._check(other)
        dom = self.domain
        out: dict[Word, object] = {}
        add, mul = dom.add, dom.mul
        for u, a in self.terms.items():
            for v, b in other.terms.items():
                w = word_mul(u, v)
                c = mul(a, b)
                if w in out:
                    s = add(out[w], c)
                    if s == 0:
                        del out[w]
                    else:
                        out[w] = s
                else:
                    out[w] = c
        return RingElement._raw(dom, out)

    def __rmul__(self, scalar) -> "RingElement":
        return self.scale(scalar)

    def scale(self, scalar) -> "RingElement":
        dom = self.domain
        s = dom.convert(scalar) if not _native(dom, scalar) else scalar
        if s == 0:
            return RingElement.zero(dom)
        return RingElement._raw(dom, {w: dom.mul(s, c) for w, c in self.terms.items()})

    def translate(self, g: Word) -> "RingElement":
        """Left translation g*self."""
        return RingElement._raw(self.domain, {word_mul(g, w): c for w, c in self.terms.items()})

    def rtranslate(self, g: Word) -> "RingElement":
        return RingElement._raw(self.domain, {word_mul(w, g): c for w, c in self.terms.items()})

    def to_domain(self, domain: Domain) -> "RingElement":
        return RingElement(domain, {w: domain.convert(c) for w, c in self.terms.items()})

    def word_length(self):
        """|xi| for the word-length filtration (the tree oracle's absolute value)."""
        return max((len(w) for w in self.terms), default=NEG_INF)


def _native(dom: Domain, x) -> bool:
    if dom.name.startswith("fp"):
        return isinstance(x, int) and 0 <= x < dom.p
    if dom.name == "q":
        return isinstance(x, Fraction)
    return isinstance(x, int)


def ring_add(x: RingElement, y: RingElement) -> RingElement:
    return x + y


def ring_mul(a: RingElement, x: RingElement) -> RingElement:
    return a * x


def monomial(domain: Domain, word: Word = IDENTITY, coeff=1) -> RingElement:
    return RingElement.monomial(domain, word, coeff)


def element_sum(items: Iterable[RingElement], domain: Domain) -> RingElement:
    total = RingElement.zero(domain)
    for x in items:
        total = total + x
    return total


# ---------------------------------------------------------------------------
# geometry of elements


class Measure(NamedTuple):
    abs: object  # Fraction or NEG_INF
    diam: object
    support: tuple


def measure(xi: RingElement, oracle) -> Measure:
    """Absolute value, diameter and geometric support {g.o}."""
    if xi.is_zero():
        return Measure(NEG_INF, NEG_INF, ())
    pts = tuple(xi.support())
    oracle.require_certified(pts)
    return Measure(max(oracle.norm(p) for p in pts), set_diameter(oracle, pts), pts)


def abs_value(xi: RingElement, oracle):
    if xi.is_zero():
        return NEG_INF
    pts = list(xi.terms)
    oracle.require_certified(pts)
    return max(oracle.norm(p) for p in pts)


def diam(xi: RingElement, oracle):
    if xi.is_zero():
        return NEG_INF
    pts = list(xi.terms)
    oracle.require_certified(pts)
    return set_diameter(oracle, pts)


def set_diameter(oracle, pts: Sequence) -> Fraction:
    pts = list(pts)
    if len(pts) < 2:
        return Fraction(0)
    if isinstance(oracle, TreeOracle):
        # double sweep is exact on trees
        far = max(pts, key=lambda q: (oracle.dist(pts[0], q), oracle.point_key(q)))
        return max(oracle.dist(far, q) for q in pts)
    return max(oracle.dist(a, b) for a, b in itertools.combinations(pts, 2))


def is_unit(xi: RingElement):
    """(lambda, g) when xi = lambda*g, else None.

    Relies on the trivial-units theorem: under the displacement hypothesis every
    unit of K[G] is a scalar times a group element, so elements of positive
    diameter are never units.
    """
    if not xi.domain.is_field:
        raise DomainError("is_unit is only supported over fields; over Z the units are +-g")
    if len(xi.terms) != 1:
        return None
    (g, c), = xi.terms.items()
    return c, g


@dataclass(frozen=True)
class ColorKey:
    rep: RingElement
    translator: Word
    scale: object

    def key(self):
        return _canon_key(self.rep)


def _canon_key(x: RingElement):
    return tuple((shortlex_key(w), x.terms[w]) for w in x.support())


def color_key(xi: RingElement) -> ColorKey:
    """Canonical representative of the orbit of xi under trivial units.

    Every support word s gives a candidate c_s^{-1} s^{-1} xi (coefficient 1 at
    the identity); the shortlex-least candidate is taken, which makes the key
    invariant under xi -> lambda*g*xi.  Then xi = scale * translator * rep.
    """
    if xi.is_zero():
        raise ValueError("the zero element has no color")
    dom = xi.domain
    if not dom.is_field:
        raise DomainError("colors are defined over fields")
    best = None
    for s in xi.support():
        c = xi.terms[s]
        cand = xi.translate(word_inv(s)).scale(dom.inv(c))
        k = _canon_key(cand)
        if best is None or k < best[0]:
            best = (k, cand, s, c)
    _, rep, s, c = best
    return ColorKey(rep, s, c)


def same_color(x: RingElement, y: RingElement):
    """(lambda, g) with y = lambda*g*x, or None."""
    if x.is_zero() or y.is_zero() or len(x) != len(y):
        return None
    kx, ky = color_key(x), color_key(y)
    if kx.rep != ky.rep:
        return None
    dom = x.domain
    # y = sy ty rep, x = sx tx rep  =>  y = (sy/sx) ty tx^-1 x
    lam = dom.div(ky.scale, kx.scale)
    g = word_mul(ky.translator, word_inv(kx.translator))
    return lam, g


# ---------------------------------------------------------------------------
# text format


def _word_from_letters(s: str, start: int, rank: int | None) -> Word:
    out: list[int] = []
    for k, ch in enumerate(s):
        gen = ord(ch.lower()) - ord("a") + 1
        if rank is not None and gen > rank:
            raise ElementParseError(f"unknown generator {ch!r} for rank {rank}", start + k)
        x = -gen if ch.isupper() else gen
        if out and out[-1] == -x:
            out.pop()
        else:
            out.append(x)
    return tuple(out)


class _Parser:
    def __init__(self, text: str, domain: Domain, rank: int | None):
        self.s = text
        self.i = 0
        self.domain = domain
        self.rank = rank

    def ws(self):
        while self.i < len(self.s) and self.s[self.i].isspace():
            self.i += 1

    def peek(self):
        return self.s[self.i] if self.i < len(self.s) else ""

    def integer(self) -> int | None:
        j = self.i
        while self.i < len(self.s) and self.s[self.i].isdigit():
            self.i += 1
        if j == self.i:
            return None
        return int(self.s[j:self.i])

    def term(self):
        self.ws()
        start = self.i
        ch = self.peek()
        if not ch:
            raise ElementParseError("expected a term", self.i)
        scalar = None
        if ch.isdigit():
            num = self.integer()
            den = 1
            if self.peek() == "/":
                self.i += 1
                d = self.integer()
                if d is None:
                    raise ElementParseError("expected a denominator", self.i)
                if d == 0:
                    raise ElementParseError("zero denominator", self.i)
                den = d
            scalar = Fraction(num, den)
            self.ws()
            if self.peek() == "*":
                self.i += 1
                self.ws()
            else:
                # bare scalar: a constant term
                return scalar, IDENTITY
        j = self.i
        while self.i < len(self.s) and self.s[self.i].isascii() and self.s[self.i].isalpha():
            self.i += 1
        if j == self.i:
            if self.peek() == "1":
                self.i += 1
                word = IDENTITY
            else:
                raise ElementParseError("expected a word", self.i if scalar is not None else start)
        else:
            word = _word_from_letters(self.s[j:self.i], j, self.rank)
        return (Fraction(1) if scalar is None else scalar), word

    def element(self) -> RingElement:
        dom = self.domain
        terms: dict[Word, object] = {}
        self.ws()
        sign = 1
        if self.peek() in "+-" and self.peek():
            sign = -1 if self.peek() == "-" else 1
            self.i += 1
        while True:
            c, w = self.term()
            try:
                val = dom.convert(sign * c)
            except DomainError as exc:
                raise ElementParseError(str(exc), self.i) from None
            terms[w] = dom.add(terms.get(w, dom.zero), val)
            self.ws()
            ch = self.peek()
            if not ch:
                break
            if ch not in "+-":
                raise ElementParseError(f"unexpected character {ch!r}", self.i)
            sign = -1 if ch == "-" else 1
            self.i += 1
        return RingElement(dom, terms)


def parse_element(text: str, domain: Domain = QQ, rank: int | None = None) -> RingElement:
    """Parse ``1+a``, ``2/3*ab - A``, ``1+a+b+ba`` (uppercase letters are inverses)."""
    if not text.strip():
        raise ElementParseError("empty element", 0)
    if text.strip() == "0":
        return RingElement.zero(domain)
    return _Parser(text, domain, rank).element()


def _fmt_term(dom: Domain, c, w: Word, first: bool) -> str:
    neg = False
    if dom.name in ("q", "z") and c < 0:
        neg, c = True, -c
    word = format_word(w)
    if not w:
        body = dom.fmt(c)
    elif c == 1:
        body = word
    else:
        body = f"{dom.fmt(c)}*{word}"
    if first:
        return ("-" if neg else "") + body
    return ("-" if neg else "+") + body


def format_element(x: RingElement) -> str:
    if x.is_zero():
        return "0"
    dom = x.domain
    return "".join(_fmt_term(dom, x.terms[w], w, k == 0) for k, w in enumerate(x.support()))


# vectors -----------------------------------------------------------------


def parse_vector(text: str, domain: Domain = QQ, rank: int | None = None) -> tuple[RingElement, ...]:
    s = text.strip()
    if not (s.startswith("(") and s.endswith(")")):
        raise ElementParseError("vectors are written (elem; elem; ...)", 0)
    body = s[1:-1]
    if not body.strip():
        return ()
    return tuple(parse_element(part, domain, rank) for part in body.split(";"))


def format_vector(v: Sequence[RingElement]) -> str:
    return "(" + "; ".join(format_element(x) for x in v) + ")"
