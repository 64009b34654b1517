"""Coefficient domains: F_p, the rationals and the integers.

Scalars are plain Python values (``int`` residues, ``Fraction``, ``int``);
the domain object carries the arithmetic so the hot loops stay cheap.
"""

from __future__ import annotations

from fractions import Fraction


class DomainError(ValueError):
    pass


def is_prime(p: int) -> bool:
    if p < 2:
        return False
    if p % 2 == 0:
        return p == 2
    f = 3
    while f * f <= p:
        if p % f == 0:
            return False
        f += 2
    return True


class Domain:
    name: str
    is_field: bool = True

    def __eq__(self, other):
        return type(self) is type(other) and self.name == other.name

    def __hash__(self):
        return hash(self.name)

    def __repr__(self):
        return self.name

    zero = 0
    one = 1

    def add(self, x, y):
        raise NotImplementedError

    def mul(self, x, y):
        raise NotImplementedError

    def neg(self, x):
        raise NotImplementedError

    def inv(self, x):
        raise NotImplementedError

    def convert(self, x):
        """Coerce an int or Fraction into the domain."""
        raise NotImplementedError

    def fmt(self, x) -> str:
        return str(x)

    def sub(self, x, y):
        return self.add(x, self.neg(y))

    def div(self, x, y):
        return self.mul(x, self.inv(y))

    def is_one(self, x) -> bool:
        return x == self.one

    def is_minus_one(self, x) -> bool:
        return x == self.neg(self.one)


class PrimeField(Domain):
    def __init__(self, p: int):
        if not is_prime(p):
            raise DomainError(f"{p} is not prime")
        if p >= 2**31:
            raise DomainError("primes must be below 2**31")
        self.p = p
        self.name = f"fp:{p}"

    def add(self, x, y):
        return (x + y) % self.p

    def mul(self, x, y):
        return (x * y) % self.p

    def neg(self, x):
        return (-x) % self.p

    def inv(self, x):
        if x % self.p == 0:
            raise ZeroDivisionError(f"0 has no inverse in F_{self.p}")
        return pow(x, -1, self.p)

    def convert(self, x):
        x = Fraction(x)
        if x.denominator % self.p == 0:
            raise DomainError(f"denominator {x.denominator} is not invertible mod {self.p}")
        return (x.numerator * pow(x.denominator, -1, self.p)) % self.p

    def is_minus_one(self, x) -> bool:
        return x == self.p - 1


class Rationals(Domain):
    name = "q"
    zero = Fraction(0)
    one = Fraction(1)

    def add(self, x, y):
        return x + y

    def mul(self, x, y):
        return x * y

    def neg(self, x):
        return -x

    def inv(self, x):
        if x == 0:
            raise ZeroDivisionError("0 has no inverse")
        return Fraction(1) / x

    def convert(self, x):
        return Fraction(x)


class Integers(Domain):
    name = "z"
    is_field = False

    def add(self, x, y):
        return x + y

    def mul(self, x, y):
        return x * y

    def neg(self, x):
        return -x

    def inv(self, x):
        if x in (1, -1):
            return x
        raise DomainError(f"{x} is not a unit in Z")

    def convert(self, x):
        x = Fraction(x)
        if x.denominator != 1:
            raise DomainError(f"{x} is not an integer")
        return x.numerator


QQ = Rationals()
ZZ = Integers()


def GF(p: int) -> PrimeField:
    return PrimeField(p)


def parse_domain(text: str) -> Domain:
    t = text.strip().lower()
    if t in ("q", "qq", "rationals"):
        return QQ
    if t in ("z", "zz", "integers"):
        return ZZ
    if t.startswith("fp:"):
        return PrimeField(int(t[3:]))
    if t.startswith("f") and t[1:].isdigit():
        return PrimeField(int(t[1:]))
    raise DomainError(f"unknown coefficient domain {text!r}")
