"""Incremental sparse elimination over a field and over Z.

Vectors are dicts ``key -> scalar`` with no zero entries.  Each stored row
keeps its combination in terms of the inserted columns, so a column that
reduces to zero hands back an explicit dependence.  Rows are kept with
pairwise distinct leading keys (the least key in a fixed order), which is
all that is needed for both membership and dependence tests.
"""

from __future__ import annotations

from typing import Callable, Hashable

from .scalars import Domain


def _lead(vec: dict, order: Callable) -> Hashable:
    return min(vec, key=order)


def _axpy(dom: Domain, y: dict, a, x: dict) -> None:
    # y += a*x in place
    add, mul = dom.add, dom.mul
    for k, v in x.items():
        s = add(y[k], mul(a, v)) if k in y else mul(a, v)
        if s == 0:
            y.pop(k, None)
        else:
            y[k] = s


class FieldEliminator:
    def __init__(self, domain: Domain, order: Callable = lambda k: k):
        if not domain.is_field:
            raise ValueError("FieldEliminator needs a field")
        self.dom = domain
        self.order = order
        self.rows: dict[Hashable, tuple[dict, dict]] = {}

    def __len__(self):
        return len(self.rows)

    def _reduce(self, vec: dict, combo: dict) -> tuple[dict, dict]:
        dom = self.dom
        while vec:
            k = _lead(vec, self.order)
            hit = self.rows.get(k)
            if hit is None:
                break
            row, rcombo = hit
            f = dom.neg(dom.div(vec[k], row[k]))
            _axpy(dom, vec, f, row)
            _axpy(dom, combo, f, rcombo)
        return vec, combo

    def insert(self, vec: dict, label: Hashable) -> dict | None:
        """Add a column; return its dependence (label -> coeff, 1 at ``label``) or None."""
        vec, combo = self._reduce(dict(vec), {label: self.dom.one})
        if not vec:
            return combo
        self.rows[_lead(vec, self.order)] = (vec, combo)
        return None

    def solve(self, target: dict) -> dict | None:
        """Coefficients c with sum c[label]*column = target, or None."""
        vec, combo = self._reduce(dict(target), {})
        if vec:
            return None
        dom = self.dom
        return {k: dom.neg(v) for k, v in combo.items()}


def xgcd(a: int, b: int) -> tuple[int, int, int]:
    """(g, s, t) with s*a + t*b = g = gcd(a, b) >= 0."""
    s0, s1, t0, t1 = 1, 0, 0, 1
    while b:
        q, r = divmod(a, b)
        a, b = b, r
        s0, s1 = s1, s0 - q * s1
        t0, t1 = t1, t0 - q * t1
    if a < 0:
        a, s0, t0 = -a, -s0, -t0
    return a, s0, t0


def _zaxpy(y: dict, a: int, x: dict) -> None:
    for k, v in x.items():
        s = y.get(k, 0) + a * v
        if s:
            y[k] = s
        else:
            y.pop(k, None)


def _zcomb(a: int, x: dict, b: int, y: dict) -> dict:
    out = {k: a * v for k, v in x.items()} if a else {}
    if b:
        _zaxpy(out, b, y)
    return {k: v for k, v in out.items() if v}


class IntegerEliminator:
    """Echelon basis of a Z-lattice, maintained by extended-gcd row merges."""

    def __init__(self, order: Callable = lambda k: k):
        self.order = order
        self.rows: dict[Hashable, tuple[dict, dict]] = {}

    def insert(self, vec: dict, label: Hashable) -> None:
        vec, combo = dict(vec), {label: 1}
        while vec:
            k = _lead(vec, self.order)
            hit = self.rows.get(k)
            if hit is None:
                self.rows[k] = (vec, combo)
                return
            row, rcombo = hit
            a, c = vec[k], row[k]
            if a % c == 0:
                q = a // c
                _zaxpy(vec, -q, row)
                _zaxpy(combo, -q, rcombo)
                continue
            g, s, t = xgcd(c, a)
            new_row = _zcomb(s, row, t, vec)
            new_combo = _zcomb(s, rcombo, t, combo)
            vec = _zcomb(c // g, vec, -(a // g), row)
            combo = _zcomb(c // g, combo, -(a // g), rcombo)
            self.rows[k] = (new_row, new_combo)

    def solve(self, target: dict) -> dict | None:
        vec, combo = dict(target), {}
        while vec:
            k = _lead(vec, self.order)
            hit = self.rows.get(k)
            if hit is None:
                return None
            row, rcombo = hit
            if vec[k] % row[k]:
                return None
            q = vec[k] // row[k]
            _zaxpy(vec, -q, row)
            _zaxpy(combo, q, rcombo)
        return combo
