"""Free-group words.

A word is a plain tuple of nonzero ints: ``i`` stands for the i-th generator
(``1 -> a``, ``2 -> b``, ...) and ``-i`` for its inverse.  Words handed out by
this module are always freely reduced; the empty tuple is the identity and
also the basepoint of the Cayley tree.
"""

from __future__ import annotations

import re
from typing import Iterable, Iterator

Word = tuple[int, ...]

IDENTITY: Word = ()

_SUPERSCRIPT_INV = re.compile(r"(\^-1|⁻¹|\^\{-1\})")


class WordParseError(ValueError):
    def __init__(self, message: str, offset: int | None = None):
        self.offset = offset
        if offset is not None:
            message = f"{message} (offset {offset})"
        super().__init__(message)


def reduce_word(letters: Iterable[int]) -> Word:
    out: list[int] = []
    for x in letters:
        if x == 0:
            raise WordParseError("letter 0 is not a generator")
        if out and out[-1] == -x:
            out.pop()
        else:
            out.append(x)
    return tuple(out)


def word_mul(u: Word, v: Word) -> Word:
    # cancel only at the junction; both inputs are reduced
    k = 0
    n = min(len(u), len(v))
    while k < n and u[len(u) - 1 - k] == -v[k]:
        k += 1
    if k:
        return u[: len(u) - k] + v[k:]
    return u + v


def word_inv(u: Word) -> Word:
    return tuple(-x for x in reversed(u))


def word_len(u: Word) -> int:
    return len(u)


def common_prefix(u: Word, v: Word) -> int:
    n = min(len(u), len(v))
    k = 0
    while k < n and u[k] == v[k]:
        k += 1
    return k


def letter_key(x: int) -> tuple[int, int]:
    # alphabet order a < A < b < B < ...
    return (abs(x), 1 if x < 0 else 0)


def shortlex_key(u: Word) -> tuple:
    return (len(u), tuple(letter_key(x) for x in u))


def letters_of_rank(rank: int) -> list[int]:
    out = []
    for i in range(1, rank + 1):
        out.extend((i, -i))
    return out


def words_up_to(rank: int, radius: int) -> Iterator[Word]:
    """All reduced words of length <= radius, in shortlex order."""
    level: list[Word] = [IDENTITY]
    letters = letters_of_rank(rank)
    for length in range(radius + 1):
        yield from level
        if length == radius:
            break
        nxt = []
        for w in level:
            for x in letters:
                if w and w[-1] == -x:
                    continue
                nxt.append(w + (x,))
        level = nxt


def format_word(u: Word) -> str:
    if not u:
        return "1"
    return "".join(chr(ord("a") + x - 1) if x > 0 else chr(ord("A") - x - 1) for x in u)


def parse_word(text: str, rank: int | None = None) -> Word:
    """Parse ``"ab"``, ``"aB"``, ``"a b⁻¹ a"``, ``"1"`` or ``"ε"`` into a reduced word.

    Uppercase letters and a trailing ``⁻¹`` / ``^-1`` both denote inverses.
    """
    s = text.strip()
    if s in ("", "1", "ε", "e"):
        return IDENTITY
    letters: list[int] = []
    i = 0
    while i < len(s):
        ch = s[i]
        if ch.isspace() or ch == "·" or ch == "*":
            i += 1
            continue
        if not ("a" <= ch.lower() <= "z") or not ch.isascii():
            raise WordParseError(f"unknown generator symbol {ch!r}", i)
        gen = ord(ch.lower()) - ord("a") + 1
        if rank is not None and gen > rank:
            raise WordParseError(f"generator {ch!r} outside alphabet of rank {rank}", i)
        sign = -1 if ch.isupper() else 1
        i += 1
        m = _SUPERSCRIPT_INV.match(s, i)
        if m:
            sign = -sign
            i = m.end()
        letters.append(sign * gen)
    return reduce_word(letters)


def max_generator(u: Word) -> int:
    return max((abs(x) for x in u), default=0)
