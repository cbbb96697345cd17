"""Deterministic enumeration of the requirements (p, q, r) defeated one per stage.

Rational pairs are listed by *level*: level D holds every pair p = a/D < q = b/D
with -D < a < b < 2D whose least common denominator is exactly D, i.e.
gcd(a, b, D) = 1, in lexicographic order of (a, b).  Concatenating levels
D = 1, 2, 3, ... lists every rational pair inside (-1, 2) exactly once.

Ratios form the ladder r = 1 - 1/j, j >= 2.  Requirement m is obtained from
the Cantor pairing m = (x + y)(x + y + 1)/2 + y, with x the pair index and
y = j - 2.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import gcd, isqrt

from ..numerics import format_rational, parse_rational, rat


@dataclass(frozen=True)
class Requirement:
    p: Fraction
    q: Fraction
    r: Fraction

    def __post_init__(self):
        for name in ("p", "q", "r"):
            object.__setattr__(self, name, rat(getattr(self, name)))
        if not self.p < self.q:
            raise ValueError(f"requirement needs p < q, got ({self.p}, {self.q})")
        if not 0 < self.r < 1:
            raise ValueError(f"requirement ratio must lie in (0, 1), got {self.r}")

    def to_json(self) -> dict:
        return {"p": format_rational(self.p), "q": format_rational(self.q), "r": format_rational(self.r)}

    @classmethod
    def from_json(cls, data: dict) -> "Requirement":
        return cls(parse_rational(data["p"]), parse_rational(data["q"]), parse_rational(data["r"]))


_levels: list[list[tuple[int, int]]] = [[]]  # index 0 unused
_offsets: list[int] = [0, 0]  # _offsets[D] = number of pairs on levels < D
_positions: dict[tuple[int, int, int], int] = {}


def _level(D: int) -> list[tuple[int, int]]:
    while len(_levels) <= D:
        L = len(_levels)
        pairs = [
            (a, b)
            for a in range(-L + 1, 2 * L)
            for b in range(a + 1, 2 * L)
            if gcd(gcd(a, b), L) == 1
        ]
        for pos, (a, b) in enumerate(pairs):
            _positions[(L, a, b)] = pos
        _levels.append(pairs)
        _offsets.append(_offsets[-1] + len(pairs))
    return _levels[D]


def rational_pair(index: int) -> tuple[Fraction, Fraction]:
    """The index-th pair p < q in (-1, 2) under the level ordering."""
    if index < 0:
        raise ValueError("pair index must be nonnegative")
    D = 1
    while True:
        level = _level(D)
        if index < _offsets[D] + len(level):
            a, b = level[index - _offsets[D]]
            return Fraction(a, D), Fraction(b, D)
        D += 1


def pair_index(p, q) -> int:
    p, q = rat(p), rat(q)
    if not (-1 < p < q < 2):
        raise ValueError(f"({p}, {q}) is not an ordered pair inside (-1, 2)")
    D = p.denominator * q.denominator // gcd(p.denominator, q.denominator)
    _level(D)
    return _offsets[D] + _positions[(D, int(p * D), int(q * D))]


def cantor_pair(x: int, y: int) -> int:
    return (x + y) * (x + y + 1) // 2 + y


def cantor_unpair(m: int) -> tuple[int, int]:
    w = (isqrt(8 * m + 1) - 1) // 2
    y = m - w * (w + 1) // 2
    return w - y, y


def enumerate_requirements(m: int) -> Requirement:
    if m < 0:
        raise ValueError("requirement index must be nonnegative")
    x, y = cantor_unpair(m)
    p, q = rational_pair(x)
    return Requirement(p, q, 1 - Fraction(1, y + 2))


def requirement_index(req: Requirement) -> int:
    """Inverse of :func:`enumerate_requirements`."""
    j = 1 / (1 - req.r)
    if j.denominator != 1 or j < 2:
        raise ValueError(f"ratio {req.r} is not on the ladder 1 - 1/j")
    return cantor_pair(pair_index(req.p, req.q), int(j) - 2)
