"""Exact rational arithmetic and metric geometry of finite point sets on the line.

Every scalar in the package is a :class:`fractions.Fraction`; ``Rational`` is
an alias kept for readability.  Fractions are normalized on construction, so
value equality is representation equality and the serialized form is unique.
"""

from __future__ import annotations

import bisect
import random
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

Rational = Fraction

_RATIONAL_RE = re.compile(r"^(-?)(\d+)/(\d+)$")


def rat(value) -> Fraction:
    """Coerce ints, Fractions and ``"p/q"`` strings to a Fraction (never floats)."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        if "/" in value:
            return parse_rational(value)
        return Fraction(int(value))
    raise TypeError(f"cannot build an exact rational from {type(value).__name__}")


def format_rational(x: Fraction) -> str:
    return f"{x.numerator}/{x.denominator}"


def parse_rational(text: str) -> Fraction:
    """Parse the canonical ``"-3/4"`` form; non-reduced input is rejected."""
    m = _RATIONAL_RE.match(text.strip()) if isinstance(text, str) else None
    if m is None:
        raise ValueError(f"malformed rational {text!r}")
    sign, num, den = m.groups()
    n, d = int(num), int(den)
    if d == 0:
        raise ValueError(f"zero denominator in {text!r}")
    value = Fraction(-n if sign else n, d)
    if value.denominator != d or (n == 0 and sign):
        raise ValueError(f"rational {text!r} is not in lowest terms")
    return value


def random_rational(rng: random.Random, lo: Fraction, hi: Fraction, max_den: int = 1000) -> Fraction:
    """Uniform-ish rational in the closed interval [lo, hi] with bounded denominator.

    The denominator is drawn from ``1..max_den`` and the numerator uniformly
    among the grid points of that denominator lying in [lo, hi]; if the grid
    is empty the left endpoint is returned.
    """
    den = rng.randint(1, max_den)
    first = -((-lo.numerator * den) // lo.denominator)  # ceil(lo * den)
    last = (hi.numerator * den) // hi.denominator
    if first > last:
        return lo
    return Fraction(rng.randint(first, last), den)


@dataclass(frozen=True)
class RInterval:
    lo: Fraction
    hi: Fraction

    def __post_init__(self):
        object.__setattr__(self, "lo", rat(self.lo))
        object.__setattr__(self, "hi", rat(self.hi))
        if self.lo > self.hi:
            raise ValueError(f"interval endpoints out of order: [{self.lo}, {self.hi}]")

    @property
    def length(self) -> Fraction:
        return self.hi - self.lo

    def contains(self, x: Fraction) -> bool:
        return self.lo <= x <= self.hi

    def meets(self, other: "RInterval") -> bool:
        return self.lo <= other.hi and other.lo <= self.hi

    def to_json(self) -> list[str]:
        return [format_rational(self.lo), format_rational(self.hi)]

    def __repr__(self):
        return f"[{self.lo}, {self.hi}]"


class FinSet(Sequence):
    """A nonempty, strictly increasing tuple of rationals."""

    __slots__ = ("points",)

    def __init__(self, points: Iterable, *, presorted: bool = False):
        pts = tuple(rat(p) for p in points)
        if not presorted:
            pts = tuple(sorted(set(pts)))
        if not pts:
            raise ValueError("FinSet must be nonempty")
        for left, right in zip(pts, pts[1:]):
            if not left < right:
                raise ValueError(f"FinSet points not strictly increasing at {left}, {right}")
        self.points = pts

    def __getitem__(self, i):
        return self.points[i]

    def __len__(self):
        return len(self.points)

    def __iter__(self):
        return iter(self.points)

    def __contains__(self, x) -> bool:
        i = bisect.bisect_left(self.points, x)
        return i < len(self.points) and self.points[i] == x

    def __eq__(self, other):
        if isinstance(other, FinSet):
            return self.points == other.points
        return NotImplemented

    def __hash__(self):
        return hash(self.points)

    def __repr__(self):
        if len(self.points) > 6:
            head = ", ".join(str(p) for p in self.points[:3])
            return f"FinSet({{{head}, ... {self.points[-1]}}}, size={len(self.points)})"
        return "FinSet({" + ", ".join(str(p) for p in self.points) + "})"

    @property
    def min(self) -> Fraction:
        return self.points[0]

    @property
    def max(self) -> Fraction:
        return self.points[-1]

    def union(self, *others: Iterable) -> "FinSet":
        merged = set(self.points)
        for other in others:
            merged.update(other)
        return FinSet(merged)

    def within(self, lo: Fraction, hi: Fraction) -> tuple[Fraction, ...]:
        """Points in the closed interval [lo, hi]."""
        i = bisect.bisect_left(self.points, lo)
        j = bisect.bisect_right(self.points, hi)
        return self.points[i:j]

    def to_json(self) -> list[str]:
        return [format_rational(p) for p in self.points]

    @classmethod
    def from_json(cls, items: list[str]) -> "FinSet":
        return cls((parse_rational(s) for s in items), presorted=True)


def dist_point_set(x: Fraction, s: FinSet) -> Fraction:
    pts = s.points
    i = bisect.bisect_left(pts, x)
    best = None
    if i < len(pts):
        best = pts[i] - x
    if i > 0:
        left = x - pts[i - 1]
        if best is None or left < best:
            best = left
    return best


def dist_point_interval(x: Fraction, lo: Fraction, hi: Fraction) -> Fraction:
    """Distance from x to the closed interval [lo, hi] (equal to that of the open one)."""
    if x < lo:
        return lo - x
    if x > hi:
        return x - hi
    return Fraction(0)


def dist_set_interval(s: FinSet, lo: Fraction, hi: Fraction) -> Fraction:
    if s.within(lo, hi):
        return Fraction(0)
    return min(dist_point_set(lo, s), dist_point_set(hi, s))


def dist_sets(a: FinSet, b: FinSet) -> Fraction:
    """Minimum distance between two finite sets, by a linear merge."""
    pa, pb = a.points, b.points
    i = j = 0
    best = abs(pa[0] - pb[0])
    while i < len(pa) and j < len(pb):
        gap = pa[i] - pb[j]
        if gap < 0:
            gap = -gap
            i += 1
        else:
            j += 1
        if gap < best:
            best = gap
            if best == 0:
                break
    return best


def diameter(s: FinSet) -> Fraction:
    return s.max - s.min


def directed_hausdorff(a: FinSet, b: FinSet) -> Fraction:
    """sup over x in a of dist(x, b), in one merge pass."""
    pb = b.points
    nb = len(pb)
    j = max(0, bisect.bisect_right(pb, a.points[0]) - 1)
    worst = Fraction(0)
    for x in a.points:
        while j + 1 < nb and pb[j + 1] <= x:
            j += 1
        d = abs(x - pb[j])
        if j + 1 < nb:
            right = pb[j + 1] - x
            if right < d:
                d = right
        if d > worst:
            worst = d
    return worst


def hausdorff(a: FinSet, b: FinSet) -> Fraction:
    return max(directed_hausdorff(a, b), directed_hausdorff(b, a))
