"""Exact instances of fixed-point-free contractions and of a strictly
distance-decreasing non-contraction, each with a verification batch.

Transcendental maps are replaced by rational surrogates with the same
structure: x/(2(1+|x|)) for half of arctan|x|, and a period-4 triangle wave
for sin(1/x).
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional, Sequence

from .contraction import MapOracle
from .numerics import format_rational, random_rational, rat

HALF = Fraction(1, 2)


@dataclass
class VerificationReport:
    instance: str
    pairs_checked: int
    violations: list = field(default_factory=list)
    max_ratio: Optional[Fraction] = None
    extra: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return not self.violations

    def to_json(self) -> dict:
        out = {
            "instance": self.instance,
            "pairs_checked": self.pairs_checked,
            "violations": [[_fmt(v) for v in item] for item in self.violations],
            "max_ratio": None if self.max_ratio is None else format_rational(self.max_ratio),
        }
        out.update({k: _fmt(v) for k, v in self.extra.items()})
        return out


def _fmt(value):
    if isinstance(value, Fraction):
        return format_rational(value)
    if isinstance(value, PlanePoint):
        return value.to_json()
    if isinstance(value, (list, tuple)):
        return [_fmt(v) for v in value]
    return value


# -- segment --------------------------------------------------------------------

def segment_map(x) -> Fraction:
    """g(x) = x / (2(1 + |x|)): Lipschitz 1/2, only fixed point 0."""
    x = rat(x)
    return x / (2 * (1 + abs(x)))


SEGMENT_ORACLE = MapOracle(segment_map, HALF, None, name="segment")


def _lipschitz_batch(name, fn, pairs, bound=HALF) -> VerificationReport:
    report = VerificationReport(name, 0)
    best = Fraction(0)
    for x, y in pairs:
        if x == y:
            continue
        fx, fy = fn(x), fn(y)
        lhs, gap = abs(fx - fy), abs(x - y)
        report.pairs_checked += 1
        if lhs > bound * gap:
            report.violations.append((x, y, lhs, bound * gap))
        ratio = lhs / gap
        if ratio > best:
            best = ratio
    report.max_ratio = best
    return report


def segment_demo(pairs: int, seed: int, max_den: int = 10**6) -> VerificationReport:
    """Pairwise 1/2-Lipschitz check on (0,1), plus g(x) < x/2 (so no fixed point)."""
    rng = random.Random(seed)
    lo, hi = Fraction(1, max_den), 1 - Fraction(1, max_den)
    sample = [(random_rational(rng, lo, hi, max_den), random_rational(rng, lo, hi, max_den))
              for _ in range(pairs)]
    report = _lipschitz_batch("segment", segment_map, sample)
    for x, _ in sample:
        gx = segment_map(x)
        if not (0 < gx < x / 2):
            report.violations.append(("0 < g(x) < x/2", x, gx))
    report.extra["fixed_points_in_(0,1)"] = 0 if report.passed else None
    return report


# -- accumulation ------------------------------------------------------------------

class OutsideDomain(ValueError):
    """x lies in one of the removed open intervals (a_n, b_n)."""

    def __init__(self, x, n):
        lo, hi = AccumulationInstance.a(n), AccumulationInstance.b(n)
        super().__init__(f"{x} lies in the removed interval ({lo}, {hi}) for n = {n}")
        self.x, self.n = x, n


class AccumulationInstance:
    """X = (0, 1] minus the open intervals (a_n, b_n), n >= 1, which accumulate at 0."""

    @staticmethod
    def a(n: int) -> Fraction:
        return Fraction(3, 4 ** (n + 1))

    @staticmethod
    def b(n: int) -> Fraction:
        return Fraction(1, 4 ** n)

    @staticmethod
    def z(n: int) -> Fraction:
        return Fraction(1, 4 ** (n + 2))

    @classmethod
    def removed_interval(cls, x) -> Optional[int]:
        """The n with x in (a_n, b_n), or None."""
        x = rat(x)
        if not 0 < x <= 1:
            return None
        n = accum_index(x)  # b_n <= x < b_{n-1}
        if n >= 2 and x > cls.a(n - 1):
            return n - 1
        return None

    @classmethod
    def contains(cls, x) -> bool:
        x = rat(x)
        return 0 < x <= 1 and cls.removed_interval(x) is None


def accum_index(x) -> int:
    """Least n >= 1 with 4^-n <= x."""
    x = rat(x)
    if x <= 0:
        raise ValueError(f"accum_index needs x > 0, got {x}")
    n, b = 1, Fraction(1, 4)
    while b > x:
        n, b = n + 1, b / 4
    return n


def accum_index_strict(x) -> int:
    """Least n >= 1 with 4^-n < x; kept to exhibit why the map uses the non-strict rule."""
    x = rat(x)
    if x <= 0:
        raise ValueError(f"accum_index needs x > 0, got {x}")
    n, b = 1, Fraction(1, 4)
    while b >= x:
        n, b = n + 1, b / 4
    return n


def accum_map(x, index: Callable = accum_index) -> Fraction:
    x = rat(x)
    if not 0 < x <= 1:
        raise ValueError(f"{x} is outside (0, 1]")
    n = AccumulationInstance.removed_interval(x)
    if n is not None:
        raise OutsideDomain(x, n)
    return AccumulationInstance.z(index(x))


def accumulation_sample(count: int, seed: int, max_den: int = 10**6) -> list[Fraction]:
    """Random points of X together with the interval endpoints of the first levels."""
    rng = random.Random(seed)
    pts: list[Fraction] = []
    for n in range(1, 8):
        pts.extend([AccumulationInstance.a(n), AccumulationInstance.b(n)])
    pts = pts[:count]
    while len(pts) < count:
        x = random_rational(rng, Fraction(1, max_den), Fraction(1), max_den)
        if rng.random() < 0.5:  # spread over scales down to 4^-10
            x = x / 4 ** rng.randint(0, 10)
        if AccumulationInstance.contains(x):
            pts.append(x)
    return pts


def accumulation_demo(count: int, seed: int) -> VerificationReport:
    """All pairs of the sample: |f(x)-f(y)| <= |x-y|/2; every point: f(x) < x/2."""
    pts = sorted(set(accumulation_sample(count, seed)))
    values = [accum_map(x) for x in pts]
    report = VerificationReport("accumulation", 0)
    best = Fraction(0)
    for i, x in enumerate(pts):
        fx = values[i]
        if not (0 < fx < x / 2 and AccumulationInstance.contains(fx)):
            report.violations.append(("0 < f(x) < x/2, f(x) in X", x, fx))
        for j in range(i + 1, len(pts)):
            fy = values[j]
            report.pairs_checked += 1
            if fx == fy:
                continue
            gap = pts[j] - x
            lhs = abs(fx - fy)
            if 2 * lhs > gap:
                report.violations.append((x, pts[j], lhs, gap / 2))
            ratio = lhs / gap
            if ratio > best:
                best = ratio
    report.max_ratio = best
    report.extra["points"] = len(pts)
    return report


# -- wave -------------------------------------------------------------------------

@dataclass(frozen=True)
class PlanePoint:
    x: Fraction
    y: Fraction

    def to_json(self) -> list[str]:
        return [format_rational(self.x), format_rational(self.y)]


def triangle_wave(t) -> Fraction:
    """Period 4, value 1 at t = 1 (mod 4) and -1 at t = 3 (mod 4)."""
    t = rat(t)
    return abs((t - 1) % 4 - 2) - 1


def on_graph(p: PlanePoint) -> bool:
    return 0 < p.x <= 1 and p.y == triangle_wave(1 / p.x)


def wave_shift(p: PlanePoint) -> PlanePoint:
    """(x, y) -> (x/(1+4x), y): moves each wave of the graph onto the next."""
    if not 0 < p.x <= 1:
        raise ValueError(f"x = {p.x} is outside (0, 1]")
    return PlanePoint(p.x / (1 + 4 * p.x), p.y)


def sq_dist(p: PlanePoint, q: PlanePoint) -> Fraction:
    return (p.x - q.x) ** 2 + (p.y - q.y) ** 2


def sqrt_lower(value: Fraction, digits: int = 12) -> Fraction:
    """A rational lower bound of sqrt(value) within 10^-digits."""
    scale = 10 ** digits
    return Fraction(math.isqrt(value.numerator * scale * scale // value.denominator), scale)


def verify_strict_decrease(fmap: Callable, pairs: Sequence[tuple]) -> VerificationReport:
    """Exact check |f(p) - f(q)| < |p - q| via squared distances.

    ``max_ratio`` is a rational lower bound of the largest observed distance
    ratio; the exact squared ratio and its pair are in ``extra``.
    """
    if not pairs:
        raise ValueError("verify_strict_decrease needs at least one pair")
    report = VerificationReport("wave", 0)
    best, witness = Fraction(0), None
    for p, q in pairs:
        if p == q:
            raise ValueError(f"pair with equal points {p}")
        before, after = sq_dist(p, q), sq_dist(fmap(p), fmap(q))
        report.pairs_checked += 1
        if not after < before:
            report.violations.append((p, q, after, before))
        ratio = after / before
        if ratio > best:
            best, witness = ratio, (p, q)
    report.max_ratio = sqrt_lower(best)
    report.extra["max_ratio_squared"] = best
    report.extra["witness_pair"] = list(witness)
    return report


def graph_sample(count: int, seed: int, max_den: int = 10**4) -> list[PlanePoint]:
    if count < 1:
        raise ValueError("count must be at least 1")
    rng = random.Random(seed)
    out = []
    for _ in range(count):
        x = random_rational(rng, Fraction(1, max_den), Fraction(1), max_den)
        out.append(PlanePoint(x, triangle_wave(1 / x)))
    return out


def peak_trough_pairs(count: int) -> list[tuple[PlanePoint, PlanePoint]]:
    """Adjacent peak/trough graph points; their distance ratio under the shift tends to 1."""
    out = []
    for m in range(1, count + 1):
        peak = PlanePoint(Fraction(1, 4 * m + 1), Fraction(1))
        trough = PlanePoint(Fraction(1, 4 * m + 3), Fraction(-1))
        out.append((peak, trough))
    return out


def wave_demo(pairs: int, seed: int) -> VerificationReport:
    rng = random.Random(seed)
    pts = graph_sample(2 * pairs, seed)
    sample = []
    while len(sample) < pairs:
        p, q = rng.choice(pts), rng.choice(pts)
        if p != q:
            sample.append((p, q))
    sample.extend(peak_trough_pairs(20))
    report = verify_strict_decrease(wave_shift, sample)
    for p, _ in sample:
        if not (on_graph(p) and on_graph(wave_shift(p))):
            report.violations.append(("graph invariance", p))
    return report


DEMOS = {
    "segment": segment_demo,
    "accumulation": accumulation_demo,
    "wave": wave_demo,
}
