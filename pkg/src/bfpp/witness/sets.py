"""Finite-depth membership oracles for the two example sets built from K.

The F-sigma set is the union of the closed contiguous intervals of K (the
complement of K in [0, 1] plus the gap endpoints); the G-delta set is the
complement of K + Q inside [0, 1].  K itself is only known through the
nested hulls, so answers are three-valued.
"""

from __future__ import annotations

import bisect
from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd
from typing import Optional

from ..numerics import RInterval, dist_point_set, rat

IN, OUT, UNKNOWN = "In", "Out", "Unknown"


@dataclass(frozen=True)
class Verdict:
    kind: str
    witness: Optional[dict] = field(default=None)

    def to_json(self) -> dict:
        wit = None
        if self.witness is not None:
            wit = {k: (f"{v.numerator}/{v.denominator}" if isinstance(v, Fraction) else v)
                   for k, v in self.witness.items()}
        return {"verdict": self.kind, "witness": wit}


def _check_depth(hulls, depth):
    if not 0 <= depth < len(hulls):
        raise ValueError(f"depth {depth} outside history of length {len(hulls)}")


def member_fsigma(x, hulls, depth: int) -> Verdict:
    """Membership in the union of closed contiguous intervals of K.

    ``In`` is certified when some hull up to ``depth`` puts x farther than
    its radius from the skeleton: then x is not in K, so it lies in an open
    contiguous interval.  Skeleton points are in K, and whether one of them
    ends a contiguous interval needs a K-free one-sided neighbourhood; every
    finite hull leaves a radius-wide uncertain zone next to each skeleton
    point, so such points (and points still within the radius) are
    ``Unknown``.  ``Out`` is never asserted.
    """
    x = rat(x)
    if not 0 <= x <= 1:
        raise ValueError(f"{x} is outside [0, 1]")
    _check_depth(hulls, depth)
    for m in range(depth + 1):
        hull = hulls[m]
        gap = dist_point_set(x, hull.skeleton)
        if gap > hull.radius:
            return Verdict(IN, {"stage": m, "distance": gap, "radius": hull.radius})
    return Verdict(UNKNOWN)


def member_gdelta(x, hulls, depth: int) -> Verdict:
    """Every rational lies in K + Q (0 is in K), so rationals are never in the set."""
    x = rat(x)
    _check_depth(hulls, depth)
    p = hulls[depth].skeleton.min
    return Verdict(OUT, {"point": p, "translate": x - p})


def recheck_verdict(x, verdict: Verdict, hulls, kind: str) -> bool:
    """Re-derive a verdict's witness directly from the hulls."""
    x = rat(x)
    wit = verdict.witness
    if verdict.kind == UNKNOWN:
        return wit is None
    if kind == "fsigma":
        if verdict.kind != IN:
            return False
        hull = hulls[wit["stage"]]
        gap = dist_point_set(x, hull.skeleton)
        return gap == wit["distance"] and gap > hull.radius == wit["radius"]
    if kind == "gdelta":
        if verdict.kind != OUT:
            return False
        # the skeleton of every hull lies in K (construction only inserts)
        return (x - wit["translate"] == wit["point"]
                and wit["point"] in hulls[-1].skeleton
                and all(wit["point"] in h.skeleton for h in hulls))
    raise ValueError(f"unknown set kind {kind!r}")


def enumerate_translates(count: int) -> list[Fraction]:
    """The first ``count`` rationals, ordered by height max(|num|, den), then
    denominator, then |num|, positive before negative; 0 comes first."""
    out: list[Fraction] = []
    h = 0
    while len(out) < count:
        if h == 0:
            out.append(Fraction(0))
        else:
            level = []
            for den in range(1, h + 1):
                nums = [h] if den < h else range(1, h + 1)
                for num in nums:
                    if gcd(num, den) == 1:
                        level.append(Fraction(num, den))
                        level.append(Fraction(-num, den))
            for qv in sorted(level, key=lambda v: (v.denominator, abs(v.numerator), v < 0)):
                if len(out) == count:
                    break
                out.append(qv)
        h += 1
    return out[:count]


def gdelta_cover_report(interval: RInterval, hulls, depth: int, translate_budget: int):
    """Per translate q, the parts of ``interval`` within the radius of skeleton + q.

    This is the finite-stage picture of K + Q near ``interval``: each entry
    is ``(q, RInterval)``; the true set K + q lies inside the union of the
    entries for q.
    """
    if interval.lo < 0 or interval.hi > 1:
        raise ValueError("cover interval must lie inside [0, 1]")
    _check_depth(hulls, depth)
    hull = hulls[depth]
    pts, eps = hull.skeleton.points, hull.radius
    report = []
    for qv in enumerate_translates(translate_budget):
        i = bisect.bisect_left(pts, interval.lo - eps - qv)
        j = bisect.bisect_right(pts, interval.hi + eps - qv)
        for s in pts[i:j]:
            lo = max(s + qv - eps, interval.lo)
            hi = min(s + qv + eps, interval.hi)
            if lo <= hi:
                report.append((qv, RInterval(lo, hi)))
    return report


def cover_length(report) -> Fraction:
    """Exact length of the union of the reported pieces (overlaps counted once)."""
    total, reach = Fraction(0), None
    for piece in sorted((piece for _, piece in report), key=lambda iv: iv.lo):
        if reach is None or piece.lo > reach:
            total += piece.length
            reach = piece.hi
        elif piece.hi > reach:
            total += piece.hi - reach
            reach = piece.hi
    return total
