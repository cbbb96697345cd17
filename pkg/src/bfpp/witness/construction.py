"""Stage-by-stage diagonal construction of a compact K in [0, 1] no contractive
image of which covers a portion of K.

Each stage takes a closed Hausdorff ball B(skeleton, radius) of compact sets
and one requirement (p, q, r), and returns a smaller ball all of whose
members defeat the requirement: either they miss (p, q) entirely, or two
separated arithmetic progressions have been inserted inside (p, q) so that
no contraction of ratio at most r can reach all of their padded intervals.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from ..numerics import (
    FinSet,
    RInterval,
    directed_hausdorff,
    dist_set_interval,
    format_rational,
    rat,
)
from .enumeration import Requirement, enumerate_requirements

DISJOINT = "Disjoint"
INSERTED = "Inserted"

INITIAL_RADIUS = Fraction(1, 4)


class ConstructionFault(RuntimeError):
    """A stage could not be carried out; indicates a bug, never expected."""


@dataclass(frozen=True)
class FiniteHull:
    """Closed Hausdorff ball of compacta around a finite skeleton in [0, 1]."""

    skeleton: FinSet
    radius: Fraction

    def __post_init__(self):
        if not isinstance(self.skeleton, FinSet):
            object.__setattr__(self, "skeleton", FinSet(self.skeleton))
        object.__setattr__(self, "radius", rat(self.radius))
        if self.radius <= 0:
            raise ValueError("hull radius must be positive")
        sk = self.skeleton
        if sk.min != 0 or sk.max != 1:
            raise ValueError("skeleton must contain 0 and 1 and lie inside [0, 1]")

    @classmethod
    def initial(cls) -> "FiniteHull":
        return cls(FinSet([0, 1]), INITIAL_RADIUS)


@dataclass(frozen=True)
class StageCertificate:
    stage: int
    requirement: Requirement
    case: str
    n: int
    radius_in: Fraction
    radius_out: Fraction
    # Disjoint
    gap: Optional[Fraction] = None
    outside_unit: Optional[bool] = None
    # Inserted
    x_i0: Optional[Fraction] = None
    a: Optional[Fraction] = None
    b: Optional[Fraction] = None
    k: Optional[int] = None
    d: Optional[Fraction] = None
    ys: Optional[FinSet] = field(default=None, repr=False)
    zs: Optional[FinSet] = field(default=None, repr=False)
    hausdorff: Optional[Fraction] = None

    @property
    def inserted(self) -> bool:
        return self.case == INSERTED

    @property
    def r(self) -> Fraction:
        return self.requirement.r

    def padded(self, center: Fraction) -> RInterval:
        return RInterval(center - self.radius_out, center + self.radius_out)

    def to_json(self) -> dict:
        out = {
            "stage": self.stage,
            "requirement": self.requirement.to_json(),
            "case": self.case,
            "n": self.n,
            "radius_in": format_rational(self.radius_in),
            "radius_out": format_rational(self.radius_out),
        }
        if self.case == DISJOINT:
            out["gap"] = format_rational(self.gap)
            out["outside_unit"] = self.outside_unit
        else:
            out.update(
                x_i0=format_rational(self.x_i0),
                a=format_rational(self.a),
                b=format_rational(self.b),
                k=self.k,
                d=format_rational(self.d),
                ys=self.ys.to_json(),
                zs=self.zs.to_json(),
                hausdorff=format_rational(self.hausdorff),
            )
        return out


def choose_k(n: int, r) -> int:
    """Least integer strictly greater than (n + 2)/(1 - r)."""
    r = rat(r)
    if n < 1 or not 0 < r < 1:
        raise ValueError("choose_k needs n >= 1 and 0 < r < 1")
    return math.floor(Fraction(n + 2) / (1 - r)) + 1


def place_progressions(a, b, k: int) -> tuple[Fraction, FinSet, FinSet]:
    """Two length-k progressions of step d = (b-a)/(3k+2), one at each end of (a, b).

    The gap between the blocks is (k + 2)d, comfortably at least kd.
    """
    a, b = rat(a), rat(b)
    if not a < b or k < 1:
        raise ValueError("place_progressions needs a < b and k >= 1")
    d = (b - a) / (3 * k + 2)
    ys = FinSet((a + j * d for j in range(1, k + 1)), presorted=True)
    zs = FinSet((b - (k + 1 - j) * d for j in range(1, k + 1)), presorted=True)
    return d, ys, zs


def insertion_window(skeleton: FinSet, radius: Fraction, req: Requirement):
    """(x_i0, a, b) for an Inserted stage, or None when the stage is Disjoint.

    The requirement is vacuous for compacta inside [0, 1] when (p, q) misses
    (0, 1), and is met trivially when no skeleton point lies in [p, q].  When
    x_i0 falls strictly inside the window, the longer side is kept so that the
    new points stay at least d away from x_i0.
    """
    p, q = req.p, req.q
    if q <= 0 or p >= 1:
        return None
    hits = skeleton.within(p, q)
    if not hits:
        return None
    x = hits[0]
    a = max(p, x - radius, Fraction(0))
    b = min(q, x + radius, Fraction(1))
    if a < x < b:
        if x - a >= b - x:
            b = x
        else:
            a = x
    return x, a, b


def refine_stage(hull: FiniteHull, req: Requirement, stage: int = 0):
    sk, eps = hull.skeleton, hull.radius
    window = insertion_window(sk, eps, req)
    if window is None:
        gap = dist_set_interval(sk, req.p, req.q)
        new_eps = min(gap, eps / 2) if gap > 0 else eps / 2
        cert = StageCertificate(
            stage, req, DISJOINT, len(sk), eps, new_eps,
            gap=gap, outside_unit=(req.q <= 0 or req.p >= 1),
        )
        return FiniteHull(sk, new_eps), cert

    x, a, b = window
    if not a < b:
        raise ConstructionFault(f"stage {stage}: empty insertion window ({a}, {b})")
    n = len(sk)
    k = choose_k(n, req.r)
    d, ys, zs = place_progressions(a, b, k)
    pts = sk.points
    i = bisect.bisect_right(pts, a)
    if i != bisect.bisect_left(pts, b):
        raise ConstructionFault(f"stage {stage}: window ({a}, {b}) already holds skeleton points")
    new_sk = FinSet(pts[:i] + ys.points + zs.points + pts[i:], presorted=True)
    # old is a subset of new, so only the inserted points contribute
    haus = max(directed_hausdorff(ys, sk), directed_hausdorff(zs, sk))
    new_eps = min(d / 4, eps / 2, eps - haus)
    if new_eps <= 0:
        raise ConstructionFault(f"stage {stage}: nonpositive outgoing radius {new_eps}")
    cert = StageCertificate(
        stage, req, INSERTED, n, eps, new_eps,
        x_i0=x, a=a, b=b, k=k, d=d, ys=ys, zs=zs, hausdorff=haus,
    )
    return FiniteHull(new_sk, new_eps), cert


def construct(stage_budget: int, size_cap: Optional[int] = None):
    """Fold :func:`refine_stage` over the requirement enumeration.

    Stops after ``stage_budget`` stages, or as soon as the skeleton has more
    than ``size_cap`` points.  Returns ``(hulls, certificates)`` with
    ``len(hulls) == len(certificates) + 1``.
    """
    if stage_budget < 1:
        raise ValueError("stage budget must be at least 1")
    hulls = [FiniteHull.initial()]
    certs = []
    for m in range(stage_budget):
        hull, cert = refine_stage(hulls[-1], enumerate_requirements(m), stage=m)
        hulls.append(hull)
        certs.append(cert)
        if size_cap is not None and len(hull.skeleton) > size_cap:
            break
    return hulls, certs


def contiguous_intervals(hull: FiniteHull) -> list[RInterval]:
    """Gaps between consecutive skeleton points (closures of open intervals).

    These are stage-m candidates for the contiguous intervals of the limit
    set; later stages may split them.
    """
    pts = hull.skeleton.points
    return [RInterval(lo, hi) for lo, hi in zip(pts, pts[1:])]
