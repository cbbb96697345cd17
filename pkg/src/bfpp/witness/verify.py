"""Independent re-verification of a construction history.

Nothing here calls the construction code: every rule (window choice, k,
progression layout, radius) is recomputed from the raw stage data, and
every inequality the defeating argument relies on is re-checked exactly.
A mutated field either changes a recomputed value or breaks an inequality,
so single-field corruption is always reported.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from ..numerics import FinSet, dist_sets, hausdorff
from .construction import DISJOINT, INITIAL_RADIUS, INSERTED
from .enumeration import enumerate_requirements

# check names, kept stable for reports and tests
K_BOUND = "k > (n+2)/(1-r)"
K_LEAST = "k is the least integer > (n+2)/(1-r)"
GAP_BOUND = "dist(ys, zs) >= k*d"
PAD_BOUND = "eps' <= d/4"
HALVING = "eps' <= eps/2"
NESTING = "hausdorff(old, new) + eps' <= eps"
DISJOINT_PADS = "padded intervals pairwise disjoint"
COUNTING = "r*k + 2 + n < k"


@dataclass(frozen=True)
class Failure:
    stage: int
    check: str
    detail: str = ""

    def __str__(self):
        tail = f": {self.detail}" if self.detail else ""
        return f"stage {self.stage}: {self.check}{tail}"


def _skeleton_issue(points: Sequence[Fraction]) -> str:
    if not points:
        return "empty skeleton"
    for left, right in zip(points, points[1:]):
        if not left < right:
            return f"not strictly increasing at {left}, {right}"
    if points[0] != 0 or points[-1] != 1:
        return f"span [{points[0]}, {points[-1]}] is not [0, 1]"
    return ""


def _progression_issue(points, first, step, k, a, b) -> str:
    pts = list(points)
    if len(pts) != k:
        return f"length {len(pts)} != k = {k}"
    for j, pt in enumerate(pts):
        if pt != first + j * step:
            return f"entry {j} is {pt}, expected {first + j * step}"
        if not a < pt < b:
            return f"entry {j} = {pt} outside ({a}, {b})"
    return ""


def verify_stage(index, old_pts, old_radius, new_pts, new_radius, cert) -> list[Failure]:
    fails: list[Failure] = []

    def check(name, ok, detail=""):
        if not ok:
            fails.append(Failure(index, name, detail))
        return ok

    old_pts, new_pts = tuple(old_pts), tuple(new_pts)
    check("stage index", cert.stage == index, f"{cert.stage} != {index}")
    req = cert.requirement
    expected = enumerate_requirements(index)
    check("requirement matches enumeration",
          (req.p, req.q, req.r) == (expected.p, expected.q, expected.r), f"{req} != {expected}")
    p, q, r = req.p, req.q, req.r
    eps, eps_new = old_radius, new_radius
    check("n = |incoming skeleton|", cert.n == len(old_pts), f"{cert.n} != {len(old_pts)}")
    check("radius_in = incoming radius", cert.radius_in == eps, f"{cert.radius_in} != {eps}")
    check("radius_out = outgoing radius", cert.radius_out == eps_new, f"{cert.radius_out} != {eps_new}")
    check("eps' > 0", eps_new > 0, str(eps_new))
    check(HALVING, eps_new <= eps / 2, f"{eps_new} > {eps / 2}")

    issue = _skeleton_issue(old_pts)
    if not check("incoming skeleton well formed", not issue, issue):
        return fails
    issue = _skeleton_issue(new_pts)
    if not check("outgoing skeleton well formed", not issue, issue):
        return fails
    old_set = FinSet(old_pts, presorted=True)
    new_set = FinSet(new_pts, presorted=True)

    haus = hausdorff(old_set, new_set)
    check(NESTING, haus + eps_new <= eps, f"{haus} + {eps_new} > {eps}")
    two_pad = 2 * eps_new
    for left, right in zip(new_pts, new_pts[1:]):
        if right - left <= two_pad:
            check(DISJOINT_PADS, False, f"points {left}, {right} closer than 2*eps'")
            break

    outside = q <= 0 or p >= 1
    hits = [x for x in old_pts if p <= x <= q]
    rule_case = DISJOINT if outside or not hits else INSERTED
    if not check("case tag matches rule", cert.case == rule_case, f"{cert.case} != {rule_case}"):
        return fails

    if rule_case == DISJOINT:
        if not check("certificate fields present for case",
                     cert.gap is not None and cert.outside_unit is not None):
            return fails
        check("outside_unit = (q <= 0 or p >= 1)", cert.outside_unit == outside)
        if hits:
            gap = Fraction(0)
        else:
            gap = min(min(abs(x - p), abs(x - q)) for x in old_pts)
        check("gap = dist(skeleton, (p, q))", cert.gap == gap, f"{cert.gap} != {gap}")
        if not outside:
            check("dist(skeleton, (p, q)) >= eps'", gap >= eps_new, f"{gap} < {eps_new}")
        check("skeleton unchanged", old_pts == new_pts)
        rule = min(gap, eps / 2) if gap > 0 else eps / 2
        check("eps' = min(gap, eps/2)", eps_new == rule, f"{eps_new} != {rule}")
        return fails

    needed = (cert.x_i0, cert.a, cert.b, cert.k, cert.d, cert.ys, cert.zs, cert.hausdorff)
    if not check("certificate fields present for case", all(v is not None for v in needed)):
        return fails
    n, k, d, a, b = len(old_pts), cert.k, cert.d, cert.a, cert.b

    x = hits[0]
    check("x_i0 = least skeleton point in [p, q]", cert.x_i0 == x, f"{cert.x_i0} != {x}")
    wa, wb = max(p, x - eps, Fraction(0)), min(q, x + eps, Fraction(1))
    if wa < x < wb:
        if x - wa >= wb - x:
            wb = x
        else:
            wa = x
    check("(a, b) follows the window rule", (a, b) == (wa, wb), f"({a}, {b}) != ({wa}, {wb})")
    check("(a, b) inside (p, q), (0, 1) and the eps-window of x_i0",
          max(p, x - eps, 0) <= a < b <= min(q, x + eps, 1))

    bound = Fraction(n + 2) / (1 - r)
    check(K_BOUND, k > bound, f"k = {k}, (n+2)/(1-r) = {bound}")
    check(K_LEAST, k - 1 <= bound, f"k - 1 = {k - 1} > {bound}")
    if not check("k >= 1", k >= 1) or not check("a < b", a < b):
        return fails
    check("d = (b-a)/(3k+2)", d == (b - a) / (3 * k + 2), f"d = {d}")
    check("d > 0", d > 0)
    issue = _progression_issue(cert.ys, a + d, d, k, a, b)
    check("ys = {a + j*d : j = 1..k} inside (a, b)", not issue, issue)
    issue = _progression_issue(cert.zs, b - k * d, d, k, a, b)
    check("zs = {b - (k+1-j)*d : j = 1..k} inside (a, b)", not issue, issue)
    ys, zs = list(cert.ys), list(cert.zs)
    if ys and zs and not _skeleton_issue([Fraction(0)] + ys + zs + [Fraction(1)]):
        sep = dist_sets(FinSet(ys, presorted=True), FinSet(zs, presorted=True))
        check(GAP_BOUND, sep >= k * d, f"{sep} < {k * d}")
    check(PAD_BOUND, eps_new <= d / 4, f"{eps_new} > {d / 4}")
    check(COUNTING, r * k + 2 + n < k, f"{r * k + 2 + n} >= {k}")
    merged = tuple(heapq.merge(old_pts, ys, zs))
    check("new skeleton = old + ys + zs", merged == new_pts)
    check("hausdorff field = hausdorff(old, new)", cert.hausdorff == haus, f"{cert.hausdorff} != {haus}")
    rule = min(d / 4, eps / 2, eps - haus)
    check("eps' = min(d/4, eps/2, eps - hausdorff)", eps_new == rule, f"{eps_new} != {rule}")
    return fails


def verify_history(entries, certs) -> list[Failure]:
    """``entries`` is a sequence of (skeleton points, radius); ``certs`` one shorter."""
    fails = []
    if len(entries) != len(certs) + 1:
        return [Failure(-1, "history length", f"{len(entries)} hulls for {len(certs)} certificates")]
    pts0, rad0 = entries[0]
    if tuple(pts0) != (Fraction(0), Fraction(1)) or rad0 != INITIAL_RADIUS:
        fails.append(Failure(0, "initial hull = ({0, 1}, 1/4)"))
    for i, cert in enumerate(certs):
        (old_pts, old_rad), (new_pts, new_rad) = entries[i], entries[i + 1]
        try:
            fails.extend(verify_stage(i, old_pts, old_rad, new_pts, new_rad, cert))
        except (TypeError, ValueError, ZeroDivisionError) as exc:
            fails.append(Failure(i, "stage data evaluable", repr(exc)))
    return fails


def verify_construction(hulls, certs) -> list[Failure]:
    entries = [(h.skeleton.points, h.radius) for h in hulls]
    return verify_history(entries, certs)
