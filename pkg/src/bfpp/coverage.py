"""Certified non-coverage for Inserted stages, by interval counting.

For an Inserted stage every compact K in the outgoing hull lies in the union
of the closed padded intervals X_i (incoming skeleton), Y_j, Z_j (the two
progressions) and meets each of them.  Given a piecewise-affine f of ratio
at most r, we compute exactly which Y_j / Z_j are met by the image of some
padded interval.  If some Y_j (or Z_j) is untouched, the point of K inside
it is in K ∩ (p, q) but not in f(K).

Counting is organized around arithmetic runs: the skeleton decomposes into
a handful of progressions, and on each affine piece of f the image centres
of a run form a progression too.  Candidate meets are found with float64
arithmetic whose rounding error is bounded explicitly; every candidate
closer than that bound to a decision boundary is re-decided with Fractions.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

import numpy as np

from .contraction import PiecewiseAffineMap, eval_map, image_interval, lipschitz
from .numerics import FinSet, RInterval, random_rational
from .witness.construction import StageCertificate

_DELTA = 1e-6  # decision margin for the float filter, in units of d
_SMALL = 48  # runs shorter than this are decided exactly

GROUPS = ("X", "Y", "Z")
BLOCKS = ("Y", "Z")


class RatioViolation(ValueError):
    def __init__(self, ratio, bound):
        super().__init__(f"map has Lipschitz constant {ratio} > r = {bound}")
        self.ratio = ratio
        self.bound = bound


class CoverageFault(AssertionError):
    """min(m_Y, m_Z) reached k: the counting argument was falsified."""


@dataclass(frozen=True)
class Run:
    start: Fraction
    step: Fraction
    length: int

    def at(self, i: int) -> Fraction:
        return self.start + i * self.step

    @property
    def last(self) -> Fraction:
        return self.at(self.length - 1)


def decompose_runs(points) -> list[Run]:
    """Greedy split of a sorted point list into maximal arithmetic runs."""
    pts = list(points)
    runs, i, n = [], 0, len(pts)
    while i < n:
        if i + 1 == n:
            runs.append(Run(pts[i], Fraction(0), 1))
            break
        step = pts[i + 1] - pts[i]
        j = i + 1
        while j + 1 < n and pts[j + 1] - pts[j] == step:
            j += 1
        runs.append(Run(pts[i], step, j - i + 1))
        i = j + 1
    return runs


@dataclass
class StageGeometry:
    """Everything the counter needs about one Inserted stage, prepared once."""

    cert: StageCertificate
    incoming: FinSet
    runs: dict = field(default_factory=dict)  # group -> list[Run]

    @classmethod
    def build(cls, cert: StageCertificate, incoming: FinSet) -> "StageGeometry":
        if not cert.inserted:
            raise ValueError(f"stage {cert.stage} is {cert.case}, not Inserted")
        if len(incoming) != cert.n:
            raise ValueError("incoming skeleton does not match the certificate")
        geom = cls(cert, incoming)
        geom.runs = {
            "X": decompose_runs(incoming),
            "Y": [Run(cert.ys[0], cert.d, cert.k)],
            "Z": [Run(cert.zs[0], cert.d, cert.k)],
        }
        return geom

    @property
    def k(self) -> int:
        return self.cert.k

    @property
    def pad(self) -> Fraction:
        return self.cert.radius_out

    def target_start(self, block: str) -> Fraction:
        return self.cert.ys[0] if block == "Y" else self.cert.zs[0]

    def block_gap(self) -> Fraction:
        """dist between the closed padded unions of the Y- and Z-intervals."""
        return (self.cert.zs[0] - self.pad) - (self.cert.ys[-1] + self.pad)


@dataclass
class MeetCount:
    m_Y: int
    m_Z: int
    k: int
    masks: dict  # (group, block) -> bool array of length k
    hulls: dict  # group "Y"/"Z" -> exact image hull of f(union of that block's padded intervals)
    sources: dict  # block -> (group code array, run array, index array); -1 where unmet
    geometry: StageGeometry = field(repr=False)

    def met(self, block: str, j: int) -> bool:
        """Whether target interval j (1-based) of ``block`` is met."""
        return bool(any(self.masks[(g, block)][j - 1] for g in GROUPS))

    def count(self, group: str, block: str) -> int:
        return int(self.masks[(group, block)].sum())

    def source_of(self, block: str, j: int):
        """(group, centre) of one padded interval whose image meets target j."""
        gcode, run_ids, idx = self.sources[block]
        g = int(gcode[j - 1])
        if g < 0:
            return None
        group = GROUPS[g]
        run = self.geometry.runs[group][int(run_ids[j - 1])]
        return group, run.at(int(idx[j - 1]))


class _Counter:
    def __init__(self, f: PiecewiseAffineMap, geom: StageGeometry):
        self.f = f
        self.geom = geom
        self.k = geom.k
        self.e = geom.pad
        self.d = geom.cert.d
        self.pieces = list(f.pieces())
        self.masks = {(g, b): np.zeros(self.k, dtype=bool) for g in GROUPS for b in BLOCKS}
        self.sources = {
            b: (np.full(self.k, -1, dtype=np.int8), np.zeros(self.k, dtype=np.int32),
                np.zeros(self.k, dtype=np.int64))
            for b in BLOCKS
        }
        self.hulls: dict = {}

    # -- marking -----------------------------------------------------------
    def _mark(self, group, block, run_id, js, idxs):
        js = np.asarray(js, dtype=np.int64)
        if js.size == 0:
            return
        self.masks[(group, block)][js] = True
        gcode, runs, ids = self.sources[block]
        gcode[js] = GROUPS.index(group)
        runs[js] = run_id
        ids[js] = idxs

    def _mark_interval(self, group, run_id, i, lo, hi):
        """Exact marking for one image interval [lo, hi]."""
        e, d, k = self.e, self.d, self.k
        for block in BLOCKS:
            t0 = self.geom.target_start(block)
            j_lo = max(0, math.ceil((lo - e - t0) / d))
            j_hi = min(k - 1, math.floor((hi + e - t0) / d))
            if j_lo <= j_hi:
                js = np.arange(j_lo, j_hi + 1)
                self._mark(group, block, run_id, js, np.full(js.size, i))

    @staticmethod
    def _exact_hits(w: Fraction, tau: Fraction, k: int) -> list[int]:
        base = math.floor(w)
        return [j for j in (base - 1, base, base + 1, base + 2)
                if 0 <= j < k and abs(w - j) <= tau]

    def _inside_run(self, group, run_id, run: Run, i_lo, i_hi, s, c):
        """Mark the targets met by images of run[i_lo..i_hi], all within one affine piece."""
        e, d, k = self.e, self.d, self.k
        tau = e * (1 + abs(s)) / d
        for block in BLOCKS:
            t0 = self.geom.target_start(block)
            w0 = (c + s * run.start - t0) / d
            gamma = s * run.step / d
            lower, upper = -tau, k - 1 + tau
            if gamma == 0:
                w = w0 + gamma * i_lo
                hits = self._exact_hits(w, tau, k)
                self._mark(group, block, run_id, hits, np.full(len(hits), i_lo))
                continue
            if gamma > 0:
                ia, ib = math.ceil((lower - w0) / gamma), math.floor((upper - w0) / gamma)
            else:
                ia, ib = math.ceil((upper - w0) / gamma), math.floor((lower - w0) / gamma)
            ia, ib = max(ia, i_lo), min(ib, i_hi)
            if ia > ib:
                continue
            self._decide(group, block, run_id, ia, ib, w0 + gamma * ia, gamma, tau)

    def _decide(self, group, block, run_id, ia, ib, ws: Fraction, gamma: Fraction, tau: Fraction):
        k = self.k
        cnt = ib - ia + 1
        ws_f, g_f, tau_f = float(ws), float(gamma), float(tau)
        err = 8 * 2.0 ** -53 * (abs(ws_f) + abs(g_f) * cnt + k + 2)
        if cnt <= _SMALL or err > _DELTA / 4 or tau_f >= 0.5 - 4 * _DELTA:
            js, ids = [], []
            for off in range(cnt):
                for j in self._exact_hits(ws + gamma * off, tau, k):
                    js.append(j)
                    ids.append(ia + off)
            self._mark(group, block, run_id, js, np.asarray(ids, dtype=np.int64))
            return
        offs = np.arange(cnt, dtype=np.float64)
        w = ws_f + g_f * offs
        nearest = np.rint(w)
        dist = np.abs(w - nearest)
        ambiguous = np.abs(dist - tau_f) <= _DELTA
        sure = (dist < tau_f) & ~ambiguous
        js = nearest[sure].astype(np.int64)
        keep = (js >= 0) & (js < k)
        sure_idx = np.nonzero(sure)[0][keep]
        self._mark(group, block, run_id, js[keep], ia + sure_idx)
        for off in np.nonzero(ambiguous)[0].tolist():
            hits = self._exact_hits(ws + gamma * off, tau, k)
            self._mark(group, block, run_id, hits, np.full(len(hits), ia + off))

    def _hull_update(self, group, lo, hi):
        if group == "X":
            return
        cur = self.hulls.get(group)
        if cur is None:
            self.hulls[group] = (lo, hi)
        else:
            self.hulls[group] = (min(cur[0], lo), max(cur[1], hi))

    def process(self, group, run_id, run: Run):
        e = self.e
        span_lo, span_hi = run.start - e, run.last + e
        covered = []
        for lo, hi, s, c in self.pieces:
            if (lo is not None and lo > span_hi) or (hi is not None and hi < span_lo):
                continue
            if run.length == 1:
                inside = (lo is None or run.start - e >= lo) and (hi is None or run.start + e <= hi)
                i_lo, i_hi = (0, 0) if inside else (1, 0)
            else:
                i_lo = 0 if lo is None else max(0, math.ceil((lo + e - run.start) / run.step))
                i_hi = run.length - 1 if hi is None else min(
                    run.length - 1, math.floor((hi - e - run.start) / run.step))
            if i_lo > i_hi:
                continue
            covered.append((i_lo, i_hi))
            self._inside_run(group, run_id, run, i_lo, i_hi, s, c)
            u1, u2 = c + s * run.at(i_lo), c + s * run.at(i_hi)
            self._hull_update(group, min(u1, u2) - abs(s) * e, max(u1, u2) + abs(s) * e)
        # padded intervals straddling a breakpoint
        covered.sort()
        nxt = 0
        straddlers = []
        for i_lo, i_hi in covered:
            straddlers.extend(range(nxt, i_lo))
            nxt = i_hi + 1
        straddlers.extend(range(nxt, run.length))
        for i in straddlers:
            centre = run.at(i)
            img = image_interval(self.f, RInterval(centre - e, centre + e))
            self._mark_interval(group, run_id, i, img.lo, img.hi)
            self._hull_update(group, img.lo, img.hi)

    def run(self) -> MeetCount:
        for group in GROUPS:
            for run_id, run in enumerate(self.geom.runs[group]):
                self.process(group, run_id, run)
        totals = {b: np.logical_or.reduce([self.masks[(g, b)] for g in GROUPS]) for b in BLOCKS}
        hulls = {g: RInterval(*self.hulls[g]) for g in ("Y", "Z")}
        return MeetCount(int(totals["Y"].sum()), int(totals["Z"].sum()), self.k,
                         self.masks, hulls, self.sources, self.geom)


def _gate(f: PiecewiseAffineMap, cert: StageCertificate):
    ratio = lipschitz(f)
    if ratio > cert.r:
        raise RatioViolation(ratio, cert.r)


def meet_count(f: PiecewiseAffineMap, geom: StageGeometry) -> MeetCount:
    _gate(f, geom.cert)
    return _Counter(f, geom).run()


@dataclass(frozen=True)
class NoncoverageWitness:
    block: str
    j: int  # 1-based index of an untouched target interval
    point: Fraction  # the skeleton point at its centre
    m_Y: int
    m_Z: int
    k: int


def certify_noncoverage(f: PiecewiseAffineMap, geom: StageGeometry, mc: Optional[MeetCount] = None):
    """Return an untouched Y_j (or Z_j); raises CoverageFault if none exists."""
    if mc is None:
        mc = meet_count(f, geom)
    if min(mc.m_Y, mc.m_Z) >= mc.k:
        raise CoverageFault(f"stage {geom.cert.stage}: m_Y = {mc.m_Y}, m_Z = {mc.m_Z}, k = {mc.k}")
    block = "Y" if mc.m_Y < mc.k else "Z"
    union = np.logical_or.reduce([mc.masks[(g, block)] for g in GROUPS])
    j = int(np.argmin(union)) + 1
    pts = geom.cert.ys if block == "Y" else geom.cert.zs
    return NoncoverageWitness(block, j, pts[j - 1], mc.m_Y, mc.m_Z, mc.k)


def counting_checks(mc: MeetCount, geom: StageGeometry) -> list[tuple[str, object, object, bool]]:
    """The per-map inequalities behind the counting argument, as (name, lhs, rhs, ok)."""
    cert = geom.cert
    k, d, r, n = cert.k, cert.d, cert.r, cert.n
    gap = geom.block_gap()
    out = []
    for g in ("Y", "Z"):
        diam = mc.hulls[g].length
        out.append((f"diam f(U{g}) < dist(UY, UZ)", diam, gap, diam < gap))
        both = mc.count(g, "Y") > 0 and mc.count(g, "Z") > 0
        out.append((f"f(U{g}) meets at most one block", int(both), 0, not both))
        for b in BLOCKS:
            t = mc.count(g, b)
            lim = diam / d + 2
            out.append((f"t({g}->{b}) < diam f(U{g})/d + 2", t, lim, t < lim))
            out.append((f"t({g}->{b}) < r*k + 2", t, r * k + 2, t < r * k + 2))
    # pick a block missed by the image of one progression block
    choice = next(((b, g) for b in BLOCKS for g in ("Y", "Z") if mc.count(g, b) == 0), None)
    out.append(("some f(U block) misses a target block", int(choice is not None), 1, choice is not None))
    if choice is not None:
        b, g = choice
        other = "Z" if g == "Y" else "Y"
        m_b = mc.m_Y if b == "Y" else mc.m_Z
        x_part = mc.count("X", b)
        out.append((f"X-attributable meets of {b} <= n", x_part, n, x_part <= n))
        bound = x_part + mc.count(other, b)
        out.append((f"m_{b} <= X-part + t({other}->{b})", m_b, bound, m_b <= bound))
        out.append((f"m_{b} < r*k + 2 + n", m_b, r * k + 2 + n, m_b < r * k + 2 + n))
        out.append(("r*k + 2 + n < k", r * k + 2 + n, k, r * k + 2 + n < k))
    out.append(("min(m_Y, m_Z) < k", min(mc.m_Y, mc.m_Z), k, min(mc.m_Y, mc.m_Z) < k))
    return out


def coverage_report(stage: int, f: PiecewiseAffineMap, geom: StageGeometry) -> dict:
    mc = meet_count(f, geom)
    checks = counting_checks(mc, geom)
    passed = all(ok for *_, ok in checks)
    wit = certify_noncoverage(f, geom, mc) if passed else None
    return {
        "stage": stage,
        "map": f.to_json(),
        "m_Y": mc.m_Y,
        "m_Z": mc.m_Z,
        "witness_block": wit.block if wit else None,
        "witness_j": wit.j if wit else None,
        "pass": passed,
    }


def brute_force_coverage(K: FinSet, f: PiecewiseAffineMap, portion: RInterval) -> bool:
    """True iff K ∩ (lo, hi) is nonempty and contained in f(K), by exhaustion."""
    inside = [x for x in K if portion.lo < x < portion.hi]
    if not inside:
        return False
    image = {eval_map(f, x) for x in K}
    return all(y in image for y in inside)


# -- trial maps ------------------------------------------------------------------

def _scaled_slope(rng: random.Random, r: Fraction, den: int = 64) -> Fraction:
    return r * Fraction(rng.randint(-den, den), den)


def random_affine(rng: random.Random, r: Fraction) -> PiecewiseAffineMap:
    s = _scaled_slope(rng, r)
    c = random_rational(rng, Fraction(-1), Fraction(2), 256)
    return PiecewiseAffineMap.affine(s, c, -1, 2)


def random_piecewise(rng: random.Random, r: Fraction) -> PiecewiseAffineMap:
    count = rng.randint(2, 9)
    ts = sorted({random_rational(rng, Fraction(-1, 2), Fraction(3, 2), 512) for _ in range(count)})
    v = random_rational(rng, Fraction(0), Fraction(1), 256)
    pts = [(ts[0], v)]
    for t0, t1 in zip(ts, ts[1:]):
        v = v + _scaled_slope(rng, r) * (t1 - t0)
        pts.append((t1, v))
    return PiecewiseAffineMap(pts)


def _anchored(src: Fraction, dst: Fraction, s: Fraction) -> PiecewiseAffineMap:
    """x -> dst + s(x - src) over [-1, 2]."""
    return PiecewiseAffineMap([(Fraction(-1), dst + s * (-1 - src)), (Fraction(2), dst + s * (2 - src))])


def translation_family(rng: random.Random, geom: StageGeometry) -> PiecewiseAffineMap:
    """Affine maps sending a chosen block point onto (or next to) the Y/Z blocks."""
    cert = geom.cert
    r, d = cert.r, cert.d
    ys, zs = cert.ys, cert.zs
    sources = [cert.x_i0, ys[0], ys[len(ys) // 2], ys[-1], zs[0], zs[-1],
               geom.incoming[rng.randrange(len(geom.incoming))]]
    targets = [ys[0], ys[len(ys) // 2], ys[-1], zs[0], zs[len(zs) // 2]]
    s = r if rng.random() < 0.5 else -r
    if rng.random() < 0.3:
        s = _scaled_slope(rng, r)
    shift = d * Fraction(rng.randint(-8, 8), 8)
    return _anchored(rng.choice(sources), rng.choice(targets) + shift, s)


def fold_family(rng: random.Random, geom: StageGeometry, max_pieces: int = 120) -> PiecewiseAffineMap:
    """Zig-zag of slope ±r sweeping the Y (or Z) block back and forth."""
    cert = geom.cert
    r, e = cert.r, geom.pad
    block = cert.ys if rng.random() < 0.5 else cert.zs
    lo_v, hi_v = block[0] - e, block[-1] + e
    width = (hi_v - lo_v) / r
    centre = rng.choice([cert.x_i0, cert.ys[0], cert.zs[-1], (cert.a + cert.b) / 2])
    start = centre - width * rng.randint(1, max_pieces // 2) - width * Fraction(rng.randint(0, 7), 8)
    pts, t, up = [], start, rng.random() < 0.5
    for _ in range(max_pieces + 1):
        pts.append((t, lo_v if up else hi_v))
        t += width
        up = not up
    return PiecewiseAffineMap(pts)


def hunter_family(rng: random.Random, geom: StageGeometry, max_sources: int = 24) -> PiecewiseAffineMap:
    """Interpolates nearby incoming points onto distinct Y_j (Z_j) plus a
    ratio-r self-map of the block, pruned until every slope is at most r."""
    cert = geom.cert
    r, k = cert.r, cert.k
    block = cert.ys if rng.random() < 0.5 else cert.zs
    pts = geom.incoming.points
    centre = cert.x_i0
    near = sorted(pts, key=lambda x: abs(x - centre))[: max_sources]
    data = {}
    for x in near:
        data[x] = block[rng.randrange(k)]
    # block self-map anchored at a random member
    anchor = block[rng.randrange(k)]
    for x in (cert.ys[0], cert.ys[-1], cert.zs[0], cert.zs[-1]):
        data[x] = anchor + r * (x - anchor) * (1 if rng.random() < 0.5 else -1)
    nodes = sorted(data.items())
    changed = True
    while changed and len(nodes) > 1:
        changed = False
        for i in range(len(nodes) - 1):
            (x0, v0), (x1, v1) = nodes[i], nodes[i + 1]
            if abs(v1 - v0) > r * (x1 - x0):
                del nodes[i + 1 if rng.random() < 0.5 else i]
                changed = True
                break
    return PiecewiseAffineMap(nodes)


FAMILIES = ("affine", "piecewise", "translate", "fold", "hunter")


def trial_map(family: str, rng: random.Random, geom: StageGeometry) -> PiecewiseAffineMap:
    r = geom.cert.r
    if family == "affine":
        return random_affine(rng, r)
    if family == "piecewise":
        return random_piecewise(rng, r)
    if family == "translate":
        return translation_family(rng, geom)
    if family == "fold":
        return fold_family(rng, geom)
    if family == "hunter":
        return hunter_family(rng, geom)
    raise ValueError(f"unknown map family {family!r}")


def trial_maps(geom: StageGeometry, seed: int, count: int, families=FAMILIES):
    """``count`` seeded maps of ratio <= r, cycling through ``families``."""
    rng = random.Random(seed)
    out = []
    for i in range(count):
        family = families[i % len(families)]
        f = trial_map(family, rng, geom)
        assert lipschitz(f) <= geom.cert.r, (family, lipschitz(f))
        out.append((family, f))
    return out
