import bisect
import random
from fractions import Fraction as F

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bfpp.contraction import PiecewiseAffineMap, image_interval, lipschitz
from bfpp.coverage import (
    FAMILIES,
    CoverageFault,
    RatioViolation,
    StageGeometry,
    brute_force_coverage,
    certify_noncoverage,
    counting_checks,
    coverage_report,
    decompose_runs,
    meet_count,
    trial_maps,
)
from bfpp.numerics import FinSet, RInterval
from bfpp.witness import FiniteHull, Requirement, StageCertificate, refine_stage


def naive_meets(f, geom):
    """Exact meet sets by imaging every padded interval and scanning its targets."""
    cert, e = geom.cert, geom.pad
    result = {}
    for block, targets in (("Y", list(cert.ys)), ("Z", list(cert.zs))):
        met = set()
        for centre in list(geom.incoming) + list(cert.ys) + list(cert.zs):
            img = image_interval(f, RInterval(centre - e, centre + e))
            lo = bisect.bisect_left(targets, img.lo - e)
            hi = bisect.bisect_right(targets, img.hi + e)
            met.update(range(lo, hi))
        result[block] = met
    return result


def union_mask(mc, block):
    return {j for j in range(mc.k) if mc.met(block, j + 1)}


@pytest.fixture(scope="module")
def worked_stage():
    hull = FiniteHull(FinSet([0, 1]), F(29, 116))
    _, cert = refine_stage(hull, Requirement(F(3, 4), 2, F(1, 2)))
    return StageGeometry.build(cert, hull.skeleton)


@pytest.fixture(scope="module")
def stages(small_history):
    hulls, certs = small_history
    return {c.stage: StageGeometry.build(c, hulls[c.stage].skeleton) for c in certs if c.inserted}


class TestSpecExamples:
    def test_constant_map(self, worked_stage):
        f = PiecewiseAffineMap.constant(0)
        mc = meet_count(f, worked_stage)
        assert (mc.m_Y, mc.m_Z) == (0, 0)
        assert certify_noncoverage(f, worked_stage).j == 1

    def test_half_plus_quarter(self, worked_stage):
        f = PiecewiseAffineMap.affine(F(1, 2), F(1, 4))
        mc = meet_count(f, worked_stage)
        assert mc.m_Y == 0
        # every image stays at or below 3/4 + eps'/2, under the first Y-ball
        assert mc.hulls["Y"].hi <= F(3, 4) and mc.hulls["Z"].hi <= F(3, 4)
        wit = certify_noncoverage(f, worked_stage)
        assert wit.block == "Y" and not mc.met("Y", wit.j)

    def test_ratio_gate(self, worked_stage):
        with pytest.raises(RatioViolation) as info:
            meet_count(PiecewiseAffineMap([(0, 0), (1, F(3, 4))]), worked_stage)
        assert info.value.ratio == F(3, 4) and info.value.bound == F(1, 2)

    def test_brute_force_examples(self):
        K = FinSet([0, F(1, 2), 1])
        portion = RInterval(F(1, 4), F(3, 4))
        assert brute_force_coverage(K, PiecewiseAffineMap.affine(F(1, 2), 0), portion)
        assert not brute_force_coverage(K, PiecewiseAffineMap.affine(F(1, 3), 0), portion)
        assert not brute_force_coverage(K, PiecewiseAffineMap.constant(0), RInterval(F(1, 8), F(3, 8)))

    def test_broken_certificate_is_a_hard_fault(self):
        # k = 1 violates k > (n+2)/(1-r); a 3/4-map then reaches both blocks
        cert = StageCertificate(0, Requirement(0, 1, F(9, 10)), "Inserted", 2, F(1, 4), F(1, 20),
                                x_i0=F(0), a=F(0), b=F(1), k=1, d=F(1, 5),
                                ys=FinSet([F(1, 5)]), zs=FinSet([F(4, 5)]), hausdorff=F(1, 5))
        geom = StageGeometry.build(cert, FinSet([0, 1]))
        f = PiecewiseAffineMap.affine(F(3, 4), F(1, 5))
        with pytest.raises(CoverageFault):
            certify_noncoverage(f, geom)


class TestRuns:
    def test_decompose(self):
        runs = decompose_runs([F(0), F(1, 4), F(1, 2), F(3, 4), F(9, 10), F(1)])
        assert [(r.start, r.step, r.length) for r in runs] == [
            (0, F(1, 4), 4), (F(9, 10), F(1, 10), 2)]
        assert decompose_runs([F(5)])[0].length == 1

    @given(st.lists(st.fractions(0, 1, max_denominator=20), min_size=1, max_size=30, unique=True))
    def test_runs_reassemble(self, pts):
        pts = sorted(pts)
        runs = decompose_runs(pts)
        assert [r.at(i) for r in runs for i in range(r.length)] == pts

    def test_geometry_requires_inserted(self, small_history):
        hulls, certs = small_history
        with pytest.raises(ValueError):
            StageGeometry.build(certs[1], hulls[1].skeleton)


@st.composite
def maps_for(draw, r):
    ts = sorted(set(draw(st.lists(st.fractions(-1, 2, max_denominator=400), min_size=1, max_size=6))))
    v = draw(st.fractions(-1, 2, max_denominator=400))
    pts = [(ts[0], v)]
    for t0, t1 in zip(ts, ts[1:]):
        v += draw(st.fractions(-r, r, max_denominator=50)) * (t1 - t0)
        pts.append((t1, v))
    return PiecewiseAffineMap(pts)


class TestMeetOracle:
    @pytest.mark.parametrize("stage", [0, 2, 3])
    def test_trial_maps_match_naive(self, stages, stage):
        geom = stages[stage]
        for family, f in trial_maps(geom, seed=stage, count=25):
            mc = meet_count(f, geom)
            naive = naive_meets(f, geom)
            assert union_mask(mc, "Y") == naive["Y"], family
            assert union_mask(mc, "Z") == naive["Z"], family

    def test_large_stage_matches_naive(self, stages):
        geom = stages[5]
        for family, f in trial_maps(geom, seed=99, count=10):
            mc = meet_count(f, geom)
            naive = naive_meets(f, geom)
            assert (mc.m_Y, mc.m_Z) == (len(naive["Y"]), len(naive["Z"])), family
            assert union_mask(mc, "Y") == naive["Y"]

    @settings(max_examples=60, deadline=None)
    @given(st.data())
    def test_random_maps_match_naive(self, stages, data):
        geom = stages[data.draw(st.sampled_from([0, 2, 3]))]
        f = data.draw(maps_for(geom.cert.r))
        mc = meet_count(f, geom)
        naive = naive_meets(f, geom)
        assert union_mask(mc, "Y") == naive["Y"] and union_mask(mc, "Z") == naive["Z"]

    def test_sources_are_real_meets(self, stages):
        geom = stages[3]
        e = geom.pad
        for _, f in trial_maps(geom, seed=5, count=10):
            mc = meet_count(f, geom)
            for block, pts in (("Y", geom.cert.ys), ("Z", geom.cert.zs)):
                for j in range(1, geom.k + 1, 7):
                    src = mc.source_of(block, j)
                    if src is None:
                        assert not mc.met(block, j)
                        continue
                    _, centre = src
                    img = image_interval(f, RInterval(centre - e, centre + e))
                    assert img.meets(RInterval(pts[j - 1] - e, pts[j - 1] + e))


class TestCounting:
    @pytest.mark.parametrize("stage", [0, 2, 3, 5])
    def test_all_families_certify(self, stages, stage):
        geom = stages[stage]
        for family, f in trial_maps(geom, seed=1000 + stage, count=30):
            assert lipschitz(f) <= geom.cert.r
            mc = meet_count(f, geom)
            failed = [c for c in counting_checks(mc, geom) if not c[3]]
            assert failed == [], (family, failed)
            wit = certify_noncoverage(f, geom, mc)
            assert min(mc.m_Y, mc.m_Z) < geom.k
            assert not mc.met(wit.block, wit.j)

    @settings(max_examples=60, deadline=None)
    @given(st.data())
    def test_counting_bound_for_random_maps(self, stages, data):
        geom = stages[data.draw(st.sampled_from([0, 2, 3]))]
        f = data.draw(maps_for(geom.cert.r))
        mc = meet_count(f, geom)
        assert all(ok for *_, ok in counting_checks(mc, geom))

    def test_adversarial_families_push_meets(self, stages):
        geom = stages[3]
        best = max(max(meet_count(f, geom).m_Y, meet_count(f, geom).m_Z)
                   for _, f in trial_maps(geom, seed=7, count=25, families=("fold", "hunter", "translate")))
        # the bound is approached, not trivially satisfied
        assert best > geom.cert.r * geom.k

    def test_untouched_point_is_not_covered(self, stages, small_history):
        hulls, _ = small_history
        for stage in (0, 2):
            geom = stages[stage]
            skeleton = hulls[stage + 1].skeleton
            req = geom.cert.requirement
            for _, f in trial_maps(geom, seed=stage, count=10):
                wit = certify_noncoverage(f, geom)
                image = {f(x) for x in skeleton}
                assert wit.point in skeleton and req.p < wit.point < req.q
                assert wit.point not in image
                assert not brute_force_coverage(skeleton, f, RInterval(req.p, req.q))


class TestReports:
    def test_report_shape(self, stages):
        geom = stages[2]
        _, f = trial_maps(geom, seed=3, count=1)[0]
        rep = coverage_report(2, f, geom)
        assert set(rep) >= {"stage", "map", "m_Y", "m_Z", "witness_j", "pass"}
        assert rep["pass"] and rep["stage"] == 2
        assert PiecewiseAffineMap.from_json(rep["map"]) == f

    def test_trial_maps_deterministic(self, stages):
        geom = stages[2]
        a = [f.to_json() for _, f in trial_maps(geom, 17, 10)]
        b = [f.to_json() for _, f in trial_maps(geom, 17, 10)]
        assert a == b
        assert {fam for fam, _ in trial_maps(geom, 17, 10)} == set(FAMILIES)


def brute_oracle(K, f, lo, hi):
    """Independent definition: every point of K strictly between lo and hi has a preimage in K."""
    portion = [x for x in K.points if lo < x and x < hi]
    if len(portion) == 0:
        return False
    for y in portion:
        if not any(f(x) == y for x in K.points):
            return False
    return True


@settings(max_examples=200)
@given(st.lists(st.fractions(0, 1, max_denominator=8), min_size=1, max_size=8, unique=True),
       st.fractions(-1, 1, max_denominator=4), st.fractions(-1, 1, max_denominator=8),
       st.fractions(-1, 2, max_denominator=8), st.fractions(-1, 2, max_denominator=8))
def test_brute_force_matches_oracle(pts, s, c, u, v):
    K, f = FinSet(pts), PiecewiseAffineMap.affine(s, c)
    if u == v:
        return
    lo, hi = min(u, v), max(u, v)
    assert brute_force_coverage(K, f, RInterval(lo, hi)) == brute_oracle(K, f, lo, hi)


def test_brute_force_seeded():
    rng = random.Random(0)
    for _ in range(300):
        K = FinSet(F(rng.randint(0, 8), 8) for _ in range(rng.randint(1, 8)))
        f = PiecewiseAffineMap.affine(F(rng.randint(-4, 4), 4), F(rng.randint(-8, 8), 8))
        lo = F(rng.randint(-8, 8), 8)
        hi = lo + F(rng.randint(1, 8), 8)
        assert brute_force_coverage(K, f, RInterval(lo, hi)) == brute_oracle(K, f, lo, hi)
