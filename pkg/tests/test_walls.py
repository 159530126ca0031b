import random
from fractions import Fraction

import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from conftest import blowup, char_vectors, plane, quadric, rationals, rq
from instances import INSTANCES, check_instance, materialize
from oracles import raw, wall_function
from stabwalls.charge import StabilityPoint, central_charge
from stabwalls.lattice import CharVector, InputError, mukai_pair, proportional
from stabwalls.walls import (
    NECESSARY,
    Caps,
    Chamber,
    OnWall,
    STChart,
    Wall,
    WallLocus,
    chamber_of,
    enumerate_wall_classes,
    gieseker_threshold,
    locus_in_chart,
    mark_nested,
    nested_circles_check,
    on_wall,
    ray_crossing,
    wall_locus,
    window_walls,
)
from stabwalls.ximap import fiber_circle, xi, xi_vector

V = CharVector.of(2, (1,), -3)
O = CharVector.of(1, (0,), 0)
RHO = CharVector.point(1)


def cv(r, c1, s):
    return CharVector.of(r, c1, s)


@pytest.fixture
def gieseker_walls(P2):
    return enumerate_wall_classes(V, (-1,), (1,), P2).walls


class TestOnWall:
    def test_examples(self, P2):
        for s, t_sq in [(-3, 9), (-1, 5), (-5, 5)]:
            assert on_wall(V, O, StabilityPoint((s,), (1,), t_sq), P2)
        assert not on_wall(V, O, StabilityPoint((-1,), (1,), 4), P2)
        assert not on_wall(V, V.scale(2), StabilityPoint((-1,), (1,), 5), P2)
        assert not on_wall(O, cv(0, (1,), 0), StabilityPoint((-1,), (1,)), P2)

    @given(char_vectors(2), char_vectors(2), rationals(), rationals(), rationals(1, 9))
    def test_agrees_with_xi(self, v, v1, b0, b1, q):
        L = quadric()
        assume(not proportional(v, v1))
        sp = StabilityPoint((b0, b1), L.H, q)
        assume(not central_charge(v, sp, L).vanishes)
        assert on_wall(v, v1, sp, L) == (mukai_pair(xi_vector(v, sp, L), v1, L) == 0)

    @given(char_vectors(2), char_vectors(2), rationals(), rationals())
    def test_points_of_locus_are_on_wall(self, v, v1, b0, d):
        L = blowup()
        assume(not proportional(v, v1))
        chart = STChart.make((0, b0), L.H, (0, d))
        loc = locus_in_chart(v, v1, chart, L)
        if loc.kind == "circle":
            sp = chart.point(loc.center, loc.radius_sq)
        elif loc.kind == "line":
            sp = chart.point(loc.line_s, 1)
        else:
            return
        assume(not central_charge(v, sp, L).vanishes)
        assert on_wall(v, v1, sp, L)
        assert mukai_pair(xi_vector(v, sp, L), v1, L) == 0

    @given(char_vectors(1), char_vectors(1), rationals(), rationals(), rationals(1, 9))
    def test_locus_equation_matches_direct_evaluation(self, v, v1, b0, s, t_sq):
        L = plane()
        assume(not proportional(v, v1))
        chart = STChart.make((b0,), (1,))
        loc = locus_in_chart(v, v1, chart, L)
        sp = chart.point(s, t_sq)
        g = wall_function(L.gram, raw(v), raw(v1), sp.beta, sp.omega, t_sq)
        assert g == loc.scale * loc.equation(s, t_sq)


class TestWallLocus:
    def test_gieseker_example(self, P2):
        w = wall_locus(V, O, (1,), None, P2, beta0=(0,))
        assert w.locus.kind == "circle"
        assert (w.locus.center, w.locus.radius_sq) == (-3, 9)
        assert w.locus.equation(0, 0) == 0

    def test_rho_line(self, P2):
        w = wall_locus(O, RHO, (1,), None, P2)
        assert w.locus.kind == "line" and w.locus.line_s == 0

    def test_through_degenerate_ray(self, P2):
        # (v1, H + (H, delta) rho) = 0 with delta = H/2
        v1 = cv(2, (1,), 0)
        assert mukai_pair(v1, cv(0, (1,), Fraction(1, 2)), P2) == 0
        w = wall_locus(V, v1, (1,), None, P2)
        assert w.locus.kind == "line" and w.locus.line_s == 0

    def test_proportional_refused(self, P2):
        with pytest.raises(InputError):
            wall_locus(V, V.scale(3), (1,), None, P2)

    @pytest.mark.parametrize("r", [1, 2, 3])
    @pytest.mark.parametrize("k", [0, 1])
    def test_structure_sheaf_wall_through_origin(self, P2, r, k):
        # a <= -(K, H)/2 - r - 1 with (K, H) = -3
        a = Fraction(1, 2) - r - k
        a = Fraction(int(a) if a == int(a) else int(a) - 1)
        v = cv(r, (1,), a)
        w = wall_locus(v, O, (1,), None, P2, beta0=(0,))
        assert (w.locus.center, w.locus.radius_sq) == (a, a * a)
        for s in (a, a / 2, 2 * a - Fraction(1, 3)):
            assert w.locus.equation(s, -s * (s - 2 * a)) == 0
        res = enumerate_wall_classes(v, (a,), (1,), P2)
        assert O.ray_key() in {x.v1.ray_key() for x in res.walls}


class TestEnumeration:
    @pytest.mark.parametrize("inst", INSTANCES, ids=[i[0] for i in INSTANCES])
    def test_matches_oracle(self, inst):
        name, ok, count, problems = check_instance(inst)
        assert ok, problems

    def test_constraints_hold(self, P2):
        res = enumerate_wall_classes(V, (-1,), (1,), P2)
        r, d, a = 2, 3, Fraction(-3, 2)
        assert res.d_beta == d
        for w in res.walls:
            v1 = w.v1
            assert not proportional(v1, V)
            t_sq = ray_crossing(V, w, (-1,), (1,), P2)
            assert t_sq is not None and t_sq > 0
            assert NECESSARY in w.tags or not (
                mukai_pair(v1, v1, P2) >= 0 and mukai_pair(V - v1, V - v1, P2) >= 0 and mukai_pair(v1, V - v1, P2) > 0
            )

    def test_gieseker_family(self, gieseker_walls):
        keys = {w.v1.ray_key() for w in gieseker_walls}
        assert O.ray_key() in keys
        assert len(gieseker_walls) == 7

    def test_degree_precondition(self, P2):
        with pytest.raises(InputError):
            enumerate_wall_classes(cv(1, (0,), -1), (0,), (1,), P2)
        with pytest.raises(InputError):
            enumerate_wall_classes(cv(-1, (0,), 0), (-1,), (1,), P2)

    def test_truncation_is_reported(self, P2):
        full = enumerate_wall_classes(V, (-1,), (1,), P2)
        assert not full.truncated
        cut = enumerate_wall_classes(V, (-1,), (1,), P2, Caps(r1=0))
        assert cut.truncated and cut.bounds["r1"] == 0
        few = enumerate_wall_classes(V, (-1,), (1,), P2, Caps(max_classes=2))
        assert few.truncated and any("stopped" in n for n in few.notes)
        small = enumerate_wall_classes(cv(2, (1, 0), -2), (-1, 0), (1, 0), blowup(), Caps(dsq=0))
        assert small.truncated

    def test_caps_validation(self):
        with pytest.raises(InputError):
            Caps(den=0)
        with pytest.raises(InputError):
            Caps(ch2="other")
        with pytest.raises(InputError):
            Caps(r1=-1)

    def test_candidate_filter(self, P2):
        res = enumerate_wall_classes(V, (-1,), (1,), P2, candidate_filter=lambda x: x.r == 1)
        assert res.walls and all(w.v1.r == 1 for w in res.walls)

    def test_deterministic_order(self, P2):
        a = enumerate_wall_classes(V, (-1,), (1,), P2).walls
        b = enumerate_wall_classes(V, (-1,), (1,), P2).walls
        assert [w.v1 for w in a] == [w.v1 for w in b]
        assert [w.v1.entries() for w in a] == sorted(w.v1.entries() for w in a)


class TestChambers:
    def test_gieseker_exterior(self, P2, gieseker_walls):
        ch = chamber_of(V, StabilityPoint((-1,), (3,)), gieseker_walls, P2)
        assert isinstance(ch, Chamber) and ch.is_gieseker
        far = chamber_of(V, StabilityPoint((-1,), (1,), 10 ** 4), gieseker_walls, P2)
        assert far.id == ch.id

    def test_on_wall(self, P2, gieseker_walls):
        res = chamber_of(V, StabilityPoint((-3,), (1,), 9), gieseker_walls, P2)
        assert isinstance(res, OnWall)
        assert res.label == "on wall (1,0,0)"

    def test_inside_not_gieseker(self, P2, gieseker_walls):
        # just under the outermost wall crossing on the ray
        ts = sorted(ray_crossing(V, w, (-1,), (1,), P2) for w in gieseker_walls)
        ch = chamber_of(V, StabilityPoint((-1,), (1,), ts[-1] * Fraction(99, 100)), gieseker_walls, P2)
        assert isinstance(ch, Chamber) and not ch.is_gieseker

    def test_threshold_clears_walls(self, P2, gieseker_walls):
        thr = gieseker_threshold(V, (-1,), (1,), P2)
        assert all(ray_crossing(V, w, (-1,), (1,), P2) <= thr for w in gieseker_walls)

    def test_fiber_invariance(self, P2, gieseker_walls):
        rng = random.Random(3)
        for _ in range(30):
            sp = StabilityPoint((rq(rng),), (1,), Fraction(rng.randint(1, 40), rng.randint(1, 4)))
            a = chamber_of(V, sp, gieseker_walls, P2)
            u = xi(V, sp, P2)
            f = fiber_circle(V, u, (1,), P2)
            if not hasattr(f, "center_s"):
                continue
            other = f.point(f.center_s)
            b = chamber_of(V, other, gieseker_walls, P2)
            assert type(a) is type(b)
            if isinstance(a, Chamber):
                assert a.id == b.id and a.is_gieseker == b.is_gieseker

    def test_labels_separate(self, P2, gieseker_walls):
        ts = sorted({ray_crossing(V, w, (-1,), (1,), P2) for w in gieseker_walls})
        samples = [ts[0] / 2] + [(x + y) / 2 for x, y in zip(ts, ts[1:])] + [ts[-1] + 1]
        ids = [chamber_of(V, StabilityPoint((-1,), (1,), q), gieseker_walls, P2).id for q in samples]
        assert len(set(ids)) == len(ts) + 1

    @given(rationals(-8, 2), st.integers(1, 200))
    def test_large_volume_is_gieseker(self, b, k):
        L = plane()
        assume(b < Fraction(1, 2))
        walls = enumerate_wall_classes(V, (b,), (1,), L).walls
        thr = gieseker_threshold(V, (b,), (1,), L)
        sp = StabilityPoint((b,), (1,), max(thr, Fraction(0)) + k)
        far = StabilityPoint((b,), (1,), max(thr, Fraction(0)) + 10 ** 6)
        assert chamber_of(V, sp, walls, L).id == chamber_of(V, far, walls, L).id
        assert chamber_of(V, sp, walls, L).is_gieseker


def circle(center, rsq):
    return WallLocus("circle", STChart.make((0,), (1,)), Fraction(center), Fraction(rsq))


class TestNesting:
    def test_single(self, gieseker_walls):
        assert nested_circles_check(gieseker_walls[:1]).ok

    @pytest.mark.parametrize("inst", [i for i in INSTANCES if i[1] is plane], ids=lambda i: i[0])
    def test_rank_one_families(self, inst):
        name, L, v, beta, _ = materialize(inst)
        walls = enumerate_wall_classes(v, beta, L.H, L).walls
        rep = nested_circles_check(walls)
        assert rep.ok, rep.violations
        assert all("verified-nested" in w.tags for w in mark_nested(walls))

    def test_injected_crossing(self, gieseker_walls):
        a = Wall(cv(1, (0,), 0), circle(0, 4))
        b = Wall(cv(0, (1,), 0), circle(2, 4))
        rep = nested_circles_check(list(gieseker_walls) + [a, b])
        assert not rep.ok
        assert (a.v1, b.v1) in rep.violations
        assert not any("verified-nested" in w.tags for w in mark_nested([a, b]))

    def test_tangent_and_disjoint_allowed(self):
        walls = [Wall(O, circle(0, 4)), Wall(RHO, circle(1, 1)), Wall(cv(0, (1,), 0), circle(10, 1))]
        assert nested_circles_check(walls).ok


class TestWindow:
    def test_gieseker_window_empty(self, P2):
        res = window_walls(V, Fraction(-1, 2), 0, P2)
        assert res.walls == [] and not res.truncated

    def test_wider_window_sees_walls(self, P2):
        res = window_walls(V, Fraction(-3, 2), 0, P2)
        assert any(w.v1.ray_key() == O.ray_key() for w in res.walls)

    def test_window_against_direct_scan(self, P2):
        # every wall that meets a ray from the strip is reported
        res = window_walls(V, Fraction(-3, 2), 0, P2)
        keys = {w.v1.ray_key() for w in res.walls}
        delta = V.delta()
        for s in [Fraction(-3, 2), Fraction(-1), Fraction(-1, 3), Fraction(-1, 10)]:
            beta = (delta[0] + s,)
            for w in enumerate_wall_classes(V, beta, (1,), P2).walls:
                assert w.v1.ray_key() in keys

    def test_window_errors(self, P2, Bl):
        with pytest.raises(InputError):
            window_walls(V, -5, 0, P2)
        with pytest.raises(InputError):
            window_walls(V, 0, Fraction(-1, 2), P2)
        with pytest.raises(InputError):
            window_walls(cv(1, (0, 0), -1), -1, 0, Bl)
