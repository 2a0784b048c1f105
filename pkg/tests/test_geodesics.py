"""Tests for geodesics: integration, shooting, Birkhoff shortening, sweepouts."""

import csv
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from systolab.errors import NoConvergence, StepTooLarge
from systolab.harmonics import SphericalFunction
from systolab.metric import (
    DiscreteClosedCurve,
    curve_length,
    make_variation,
)
from systolab.circles import CircleSpec, funk_transform, great_circle_points
from systolab.geodesics import (
    COLLAPSE_THRESHOLD,
    GeodesicResult,
    Sweepout,
    SystoleReport,
    TightenResult,
    birkhoff_shorten,
    build_sweepout,
    estimate_systole,
    fibonacci_axes,
    geodesic_arc,
    integrate_geodesic,
    length_increase_violations,
    tighten_sweepout,
    write_trace,
    write_witness_curve,
    _batch_metric_lengths,
    _initial_width,
)

TWO_PI = 2.0 * math.pi

ROUND = make_variation(SphericalFunction.zeros(4), 0.0)
ZONAL = make_variation(SphericalFunction.harmonic(2, 0), 0.1)
MIXED = make_variation(SphericalFunction.from_pairs([(2, 1, 1.0), (4, 3, 0.5)]), 0.1)
POLE = np.array([0.0, 0.0, 1.0])

# the Funk transform of Y20 at the pole axis and at an equatorial axis
Y20_POLE = 0.5 * math.sqrt(5.0 / math.pi)
FUNK_Y20_POLE = -math.pi * Y20_POLE
FUNK_Y20_EQUATOR = math.pi * Y20_POLE / 2.0


def random_tangent_starts(count, seed):
    rng = np.random.default_rng(seed)
    p = rng.normal(size=(count, 3))
    p /= np.linalg.norm(p, axis=-1, keepdims=True)
    v = rng.normal(size=(count, 3))
    v -= np.sum(v * p, axis=-1, keepdims=True) * p
    v /= np.linalg.norm(v, axis=-1, keepdims=True)
    return p, v


class TestIntegrateGeodesic:
    def test_round_great_circle_closes(self):
        p, v = random_tangent_starts(50, seed=1)
        path = integrate_geodesic(ROUND, p, v, TWO_PI, h=5e-3)
        assert np.max(np.linalg.norm(path.endpoint - p, axis=-1)) < 1e-8

    def test_round_antipode_at_half_period(self):
        p, v = random_tangent_starts(8, seed=2)
        path = integrate_geodesic(ROUND, p, v, math.pi, h=5e-3)
        assert np.max(np.linalg.norm(path.endpoint + p, axis=-1)) < 1e-9

    def test_round_cumulative_length_is_time(self):
        p = np.array([1.0, 0.0, 0.0])
        v = np.array([0.0, 1.0, 0.0])
        path = integrate_geodesic(ROUND, p, v, TWO_PI, h=5e-3)
        assert path.lengths[-1] == pytest.approx(TWO_PI, abs=1e-9)
        # length accumulates linearly at unit speed
        mid = len(path.times) // 2
        assert path.lengths[mid] == pytest.approx(path.times[mid], abs=1e-9)

    def test_fourth_order_in_step_size(self):
        p = np.array([1.0, 0.0, 0.0])
        v = np.array([0.0, 1.0, 0.0])
        ends = []
        for h in (0.01, 0.005, 0.0025):
            ends.append(integrate_geodesic(MIXED, p, v, 2.0, h=h).endpoint)
        coarse = np.linalg.norm(ends[0] - ends[1])
        fine = np.linalg.norm(ends[1] - ends[2])
        assert 11.0 < coarse / fine < 22.0

    def test_energy_conservation(self):
        p, v = random_tangent_starts(5, seed=3)
        path = integrate_geodesic(MIXED, p, v, TWO_PI, h=2e-3)
        assert path.energy_drift < 1e-10

    def test_length_matches_polygon_quadrature(self):
        # the integrated metric length agrees with the midpoint-rule length
        # of the densely sampled trajectory
        p = np.array([1.0, 0.0, 0.0])
        v = np.array([0.0, 0.8, 0.6])
        path = integrate_geodesic(ZONAL, p, v, 3.0, h=1e-3)
        pts = path.points
        mids = pts[:-1] + pts[1:]
        mids /= np.linalg.norm(mids, axis=-1, keepdims=True)
        w = ZONAL.w(mids)
        arcs = np.arccos(np.clip(np.sum(pts[:-1] * pts[1:], axis=-1), -1, 1))
        assert path.lengths[-1] == pytest.approx(float(np.sum(w * arcs)), abs=1e-6)

    def test_step_cap(self):
        p = np.array([1.0, 0.0, 0.0])
        v = np.array([0.0, 1.0, 0.0])
        with pytest.raises(ValueError):
            integrate_geodesic(ROUND, p, v, 1.0, h=0.02)

    def test_drift_guard(self):
        p = np.array([1.0, 0.0, 0.0])
        v = np.array([0.0, 200.0, 0.0])
        with pytest.raises(StepTooLarge):
            integrate_geodesic(ZONAL, p, v, 1.0, h=1e-2)

    def test_zero_velocity_rejected(self):
        p = np.array([1.0, 0.0, 0.0])
        with pytest.raises(ValueError):
            integrate_geodesic(ROUND, p, np.zeros(3), 1.0)

    def test_nonpositive_time_rejected(self):
        p = np.array([1.0, 0.0, 0.0])
        v = np.array([0.0, 1.0, 0.0])
        with pytest.raises(ValueError):
            integrate_geodesic(ROUND, p, v, 0.0)


class TestGeodesicArc:
    def test_round_quarter_arc(self):
        p = np.array([1.0, 0.0, 0.0])
        q = np.array([0.0, 1.0, 0.0])
        mid, total = geodesic_arc(ROUND, p, q)
        assert total == pytest.approx(math.pi / 2.0, abs=1e-8)
        bisector = np.array([1.0, 1.0, 0.0]) / math.sqrt(2.0)
        assert np.linalg.norm(mid - bisector) < 1e-7

    def test_round_matches_distance(self):
        rng = np.random.default_rng(7)
        for _ in range(5):
            p = rng.normal(size=3)
            p /= np.linalg.norm(p)
            v = rng.normal(size=3)
            v -= np.dot(v, p) * p
            v /= np.linalg.norm(v)
            d = rng.uniform(0.3, 1.5)
            q = math.cos(d) * p + math.sin(d) * v
            _, total = geodesic_arc(ROUND, p, q)
            assert total == pytest.approx(d, abs=1e-8)

    def test_conformal_midpoint_bisects(self):
        rng = np.random.default_rng(3)
        p = rng.normal(size=3)
        p /= np.linalg.norm(p)
        v = rng.normal(size=3)
        v -= np.dot(v, p) * p
        v /= np.linalg.norm(v)
        q = math.cos(1.2) * p + math.sin(1.2) * v
        mid, total = geodesic_arc(MIXED, p, q)
        _, first = geodesic_arc(MIXED, p, mid)
        _, second = geodesic_arc(MIXED, mid, q)
        assert first == pytest.approx(total / 2.0, abs=1e-9)
        assert second == pytest.approx(total / 2.0, abs=1e-9)
        assert first + second == pytest.approx(total, abs=1e-9)

    def test_conformal_length_bounds(self):
        # the arc is no longer than the w-length of the round arc, and no
        # shorter than min(w) times the round distance
        p = np.array([1.0, 0.0, 0.0])
        q = np.array([0.2, 0.9, 0.38])
        q /= np.linalg.norm(q)
        d = math.acos(np.dot(p, q))
        _, total = geodesic_arc(ZONAL, p, q)
        w_min = 1.0 - 0.1 * Y20_POLE / 2.0  # min of w on the sphere (equator)
        samples = great_circle_points(np.cross(p, q) / np.linalg.norm(np.cross(p, q)), 4096)
        w_max = float(ZONAL.w(samples).max())
        assert w_min * d - 1e-9 <= total <= w_max * d + 1e-9

    def test_coincident_points(self):
        p = np.array([0.0, 0.0, 1.0])
        mid, total = geodesic_arc(ZONAL, p, p)
        assert total == 0.0
        assert np.allclose(mid, p)

    def test_far_points_rejected(self):
        p = np.array([1.0, 0.0, 0.0])
        q = np.array([-0.5, 0.8, 0.0])
        q /= np.linalg.norm(q)
        with pytest.raises(ValueError):
            geodesic_arc(ROUND, p, q)

    def test_iteration_cap(self):
        p = np.array([1.0, 0.0, 0.0])
        q = np.array([0.2, 0.9, 0.38])
        q /= np.linalg.norm(q)
        with pytest.raises(NoConvergence):
            geodesic_arc(MIXED, p, q, tol=1e-14, max_iter=1)


class TestBirkhoffShorten:
    def test_round_equator_is_fixed(self):
        eq = DiscreteClosedCurve(great_circle_points(POLE, 128))
        res = birkhoff_shorten(ROUND, eq)
        assert not res.collapsed
        assert res.residual < 1e-12
        assert res.length == pytest.approx(TWO_PI, abs=1e-12)

    def test_zonal_equator_is_discrete_geodesic(self):
        eq = DiscreteClosedCurve(great_circle_points(POLE, 128))
        res = birkhoff_shorten(ZONAL, eq)
        assert not res.collapsed
        assert res.residual < 1e-12
        # w is constant on the equator, so the discrete length is exact
        assert res.length == pytest.approx(TWO_PI + 0.1 * FUNK_Y20_POLE, abs=1e-10)

    def test_tilted_circle_slides_to_equator(self):
        axis = np.array([math.sin(0.3), 0.0, math.cos(0.3)])
        start = DiscreteClosedCurve(great_circle_points(axis, 128))
        res = birkhoff_shorten(ZONAL, start)
        assert not res.collapsed
        assert res.residual < 1e-10
        assert res.length == pytest.approx(TWO_PI + 0.1 * FUNK_Y20_POLE, abs=1e-9)
        assert res.length <= curve_length(ZONAL, start)

    def test_small_circle_collapses(self):
        small = DiscreteClosedCurve(CircleSpec(POLE, 0.6).points(32))
        res = birkhoff_shorten(ZONAL, small, max_iter=3000)
        assert res.collapsed
        assert res.curve.round_length() < COLLAPSE_THRESHOLD

    def test_point_curve_rejected(self):
        with pytest.raises(ValueError):
            birkhoff_shorten(ROUND, DiscreteClosedCurve.point(POLE, 32))

    def test_odd_vertex_count_rejected(self):
        crv = DiscreteClosedCurve(great_circle_points(POLE, 33))
        with pytest.raises(ValueError):
            birkhoff_shorten(ROUND, crv)

    def test_no_length_increase_violations(self):
        assert length_increase_violations() == 0


class TestSweepoutConstruction:
    def test_family_f_members_are_great_circles(self):
        sw = build_sweepout("F", N=65, n=128)
        assert sw.kind == "F"
        assert len(sw) == 65
        assert sw.params[0] == 0.0 and sw.params[-1] == 1.0
        for c in sw.curves:
            assert not c.is_point
            assert c.round_length() == pytest.approx(TWO_PI, abs=1e-9)

    def test_family_f_axes_sweep_half_turn(self):
        sw = build_sweepout("F", N=9, n=32)
        # first member circles the x-axis, so its vertices are orthogonal to x
        first = sw.curves[0].vertices
        assert np.max(np.abs(first @ np.array([1.0, 0.0, 0.0]))) < 1e-12

    def test_family_g_structure(self):
        sw = build_sweepout("G", N=65, n=128, axis=POLE)
        assert sw.kind == "G"
        assert len(sw) == 65
        points = [c for c in sw.curves if c.is_point]
        circles = [c for c in sw.curves if not c.is_point]
        # the circle stack is symmetric about s = 0: it contains the exact
        # great circle, and its s = +-1 endpoints degenerate to point curves
        assert len(circles) % 2 == 1
        rounds = np.array([c.round_length() for c in circles])
        assert rounds.max() == pytest.approx(TWO_PI, abs=1e-9)
        assert len(points) + len(circles) == 65
        # stack endpoints sit at the poles of the axis
        assert np.allclose(sw.curves[0].vertices[0], -POLE)
        tip = 2 * max(2, 65 // 8)  # members on the return leg
        assert np.allclose(sw.curves[64 - tip].vertices[0], POLE)

    def test_family_g_needs_axis(self):
        with pytest.raises(ValueError):
            build_sweepout("G")

    def test_shape_validation(self):
        with pytest.raises(ValueError):
            build_sweepout("F", N=8)
        with pytest.raises(ValueError):
            build_sweepout("F", N=7)
        with pytest.raises(ValueError):
            build_sweepout("F", n=31)
        with pytest.raises(ValueError):
            build_sweepout("F", n=30)
        with pytest.raises(ValueError):
            build_sweepout("H")


class TestTightenSweepout:
    def test_round_family_f_width(self):
        res = tighten_sweepout(ROUND, build_sweepout("F"), passes=10)
        assert res.width == pytest.approx(TWO_PI, abs=1e-9)
        assert res.witness is not None
        assert res.witness.length == pytest.approx(TWO_PI, abs=1e-9)
        assert res.witness.residual < 1e-10

    def test_zonal_family_g_width(self):
        res = tighten_sweepout(ZONAL, build_sweepout("G", axis=POLE), passes=40)
        expected = TWO_PI + 0.1 * FUNK_Y20_POLE
        assert res.width == pytest.approx(expected, abs=1e-9)
        assert res.witness is not None
        assert res.witness.length == pytest.approx(expected, abs=1e-9)

    def test_zonal_family_f_width_is_meridian_level(self):
        res = tighten_sweepout(ZONAL, build_sweepout("F"), passes=40)
        expected = TWO_PI + 0.1 * FUNK_Y20_EQUATOR
        assert res.width == pytest.approx(expected, abs=1e-4)
        assert res.width <= expected + 1e-9  # passes only descend

    def test_odd_direction_initial_f_width_is_exact(self):
        # uniform sampling of a great circle annihilates odd harmonics, so
        # every member of F has discrete length exactly 2 pi
        g = make_variation(SphericalFunction.harmonic(3, 0), 0.1)
        sw = build_sweepout("F")
        assert _initial_width(g, sw) == pytest.approx(TWO_PI, abs=1e-12)
        res = tighten_sweepout(g, sw, passes=5)
        assert res.width <= TWO_PI + 1e-12

    def test_trace_is_monotone(self):
        res = tighten_sweepout(ZONAL, build_sweepout("F", N=9, n=32), passes=20)
        iterations = [row[0] for row in res.trace]
        widths = [row[1] for row in res.trace]
        assert iterations == list(range(len(iterations)))
        assert all(b <= a + 1e-12 for a, b in zip(widths, widths[1:]))

    def test_mixed_vertex_counts_rejected(self):
        a = DiscreteClosedCurve(great_circle_points(POLE, 32))
        b = DiscreteClosedCurve(great_circle_points(POLE, 34))
        sw = Sweepout("F", None, [a, b], np.array([0.0, 1.0]))
        with pytest.raises(ValueError):
            tighten_sweepout(ROUND, sw, passes=1)


class TestWriters:
    def test_trace_roundtrip(self, tmp_path):
        res = tighten_sweepout(ZONAL, build_sweepout("F", N=9, n=32), passes=5)
        path = tmp_path / "trace.csv"
        write_trace(res.trace, path)
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
        assert rows[0] == ["iteration", "max_length", "argmax_index"]
        assert len(rows) == len(res.trace) + 1
        for row, (it, ml, am) in zip(rows[1:], res.trace):
            assert int(row[0]) == it
            assert float(row[1]) == ml
            assert int(row[2]) == am

    def test_witness_roundtrip(self, tmp_path):
        eq = DiscreteClosedCurve(great_circle_points(POLE, 32))
        res = birkhoff_shorten(ZONAL, eq)
        path = tmp_path / "witness.csv"
        write_witness_curve(res, path)
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
        assert rows[0] == ["x", "y", "z"]
        verts = np.array([[float(v) for v in row] for row in rows[1:]])
        assert verts.shape == res.curve.vertices.shape
        assert np.array_equal(verts, res.curve.vertices)


class TestFibonacciAxes:
    def test_shape_and_norms(self):
        axes = fibonacci_axes(26)
        assert axes.shape == (26, 3)
        assert np.allclose(np.linalg.norm(axes, axis=-1), 1.0, atol=1e-12)
        assert np.all(axes[:, 2] > 0.0)

    def test_reasonable_spread(self):
        axes = fibonacci_axes(26)
        dots = axes @ axes.T
        np.fill_diagonal(dots, -1.0)
        # no two axes closer than ~14 degrees
        assert dots.max() < math.cos(0.25)


class TestEstimateSystole:
    def test_round_metric(self):
        rep = estimate_systole(ROUND)
        assert rep.systole == pytest.approx(TWO_PI, abs=1e-6)
        assert rep.witness is not None
        assert rep.witness.residual < 1e-8
        assert rep.curvature_min == pytest.approx(1.0, abs=1e-9)
        assert rep.warnings == []
        assert all(length > COLLAPSE_THRESHOLD for _, length in rep.candidates)

    def test_zonal_positive_t(self):
        rep = estimate_systole(ZONAL)
        # the equator is an exact geodesic with constant w, so the estimate
        # lands on 2 pi + t Funk(pole) to near machine precision
        assert rep.systole == pytest.approx(TWO_PI + 0.1 * FUNK_Y20_POLE, abs=1e-9)
        assert rep.witness is not None
        assert rep.witness.length == pytest.approx(rep.systole, abs=1e-9)

    def test_zonal_negative_t(self):
        g = make_variation(SphericalFunction.harmonic(2, 0), -0.1)
        rep = estimate_systole(g)
        linear = TWO_PI - 0.1 * FUNK_Y20_EQUATOR
        # the short geodesics live near the equatorial Funk-max axes; the
        # true systole undercuts the linear value at second order
        assert rep.systole <= linear + 1e-9
        assert rep.systole == pytest.approx(linear, abs=2e-3)

    def test_odd_direction_stays_below_two_pi(self):
        g = make_variation(SphericalFunction.harmonic(3, 0), 0.05)
        rep = estimate_systole(g)
        assert rep.systole <= TWO_PI + 1e-10
        assert rep.systole == pytest.approx(TWO_PI, abs=5e-3)

    def test_report_shape(self):
        rep = estimate_systole(ROUND)
        assert isinstance(rep, SystoleReport)
        payload = rep.to_json()
        assert set(payload) == {
            "systole", "witness_length", "candidates", "curvature_min", "warnings",
        }
        assert payload["systole"] == rep.systole
        tags = [tag for tag, _ in rep.candidates]
        assert "family-F" in tags
        assert any(tag.startswith("family-G") for tag in tags)
        assert any(tag.startswith("geodesic-seed") for tag in tags)


@st.composite
def odd_directions(draw):
    """Band-limited functions with only odd-degree terms."""
    seed = draw(st.integers(0, 2**31 - 1))
    rng = np.random.default_rng(seed)
    pairs = []
    for l in (1, 3, 5):
        for m in range(-l, l + 1):
            pairs.append((l, m, float(rng.normal())))
    return SphericalFunction.from_pairs(pairs)


class TestOddWidthProperty:
    @given(odd_directions(), st.floats(0.01, 0.2))
    @settings(max_examples=15, deadline=None)
    def test_initial_f_width_exact_for_odd_directions(self, f, scale):
        from systolab.metric import sup_norm

        s = sup_norm(f)
        if s == 0.0:
            return
        g = make_variation(f, scale * 0.5 / s)
        sw = build_sweepout("F", N=9, n=32)
        assert _initial_width(g, sw) == pytest.approx(TWO_PI, abs=1e-11)


class TestMonotonicityCounter:
    def test_counter_still_zero(self):
        # this must run after everything above exercised the engine
        assert length_increase_violations() == 0
