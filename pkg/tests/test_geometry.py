import math

import numpy as np
import pytest
from scipy.integrate import quad

from substat.geometry import (
    Point,
    PointPattern,
    Subspace,
    Window,
    chord_measure,
    chord_segments,
    project,
    project_xy,
    unproject_xy,
    v_range,
)


class TestSubspaceNormalization:
    def test_plus_half_pi_wraps_to_minus_half_pi(self):
        assert Subspace(math.pi / 2).theta == pytest.approx(-math.pi / 2, abs=1e-15)

    def test_minus_half_pi_is_kept(self):
        assert Subspace(-math.pi / 2).theta == pytest.approx(-math.pi / 2, abs=1e-15)

    def test_theta_plus_pi_names_same_subspace(self):
        rng = np.random.default_rng(0)
        for t in rng.uniform(-math.pi / 2, math.pi / 2, 200):
            assert Subspace(t + math.pi).theta == pytest.approx(Subspace(t).theta, abs=1e-12)

    def test_normalization_is_idempotent(self):
        rng = np.random.default_rng(1)
        for t in rng.uniform(-10, 10, 200):
            once = Subspace(t).theta
            assert Subspace(once).theta == once

    def test_degrees_round_trip(self):
        assert Subspace.from_degrees(30.0).degrees == pytest.approx(30.0, abs=1e-12)


class TestProject:
    def test_horizontal_axis_projects_to_y(self):
        _, v = project(Subspace(0.0), Point(3.0, 0.7))
        assert v == pytest.approx(0.7, abs=1e-12)

    def test_vertical_axis_projects_to_x(self):
        _, v = project(Subspace(-math.pi / 2), Point(3.0, 0.7))
        assert v == pytest.approx(3.0, abs=1e-12)

    def test_point_on_diagonal_subspace_has_zero_offset(self):
        _, v = project(Subspace(math.pi / 4), Point(1.0, 1.0))
        assert v == pytest.approx(0.0, abs=1e-12)

    def test_reconstruction_on_a_million_random_points(self):
        rng = np.random.default_rng(42)
        n = 1_000_000
        thetas = rng.uniform(-math.pi / 2, math.pi / 2, n)
        x = rng.uniform(-5, 5, n)
        y = rng.uniform(-5, 5, n)
        c, s = np.cos(thetas), np.sin(thetas)
        u = x * c + y * s
        v = y * c - x * s
        xr = u * c - v * s
        yr = u * s + v * c
        assert np.max(np.abs(xr - x)) < 1e-12
        assert np.max(np.abs(yr - y)) < 1e-12

    def test_unproject_inverts_project(self):
        sub = Subspace(0.83)
        u, v = project_xy(sub, 1.7, 0.4)
        x, y = unproject_xy(sub, u, v)
        assert x == pytest.approx(1.7, abs=1e-14)
        assert y == pytest.approx(0.4, abs=1e-14)


class TestVRange:
    def test_horizontal_axis(self):
        assert v_range(Subspace(0.0), Window(2, 1)) == pytest.approx((0.0, 1.0))

    def test_thirty_degrees(self):
        lo, hi = v_range(Subspace(math.pi / 6), Window(2, 1))
        assert lo == pytest.approx(-1.0, abs=1e-12)
        assert hi == pytest.approx(math.sqrt(3) / 2, abs=1e-12)

    def test_vertical_axis(self):
        lo, hi = v_range(Subspace(-math.pi / 2), Window(2, 1))
        assert lo == pytest.approx(0.0, abs=1e-12)
        assert hi == pytest.approx(2.0, abs=1e-12)

    def test_projections_of_interior_points_stay_in_range(self):
        rng = np.random.default_rng(7)
        for _ in range(50):
            theta = Subspace(rng.uniform(-math.pi / 2, math.pi / 2))
            w = Window(rng.uniform(0.5, 10), rng.uniform(0.5, 5))
            lo, hi = v_range(theta, w)
            x = rng.uniform(0, w.z, 1000)
            y = rng.uniform(0, w.omega, 1000)
            _, v = project_xy(theta, x, y)
            assert np.all(v >= lo - 1e-12)
            assert np.all(v <= hi + 1e-12)


class TestChordMeasure:
    def test_horizontal_slice_has_full_width(self):
        assert chord_measure(Subspace(0.0), Window(5, 1), 0.5) == pytest.approx(5.0)

    def test_unit_square_diagonal(self):
        got = chord_measure(Subspace(math.pi / 4), Window(1, 1), 0.0)
        assert got == pytest.approx(math.sqrt(2), abs=1e-12)

    def test_zero_at_range_corners(self):
        sub, w = Subspace(math.pi / 6), Window(2, 1)
        lo, hi = v_range(sub, w)
        assert chord_measure(sub, w, lo) == pytest.approx(0.0, abs=1e-12)
        assert chord_measure(sub, w, hi) == pytest.approx(0.0, abs=1e-12)

    def test_zero_outside_range(self):
        sub, w = Subspace(0.4), Window(2, 1)
        lo, hi = v_range(sub, w)
        assert chord_measure(sub, w, lo - 0.01) == 0.0
        assert chord_measure(sub, w, hi + 0.01) == 0.0

    @pytest.mark.parametrize(
        "theta",
        [0.0, -math.pi / 2, math.pi / 4, -math.pi / 4, 1e-3, -1e-3,
         math.pi / 2 - 1e-3, -math.pi / 2 + 1e-3, 0.3, -1.2],
    )
    @pytest.mark.parametrize("dims", [(1, 1), (2, 3), (10, 1)])
    def test_chord_integral_equals_window_area(self, theta, dims):
        sub, w = Subspace(theta), Window(*dims)
        lo, hi = v_range(sub, w)
        knots = sorted({seg[0] for seg in chord_segments(sub, w)} | {hi})
        total, err = quad(
            lambda v: chord_measure(sub, w, v), lo, hi,
            points=[k for k in knots if lo < k < hi] or None, limit=200,
        )
        assert total == pytest.approx(w.area, rel=1e-9)
        assert err < 1e-7

    def test_profile_is_a_trapezoid(self):
        # slope signs must run nonnegative, zero, nonpositive in order
        sub, w = Subspace(0.6), Window(3, 2)
        segs = chord_segments(sub, w)
        assert len(segs) == 3
        assert segs[0][3] > 0
        assert segs[1][3] == 0
        assert segs[2][3] < 0
        lo, hi = v_range(sub, w)
        grid = np.linspace(lo, hi, 2001)
        vals = chord_measure(sub, w, grid)
        diffs = np.diff(vals)
        first_down = np.argmax(diffs < -1e-12)
        assert np.all(diffs[first_down:] <= 1e-12)

    def test_axis_aligned_profile_is_flat(self):
        segs = chord_segments(Subspace(0.0), Window(4, 1))
        assert len(segs) == 1
        lo, hi, a, b = segs[0]
        assert (lo, hi, a, b) == (0.0, 1.0, 4.0, 0.0)


class TestWindowAndPattern:
    def test_window_rejects_nonpositive_extents(self):
        with pytest.raises(ValueError):
            Window(0.0, 1.0)
        with pytest.raises(ValueError):
            Window(1.0, -2.0)

    def test_area(self):
        assert Window(3, 2).area == 6.0

    def test_pattern_rejects_outside_points(self):
        with pytest.raises(ValueError):
            PointPattern([0.5, 1.5], [0.5, 0.5], Window(1, 1))

    def test_pattern_allows_boundary_points(self):
        pat = PointPattern([0.0, 1.0], [0.0, 1.0], Window(1, 1))
        assert pat.n == 2

    def test_empty_pattern(self):
        pat = PointPattern.empty(Window(1, 1))
        assert pat.n == 0
        assert len(pat.points) == 0

    def test_points_property_round_trips(self):
        pat = PointPattern([0.1, 0.2], [0.3, 0.4], Window(1, 1))
        assert pat.points == [Point(0.1, 0.3), Point(0.2, 0.4)]
