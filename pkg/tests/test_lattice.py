import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from needlecast.errors import DomainError
from needlecast.lattice import (
    ClusterCenter,
    LatticeParams,
    Region,
    classify_region,
    count_crossings,
    crossing_profile,
    needle_crossings,
    profile_arrays,
)

L22 = LatticeParams(2, 2)
L44 = LatticeParams(4, 4)


class TestLatticeParams:
    def test_reciprocals(self):
        lat = LatticeParams(3, 5)
        assert lat.lam * lat.a == 1.0
        assert lat.mu * lat.b == 1.0

    @pytest.mark.parametrize("a,b", [(1.999, 2), (2, 1.5), (0, 3), (math.nan, 2), (math.inf, 2)])
    def test_rejects_inadmissible(self, a, b):
        with pytest.raises(DomainError):
            LatticeParams(a, b)

    def test_from_reciprocals(self):
        assert LatticeParams.from_reciprocals(0.5, 0.25) == LatticeParams(2, 4)
        with pytest.raises(DomainError):
            LatticeParams.from_reciprocals(0.0, 0.25)

    def test_swapped(self):
        assert LatticeParams(2, 7).swapped() == LatticeParams(7, 2)


class TestClassify:
    @pytest.mark.parametrize("x,y,lat,region", [
        (1.5, 1.5, L44, Region.F1),
        (0.5, 0.5, L22, Region.F5),
        (0.8, 0.9, L22, Region.F4),
        (0.3, 1.7, L44, Region.F2),
        (1.7, 0.3, L44, Region.F3),
    ])
    def test_examples(self, x, y, lat, region):
        assert classify_region(x, y, lat).region is region

    @pytest.mark.parametrize("x,y,region", [
        (0.6, 0.8, Region.F5),  # on the arc: F5 beats F4
        (1.0, 0.0, Region.F5),  # arc endpoint
        (0.5, 1.0, Region.F4),  # F4 top edge beats F2
        (1.0, 0.5, Region.F4),  # F4 right edge beats F3
        (1.0, 1.0, Region.F4),
        (1.0, 1.5, Region.F2),  # F2 beats F1
        (1.5, 1.0, Region.F3),  # F3 beats F1
    ])
    def test_boundary_precedence(self, x, y, region):
        assert classify_region(x, y, L44).region is region

    @pytest.mark.parametrize("x,y,bound", [(-0.1, 0.5, "x"), (2.1, 0.5, "x"), (0.5, 2.5, "y")])
    def test_outside_names_bound(self, x, y, bound):
        with pytest.raises(DomainError, match=f"{bound} = "):
            classify_region(x, y, L44)

    def test_mismatched_tag_rejected(self):
        with pytest.raises(DomainError):
            ClusterCenter(0.2, 0.2, Region.F1)

    @settings(max_examples=300, deadline=None)
    @given(st.floats(0, 2), st.floats(0, 3))
    def test_tag_is_consistent(self, x, y):
        c = classify_region(x, y, LatticeParams(4, 6))
        # Re-validating the tag would raise if the point were not in the region.
        ClusterCenter(c.x, c.y, c.region)


class TestProfile:
    def test_f2_on_axis(self):
        p = crossing_profile(ClusterCenter(0.0, 1.5, Region.F2))
        assert p.q1 == pytest.approx(0.5, abs=1e-15)
        assert p.q2 == 0.0

    def test_f5_corner(self):
        p = crossing_profile(ClusterCenter(0.0, 0.0, Region.F5))
        assert (p.q0, p.q1, p.q2) == pytest.approx((0.25, 0.5, 0.25), abs=1e-15)

    @pytest.mark.parametrize("x", [0.0, 0.1, 0.5, 0.9, 1.0])
    def test_arc_has_no_double_crossing(self, x):
        p = crossing_profile(ClusterCenter(x, math.sqrt(1 - x * x), Region.F5))
        assert p.q2 == pytest.approx(0.0, abs=1e-12)

    def test_f1_never_crosses(self):
        p = crossing_profile(ClusterCenter(1.2, 1.3, Region.F1))
        assert (p.q0, p.q1, p.q2) == (1.0, 0.0, 0.0)

    @pytest.mark.parametrize("x", np.linspace(0, 1, 11))
    def test_continuity_f2_f4(self, x):
        f2 = profile_arrays(Region.F2, x, 1.0)[1]
        f4 = profile_arrays(Region.F4, x, 1.0)[1]
        assert abs(f2 - f4) <= 1e-12

    @pytest.mark.parametrize("y", np.linspace(0, 1, 11))
    def test_continuity_f3_f4(self, y):
        f3 = profile_arrays(Region.F3, 1.0, y)[1]
        f4 = profile_arrays(Region.F4, 1.0, y)[1]
        assert abs(f3 - f4) <= 1e-12

    @pytest.mark.parametrize("x", np.linspace(0, 1, 11))
    def test_continuity_f4_f5(self, x):
        y = math.sqrt(1 - x * x)
        f4 = profile_arrays(Region.F4, x, y)
        f5 = profile_arrays(Region.F5, x, y)
        for u, v in zip(f4, f5):
            assert abs(u - v) <= 1e-12

    @settings(max_examples=200, deadline=None)
    @given(st.floats(0, 1.5), st.floats(0, 2.5), st.floats(3, 5), st.floats(5, 8))
    def test_swap_symmetry(self, x, y, a, b):
        c = classify_region(x, y, LatticeParams(a, b))
        d = classify_region(y, x, LatticeParams(b, a))
        swap = {Region.F2: Region.F3, Region.F3: Region.F2}
        on_edge = min(abs(x - 1), abs(y - 1), abs(x * x + y * y - 1)) < 1e-9
        if not on_edge:
            assert d.region is swap.get(c.region, c.region)
        p, q = crossing_profile(c), crossing_profile(d)
        assert p.as_array() == pytest.approx(q.as_array(), abs=1e-12)


class TestCrossings:
    def test_examples(self):
        assert needle_crossings(0.5, 1.0, math.pi, L22) == 1
        assert needle_crossings(0.3, 0.3, 5 * math.pi / 4, L22) == 2

    def test_cell_centre_generic_angles(self):
        phis = np.random.default_rng(1).uniform(0.01, 2 * math.pi, 10_000)
        phis = phis[np.min(np.abs(phis[:, None] - np.arange(5)[None, :] * math.pi / 2), axis=1) > 1e-9]
        assert np.all(count_crossings(1.0, 1.0, phis, 2.0, 2.0) == 0)

    def test_tangency_counts(self):
        assert needle_crossings(1.0, 1.0, 0.0, L22) == 1

    def test_cap_two_per_needle(self):
        rng = np.random.default_rng(2)
        x, y = rng.uniform(0, 2, 50_000), rng.uniform(0, 2, 50_000)
        phi = rng.uniform(0, 2 * math.pi, 50_000)
        assert count_crossings(x, y, phi, 2.0, 2.0).max() <= 2

    @pytest.mark.parametrize("x,y", [(0.4, 1.6), (1.6, 0.4), (0.8, 0.9), (0.3, 0.4), (0.05, 0.02)])
    def test_profile_matches_simulation(self, x, y):
        """Empirical crossing frequencies of 10^6 angles lie within 4 SE of the profile."""
        c = classify_region(x, y, L44)
        phi = np.random.default_rng(hash((x, y)) % 2**32).uniform(0, 2 * math.pi, 1_000_000)
        counts = np.bincount(count_crossings(x, y, phi, 4.0, 4.0), minlength=3)[:3]
        freq = counts / phi.size
        q = crossing_profile(c).as_array()
        se = np.sqrt(np.maximum(q * (1 - q), 1e-300) / phi.size)
        assert np.all(np.abs(freq - q) <= 4 * se + 1e-15)
