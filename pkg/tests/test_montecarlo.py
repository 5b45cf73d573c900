import math

import numpy as np
import pytest
from scipy import stats

from needlecast.conditional import ClusterSpec, conditional_pmf
from needlecast.errors import DomainError
from needlecast.lattice import ClusterCenter, LatticeParams, Region
from needlecast.montecarlo import EmpiricalSummary, ThrowConfig, simulate, simulate_conditional
from needlecast.unconditional import pmf

L22 = LatticeParams(2, 2)


def cfg(n, lat=L22, throws=10_000, seed=0, streams=1):
    return ThrowConfig(ClusterSpec(n), lat, throws, seed, streams)


class TestConfig:
    @pytest.mark.parametrize("field,value", [("throws", 0), ("seed", -1), ("seed", 2**64), ("streams", 0)])
    def test_rejects(self, field, value):
        kwargs = dict(spec=ClusterSpec(1), lat=L22, throws=10, seed=0, streams=1)
        kwargs[field] = value
        with pytest.raises(DomainError):
            ThrowConfig(**kwargs)

    def test_full_width_seed(self):
        assert simulate(cfg(1, throws=50, seed=2**64 - 1)).throws == 50


def test_summary_fields():
    s = EmpiricalSummary.from_histogram(2, [5, 3, 2, 0, 0])
    assert s.throws == 10
    assert s.frequencies == pytest.approx([0.5, 0.3, 0.2, 0, 0])
    assert s.stderr[0] == pytest.approx(math.sqrt(0.25 / 10))
    assert s.moments[0] == pytest.approx((3 * 0.5 + 2 * 1.0) / 10)
    assert list(s.flagged) == [True, True, True, True, True]
    with pytest.raises(ValueError):
        s.histogram[0] = 1


@pytest.mark.slow
def test_double_crossing_frequency():
    emp = simulate(cfg(1, throws=10_000_000, seed=42, streams=4))
    p = 1 / (4 * math.pi)
    assert abs(emp.frequencies[2] - p) <= 4 * emp.stderr[2]


@pytest.mark.parametrize("n,lat", [(1, L22), (4, LatticeParams(2, 3)), (9, LatticeParams(2, 2))])
def test_cap_per_throw(n, lat):
    emp = simulate(cfg(n, lat, throws=50_000, seed=3))
    assert emp.histogram.size == 2 * n + 1
    assert emp.histogram.sum() == 50_000


def test_repeatable():
    a = simulate(cfg(5, throws=30_000, seed=9, streams=3))
    b = simulate(cfg(5, throws=30_000, seed=9, streams=3))
    assert np.array_equal(a.histogram, b.histogram)
    assert np.array_equal(a.moments, b.moments)


def test_seed_changes_stream():
    a = simulate(cfg(5, throws=30_000, seed=9))
    b = simulate(cfg(5, throws=30_000, seed=10))
    assert not np.array_equal(a.histogram, b.histogram)


def test_threads_do_not_matter(monkeypatch):
    from needlecast import montecarlo

    monkeypatch.setattr(montecarlo, "CHUNK_DRAWS", 4096)
    c = cfg(3, throws=40_000, seed=5, streams=3)
    base = simulate(c, threads=1)
    for threads in (2, 4, 7):
        other = simulate(c, threads=threads)
        assert np.array_equal(base.histogram, other.histogram)
        assert np.array_equal(base.moments, other.moments)


@pytest.mark.parametrize("lat", [L22, LatticeParams(3, 5)], ids=str)
@pytest.mark.parametrize("n", [1, 4, 15])
def test_mean_matches_buffon(lat, n):
    emp = simulate(cfg(n, lat, throws=400_000, seed=n))
    mean = 2 * (lat.lam + lat.mu) / math.pi
    assert abs(emp.moments[0] - mean) <= 4 * emp.moment_stderr(1)


def test_chi_square_calibration():
    """The 0.001-level goodness-of-fit test rejects at about its nominal rate."""
    lat, n, throws = LatticeParams(2, 3), 3, 5_000
    exact = pmf(ClusterSpec(n), lat).probs
    expected = exact * throws
    keep = expected >= 10
    critical = stats.chi2.ppf(0.999, keep.sum())
    rejections = 0
    for seed in range(300):
        hist = simulate(cfg(n, lat, throws=throws, seed=seed)).histogram
        observed = np.append(hist[keep], hist[~keep].sum())
        exp = np.append(expected[keep], expected[~keep].sum())
        if np.sum((observed - exp) ** 2 / exp) > critical:
            rejections += 1
    # 300 repetitions at level 0.001: three or more rejections has chance < 0.4%.
    assert rejections <= 2


class TestConditionalSimulation:
    def test_f1_centre(self):
        emp = simulate_conditional(cfg(4, LatticeParams(4, 4), throws=20_000), ClusterCenter(1.5, 1.2, Region.F1))
        assert emp.histogram[0] == 20_000

    def test_f5_corner(self):
        c = ClusterCenter(1e-9, 1e-9, Region.F5)
        emp = simulate_conditional(cfg(1, throws=1_000_000, seed=1), c)
        ref = np.array([0.25, 0.5, 0.25])
        assert np.all(np.abs(emp.frequencies - ref) <= 4 * emp.stderr)

    def test_f4_centre(self):
        c = ClusterCenter(0.8, 0.9, Region.F4)
        emp = simulate_conditional(cfg(3, throws=500_000, seed=2), c)
        ref = conditional_pmf(ClusterSpec(3), c).probs
        mask = emp.histogram >= 10
        assert np.all(np.abs(emp.frequencies[mask] - ref[mask]) <= 4 * emp.stderr[mask])
        assert not emp.histogram[4:].any()

    def test_outside_quarter_cell(self):
        with pytest.raises(DomainError):
            simulate_conditional(cfg(1), ClusterCenter(1.2, 1.5, Region.F1))
