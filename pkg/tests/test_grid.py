import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from irs_codebook.array_model import IrsGeometry
from irs_codebook.grid import BetaGrid, SampleSet, build_grid, covered_span, sample_interval


def test_covered_span():
    assert covered_span(0.5) == 2.0
    assert covered_span(0.1) == 4.0
    assert covered_span(1.0) == 1.0


def test_half_wavelength_range():
    g = build_grid(IrsGeometry(4, 4), 1, 1)
    assert g.interval(0, 0) == ((-1.0, 1.0), (-1.0, 1.0))


def test_center_interval_widths():
    g = build_grid(IrsGeometry(4, 4), 13, 9)
    lo, hi = g.axis_interval("y", 6)
    assert (lo, hi) == pytest.approx((-0.0769, 0.0769), abs=1e-4)
    lo, hi = g.axis_interval("z", 4)
    assert (lo, hi) == pytest.approx((-0.111, 0.111), abs=1e-3)
    assert g.width("z") == pytest.approx(0.2222, abs=1e-4)


def test_zero_counts_rejected():
    with pytest.raises(ValueError):
        build_grid(IrsGeometry(2, 2), 0, 1)
    with pytest.raises(ValueError):
        BetaGrid(1, 1, 2.0, 2.0, p_y=0)


def test_index_out_of_range():
    g = build_grid(IrsGeometry(2, 2), 3, 3)
    with pytest.raises(IndexError):
        sample_interval(g, 3, 0)
    with pytest.raises(IndexError):
        sample_interval(g, 0, -1)


def test_sample_examples():
    s = SampleSet.from_intervals((-0.1, 0.1), (0.2, 0.4), 3, 5)
    assert np.allclose(s.points_y, [-0.1, 0.0, 0.1])
    assert np.allclose(s.points_z, [0.2, 0.25, 0.3, 0.35, 0.4])
    s1 = SampleSet.from_intervals((-0.3, 0.3), (-0.3, 0.3), 1, 1)
    assert np.allclose(s1.points_y, [0.0])
    assert s.size == 15
    pairs = s.pairs()
    assert pairs.shape == (15, 2)
    assert tuple(pairs[1]) == pytest.approx((-0.1, 0.25))


def test_row_major_order():
    g = build_grid(IrsGeometry(2, 2), 2, 3)
    assert list(g.indices()) == [(0, 0), (0, 1), (0, 2), (1, 0), (1, 1), (1, 2)]
    assert g.size == 6


@settings(max_examples=50, deadline=None)
@given(st.integers(1, 20), st.integers(1, 20), st.sampled_from([0.1, 0.25, 0.5, 0.8]), st.integers(1, 7))
def test_partition_and_membership(m_y, m_z, d, p):
    g = build_grid(IrsGeometry(2, 2, d, d), m_y, m_z, p, p)
    for axis, m in (("y", m_y), ("z", m_z)):
        e = g.edges(axis)
        assert e[0] == pytest.approx(-g._axis(axis)[1] / 2, abs=1e-15)
        assert e[-1] == pytest.approx(g._axis(axis)[1] / 2, abs=1e-12)
        assert np.allclose(np.diff(e), g.width(axis))
        for i in range(m - 1):
            assert g.axis_interval(axis, i)[1] == g.axis_interval(axis, i + 1)[0]
    for idx in [(0, 0), (m_y - 1, m_z - 1), (m_y // 2, m_z // 2)]:
        s = sample_interval(g, *idx)
        (ly, hy), (lz, hz) = g.interval(*idx)
        assert np.all((s.points_y >= ly) & (s.points_y <= hy))
        assert np.all((s.points_z >= lz) & (s.points_z <= hz))
        for b in s.points_y:
            assert idx[0] in g.locate("y", b)
        for b in s.points_z:
            assert idx[1] in g.locate("z", b)
