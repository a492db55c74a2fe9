import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from balayage_frames.lattice import make_grid
from balayage_frames.sampling_sets import (
    SeparatedSet,
    covering_radius,
    is_separated,
    jittered_lattice,
    phase_lattice,
    phase_torus_grid,
    read_points_csv,
    write_points_csv,
)


def test_is_separated_examples():
    assert is_separated(SeparatedSet([0, 0.5, 1.2]), 0.5)
    assert not is_separated(SeparatedSet([0, 0.1, 1.0]), 0.5)
    assert is_separated(SeparatedSet([0.0]), 7)
    assert is_separated(SeparatedSet(np.zeros((0, 1))), 1)
    with pytest.raises(ValueError):
        is_separated(SeparatedSet([0.0]), 0)


def test_separation_property():
    assert SeparatedSet([0, 0.5, 1.2]).separation == pytest.approx(0.5)
    assert SeparatedSet([3.0]).separation == np.inf


def test_zero_jitter_is_lattice():
    E = jittered_lattice(1, 1.0, 0.0, 3.0, symmetric=True)
    np.testing.assert_array_equal(np.sort(E.points.ravel()), np.arange(-3, 4))


def test_jitter_keeps_separation():
    E = jittered_lattice(1, 1.0, 0.2, 20.0, seed=4)
    assert is_separated(E, 0.6)


def test_symmetric_2d():
    E = jittered_lattice(2, 1.0, 0.25, 2.0, symmetric=True, seed=1)
    assert E.symmetric
    own = {tuple(p) for p in E.points}
    assert all(tuple(-p + 0.0) in own for p in E.points)


def test_jitter_rejected():
    with pytest.raises(ValueError, match="jitter"):
        jittered_lattice(1, 1.0, 0.5, 4.0)


def test_jitter_deterministic():
    a = jittered_lattice(1, 1.0, 0.3, 8.0, seed=7)
    b = jittered_lattice(1, 1.0, 0.3, 8.0, seed=7)
    c = jittered_lattice(1, 1.0, 0.3, 8.0, seed=8)
    np.testing.assert_array_equal(a.points, b.points)
    assert not np.array_equal(a.points, c.points)


@settings(max_examples=40, deadline=None)
@given(
    d=st.integers(1, 2),
    spacing=st.floats(0.2, 2.0),
    frac=st.floats(0.0, 0.49),
    seed=st.integers(0, 2**16),
    symmetric=st.booleans(),
)
def test_jittered_lattice_invariants(d, spacing, frac, seed, symmetric):
    eta = frac * spacing
    E = jittered_lattice(d, spacing, eta, 3 * spacing, symmetric, seed)
    assert is_separated(E, spacing - 2 * eta - 1e-12)
    if symmetric:
        assert E.symmetric


def test_covering_radius_examples():
    E = jittered_lattice(2, 1.0, 0.0, 2 * np.sqrt(2), symmetric=True)
    E = SeparatedSet(E.points[np.max(np.abs(E.points), axis=1) <= 2])
    r = covering_radius(E, [(-1.5, 1.5), (-1.5, 1.5)])
    assert r == pytest.approx(np.sqrt(2) / 2, abs=1 / 8)
    assert covering_radius(SeparatedSet([0.0]), [(-1, 1)]) == pytest.approx(1.0)
    rj = covering_radius(jittered_lattice(1, 1.0, 0.2, 4.0), [(-2, 2)])
    assert 0.5 <= rj <= 0.9
    with pytest.raises(ValueError):
        covering_radius(SeparatedSet(np.zeros((0, 1))), [(-1, 1)])


@settings(max_examples=25, deadline=None)
@given(st.lists(st.floats(-3, 3), min_size=1, max_size=8, unique=True), st.floats(-3, 3))
def test_covering_radius_monotone(xs, extra):
    small = SeparatedSet(xs)
    big = small.union(SeparatedSet([extra]))
    region = [(-3, 3)]
    assert covering_radius(big, region, 0.01) <= covering_radius(small, region, 0.01) + 1e-12


def test_subset_and_union():
    a = jittered_lattice(1, 2.0, 0.0, 8.0)
    b = jittered_lattice(1, 1.0, 0.0, 8.0)
    assert a.issubset(b) and not b.issubset(a)
    assert len(a.union(b)) == len(b)
    assert 2.0 in a and 1.0 not in a


def test_phase_torus_grid_and_lattice():
    grid = phase_torus_grid(0.5, 0.5, 32, 32)
    assert grid.n == 256 and grid.spacing == (1 / 16,)
    E = phase_lattice(grid, 0.5, 0.5)
    assert len(E) == 32 * 32 and E.dimension == 2
    assert E.separation == pytest.approx(0.5)
    with pytest.raises(ValueError):
        phase_lattice(make_grid(1, 64, 0.3), 0.5, 0.5)
    with pytest.raises(ValueError):
        phase_torus_grid(0.5, 0.5, 3, 3)


def test_points_csv_roundtrip(tmp_path):
    E = jittered_lattice(2, 1.0, 0.3, 3.0, seed=2)
    path = tmp_path / "pts.csv"
    write_points_csv(path, E)
    assert path.read_text().splitlines()[0] == "x0,x1"
    np.testing.assert_array_equal(read_points_csv(path).points, E.points)
