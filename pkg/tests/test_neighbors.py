import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from unicorns import ParameterError, brute_force_knn, build_index, knn_all
from unicorns.neighbors import pair_distances

from conftest import as_embedded


def check_table(table, n):
    rows = np.arange(n)[:, None]
    assert not (table.indices == rows).any()
    assert (table.indices >= 0).all() and (table.indices < n).all()
    assert (table.distances >= 0).all()
    assert (np.diff(table.distances, axis=1) >= 0).all()


def test_two_points():
    t = knn_all(build_index(as_embedded([[0.0, 0.0], [1.0, 1.0]])), 1)
    np.testing.assert_array_equal(t.indices, [[1], [0]])
    np.testing.assert_allclose(t.distances, np.sqrt(2))


def test_random_matches_brute_force(rng):
    emb = as_embedded(rng.normal(size=(1000, 3)))
    a = knn_all(build_index(emb), 20)
    b = brute_force_knn(emb, 20)
    np.testing.assert_array_equal(a.indices, b.indices)
    np.testing.assert_array_equal(a.distances, b.distances)
    check_table(a, 1000)


def test_collinear_grid_neighbors():
    n = 30
    t = knn_all(build_index(as_embedded(np.arange(n, dtype=float))), 2)
    for i in range(1, n - 1):
        assert sorted(t.indices[i]) == [i - 1, i + 1]
    # equidistant pair at the boundary: lower time index first
    np.testing.assert_array_equal(t.indices[5], [4, 6])


def test_full_neighborhood_is_permutation(rng):
    n = 25
    t = knn_all(build_index(as_embedded(rng.normal(size=(n, 2)))), n - 1)
    for i in range(n):
        assert sorted(t.indices[i]) == [j for j in range(n) if j != i]


def test_duplicates_tie_break_by_time_index():
    pts = np.array([[0.0], [0.0], [0.0], [5.0], [0.0]])
    t = knn_all(build_index(as_embedded(pts)), 2)
    np.testing.assert_array_equal(t.indices[0], [1, 2])
    np.testing.assert_array_equal(t.indices[2], [0, 1])
    np.testing.assert_array_equal(t.indices[4], [0, 1])
    np.testing.assert_array_equal(t.distances[4], [0.0, 0.0])
    b = brute_force_knn(as_embedded(pts), 2)
    np.testing.assert_array_equal(t.indices, b.indices)


def test_many_ties_on_integer_lattice():
    g = np.array([(i, j) for i in range(12) for j in range(12)], dtype=float)
    emb = as_embedded(g)
    for k in (1, 3, 4, 5, 8, 12):
        a = knn_all(build_index(emb), k)
        b = brute_force_knn(emb, k)
        np.testing.assert_array_equal(a.indices, b.indices)
        np.testing.assert_array_equal(a.distances, b.distances)


@pytest.mark.parametrize("k", [0, 10])
def test_k_out_of_range(k, rng):
    index = build_index(as_embedded(rng.normal(size=(10, 2))))
    with pytest.raises(ParameterError):
        knn_all(index, k)


def test_empty_input():
    with pytest.raises(ParameterError):
        build_index(as_embedded(np.zeros((1, 2))))


def test_truncate_is_prefix(rng):
    emb = as_embedded(rng.integers(0, 4, size=(300, 2)).astype(float))
    big = knn_all(build_index(emb), 15)
    for k in (1, 4, 9):
        small = knn_all(build_index(emb), k)
        np.testing.assert_array_equal(big.truncate(k).indices, small.indices)


def test_pair_distances_bitwise_consistent(rng):
    pts = rng.normal(size=(50, 5))
    full = pair_distances(pts, np.arange(50)[:, None], np.arange(50)[None, :])
    pairs = pair_distances(pts, np.array([3, 7]), np.array([10, 40]))
    assert full[3, 10] == pairs[0] and full[7, 40] == pairs[1]


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), n=st.integers(2, 80), dim=st.integers(1, 4),
       k=st.integers(1, 10), grid=st.booleans())
def test_oracle_equivalence_property(seed, n, dim, k, grid):
    r = np.random.default_rng(seed)
    pts = r.integers(0, 3, size=(n, dim)).astype(float) if grid else r.normal(size=(n, dim))
    k = min(k, n - 1)
    a = knn_all(build_index(as_embedded(pts)), k)
    b = brute_force_knn(as_embedded(pts), k)
    check_table(a, n)
    np.testing.assert_array_equal(a.distances, b.distances)
    np.testing.assert_array_equal(a.indices, b.indices)


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_rigid_motion_invariance(seed):
    r = np.random.default_rng(seed)
    pts = r.normal(size=(60, 3))
    q, _ = np.linalg.qr(r.normal(size=(3, 3)))
    moved = pts @ q.T + r.normal(size=3) * 10
    a = knn_all(build_index(as_embedded(pts)), 5)
    b = knn_all(build_index(as_embedded(moved)), 5)
    np.testing.assert_array_equal(a.indices, b.indices)
