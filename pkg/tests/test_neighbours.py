import numpy as np
import pytest

from dirad.distance import DistanceSpec, DistanceVariant, distance_matrix
from dirad.neighbours import knn, knn_batch, self_knn, self_knn_batch

ABS = DistanceVariant.ABSOLUTE


def test_nearer_of_two_points():
    result = knn([[0.0], [10.0]], [1.0], 1, DistanceSpec((ABS,)))
    assert np.array_equal(result.distances, [1.0])
    assert np.array_equal(result.indices, [0])


def test_k_equals_n_returns_all_sorted():
    train = [[0.0], [5.0], [2.0]]
    result = knn(train, [1.0], 3, DistanceSpec((ABS,)))
    assert np.array_equal(result.distances, [1.0, 1.0, 4.0])
    assert np.array_equal(result.indices, [0, 2, 1])


def test_matches_full_sort_oracle():
    rng = np.random.default_rng(29)
    spec = DistanceSpec((ABS, DistanceVariant.RAMP, DistanceVariant.SIGNED))
    train = rng.standard_normal((20, 3))
    query = rng.standard_normal(3)
    row = distance_matrix(query[None, :], train, spec)[0]
    order = np.argsort(row, kind="stable")
    for k in (1, 5, 20):
        result = knn(train, query, k, spec)
        assert np.array_equal(result.indices, order[:k])
        assert np.array_equal(result.distances, row[order[:k]])


def test_prefix_monotonicity_in_k():
    rng = np.random.default_rng(41)
    train = rng.standard_normal((15, 2))
    query = rng.standard_normal(2)
    spec = DistanceSpec((ABS, ABS))
    prev = knn(train, query, 1, spec)
    for k in range(2, 16):
        cur = knn(train, query, k, spec)
        assert np.array_equal(cur.indices[: k - 1], prev.indices)
        prev = cur


def test_ties_broken_by_ascending_row_index():
    train = [[1.0], [1.0], [1.0], [3.0]]
    result = knn(train, [1.0], 3, DistanceSpec((ABS,)))
    assert np.array_equal(result.indices, [0, 1, 2])
    repeat = knn(train, [1.0], 3, DistanceSpec((ABS,)))
    assert np.array_equal(result.indices, repeat.indices)


def test_k_out_of_range():
    with pytest.raises(ValueError, match="k must be"):
        knn([[0.0]], [1.0], 2, DistanceSpec((ABS,)))
    with pytest.raises(ValueError, match="k must be"):
        knn([[0.0]], [1.0], 0, DistanceSpec((ABS,)))


def test_dimension_mismatch_propagates():
    with pytest.raises(ValueError, match="dimension"):
        knn([[0.0, 1.0]], [1.0, 2.0], 1, DistanceSpec((ABS,)))


class TestSelfKnn:
    def test_duplicate_rows(self):
        results = self_knn([[2.0], [2.0]], 1, DistanceSpec((ABS,)))
        assert results[0].distances[0] == 0.0 and results[0].indices[0] == 1
        assert results[1].distances[0] == 0.0 and results[1].indices[0] == 0

    def test_three_point_line(self):
        results = self_knn([[0.0], [1.0], [3.0]], 1, DistanceSpec((ABS,)))
        assert [r.distances[0] for r in results] == [1.0, 1.0, 2.0]

    def test_matches_per_row_knn_with_self_removed(self):
        rng = np.random.default_rng(59)
        train = rng.standard_normal((15, 2))
        spec = DistanceSpec((ABS, DistanceVariant.RAMP))
        results = self_knn(train, 4, spec)
        for i in range(15):
            others = np.delete(train, i, axis=0)
            expected = knn(others, train[i], 4, spec)
            # Map indices back to the original row numbering.
            mapped = expected.indices + (expected.indices >= i)
            assert np.array_equal(results[i].distances, expected.distances)
            assert np.array_equal(results[i].indices, mapped)

    def test_k_must_leave_room_for_self(self):
        with pytest.raises(ValueError, match="self"):
            self_knn([[0.0], [1.0]], 2, DistanceSpec((ABS,)))


def test_batch_matches_single_queries():
    rng = np.random.default_rng(61)
    train = rng.standard_normal((30, 3))
    queries = rng.standard_normal((7, 3))
    spec = DistanceSpec((ABS, ABS, ABS))
    dists, idx = knn_batch(train, queries, 5, spec)
    for i in range(7):
        single = knn(train, queries[i], 5, spec)
        assert np.array_equal(dists[i], single.distances)
        assert np.array_equal(idx[i], single.indices)


def test_batch_blocks_do_not_change_results():
    # More rows than the internal block size exercises the chunked path.
    rng = np.random.default_rng(67)
    train = rng.standard_normal((300, 2))
    spec = DistanceSpec((ABS, ABS))
    dists, idx = self_knn_batch(train, 3, spec)
    results = self_knn(train[:5], 3, spec)  # small sanity slice
    assert dists.shape == (300, 3)
    assert np.all(np.diff(dists, axis=1) >= 0)
    assert np.all(idx != np.arange(300)[:, None])
    assert results[0].distances.shape == (3,)
