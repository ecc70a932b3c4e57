"""Exact brute-force k-nearest-neighbour queries under any DistanceSpec.

Brute force is deliberate: ramp and signed distances break the symmetry and
triangle-inequality assumptions of spatial indexes, and the target dataset
sizes keep O(n*m) per query tractable. Ties are broken by ascending training
row index so results are deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .distance import DistanceSpec, distance_matrix

# Query rows per kernel call; bounds the (block, n) scratch matrix.
_BLOCK = 256


@dataclass(frozen=True)
class NeighbourResult:
    distances: np.ndarray
    indices: np.ndarray


def _as_matrix(train) -> np.ndarray:
    t = np.ascontiguousarray(train, dtype=np.float64)
    if t.ndim != 2:
        raise ValueError("training data must be a 2-d matrix")
    return t


def knn_batch(
    train: np.ndarray, queries: np.ndarray, k: int, spec: DistanceSpec
) -> tuple[np.ndarray, np.ndarray]:
    """k nearest training rows per query: (q, k) distances and indices.

    Distances ascend along each row; equidistant neighbours keep ascending
    training index order (stable sort).
    """
    t = _as_matrix(train)
    q = np.ascontiguousarray(queries, dtype=np.float64)
    if q.ndim != 2:
        raise ValueError("queries must be a 2-d matrix")
    n = t.shape[0]
    if not 1 <= k <= n:
        raise ValueError(f"k must be in [1, {n}], got {k}")
    dists = np.empty((q.shape[0], k), dtype=np.float64)
    idx = np.empty((q.shape[0], k), dtype=np.int64)
    for start in range(0, q.shape[0], _BLOCK):
        block = distance_matrix(q[start : start + _BLOCK], t, spec)
        order = np.argsort(block, axis=1, kind="stable")[:, :k]
        dists[start : start + _BLOCK] = np.take_along_axis(block, order, axis=1)
        idx[start : start + _BLOCK] = order
    return dists, idx


def knn(
    train: np.ndarray, query: np.ndarray, k: int, spec: DistanceSpec
) -> NeighbourResult:
    """k nearest training rows to a single query vector."""
    q = np.asarray(query, dtype=np.float64)
    if q.ndim != 1:
        raise ValueError("query must be a 1-d vector")
    dists, idx = knn_batch(train, q[None, :], k, spec)
    return NeighbourResult(dists[0], idx[0])


def self_knn_batch(
    train: np.ndarray, k: int, spec: DistanceSpec
) -> tuple[np.ndarray, np.ndarray]:
    """For every training row, its k nearest other rows (self excluded)."""
    t = _as_matrix(train)
    n = t.shape[0]
    if not 1 <= k <= n - 1:
        raise ValueError(f"k must be in [1, {n - 1}] for self-queries, got {k}")
    dists = np.empty((n, k), dtype=np.float64)
    idx = np.empty((n, k), dtype=np.int64)
    for start in range(0, n, _BLOCK):
        stop = min(start + _BLOCK, n)
        block = distance_matrix(t[start:stop], t, spec)
        block[np.arange(stop - start), np.arange(start, stop)] = np.inf
        order = np.argsort(block, axis=1, kind="stable")[:, :k]
        dists[start:stop] = np.take_along_axis(block, order, axis=1)
        idx[start:stop] = order
    return dists, idx


def self_knn(train: np.ndarray, k: int, spec: DistanceSpec) -> list[NeighbourResult]:
    """Per-row nearest-neighbour results over the training set itself."""
    dists, idx = self_knn_batch(train, k, spec)
    return [NeighbourResult(dists[i], idx[i]) for i in range(dists.shape[0])]
