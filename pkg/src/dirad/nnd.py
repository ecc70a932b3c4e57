"""Weighted nearest-neighbour-distance anomaly detector.

The raw score of a query is the linearly weighted average of its k nearest
training distances. For the signed variant no neighbour queries are needed on
the directional attributes: under signed distance every query shares the same
neighbour ranking (the training rows with the largest directional attribute
sums), so the weighted distance collapses to comparing attribute sums. Any
adirectional attributes contribute a separate weighted NND with absolute
distance, added on top of that risk score.

Raw scores are squashed into (0, 1) by ``contract`` for evaluation; the
squash is strictly increasing, so rankings (and hence AUROC) are unchanged.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dataset import Dataset, Direction
from .distance import DistanceSpec, DistanceVariant
from .neighbours import knn_batch


def linear_weights(k: int) -> np.ndarray:
    """Linearly descending weights w_i = 2(k+1-i) / (k(k+1)), summing to 1."""
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    i = np.arange(1, k + 1, dtype=np.float64)
    return 2.0 * (k + 1.0 - i) / (k * (k + 1.0))


def contract(raw):
    """Squash a raw score into (0, 1): a -> a / (2(|a| + 1)) + 1/2.

    Strictly increasing bijection from the reals onto (0, 1); 0 maps to 0.5.
    Accepts scalars or arrays.
    """
    raw = np.asarray(raw, dtype=np.float64)
    out = 0.5 * (raw / (np.abs(raw) + 1.0)) + 0.5
    return out if out.ndim else float(out)


@dataclass(frozen=True)
class NndConfig:
    variant: DistanceVariant
    k: int = 8
    exponent_p: float = 1.0


@dataclass(frozen=True)
class NndModel:
    """Fitted detector state; immutable, scoring is read-only.

    ``spec`` is the distance used for neighbour queries: the full-width spec
    for absolute/ramp, the absolute spec over the adirectional columns for
    signed (None when every attribute is directional). ``sorted_sums`` holds
    the descending directional attribute sums of the training rows and exists
    only for the signed variant.
    """

    variant: DistanceVariant
    train: np.ndarray
    weights: np.ndarray
    directional_mask: np.ndarray
    spec: DistanceSpec | None
    sorted_sums: np.ndarray | None = None

    @property
    def k(self) -> int:
        return self.weights.shape[0]


def _require_oriented(ds: Dataset) -> None:
    if any(a.direction is Direction.LOW for a in ds.schema):
        raise ValueError(
            "dataset contains direction=low attributes; apply orient() first"
        )


def fit(train: Dataset, cfg: NndConfig) -> NndModel:
    """Fit on an (already scaled) training dataset of normal records."""
    _require_oriented(train)
    n = train.n_records
    if n == 0:
        raise ValueError("training set is empty")
    if cfg.k > n:
        raise ValueError(f"k={cfg.k} exceeds the training size n={n}")
    weights = linear_weights(cfg.k)
    mask = train.directional_mask
    records = np.ascontiguousarray(train.records, dtype=np.float64)

    if cfg.variant is DistanceVariant.SIGNED:
        if cfg.exponent_p != 1.0:
            raise ValueError("signed distance is only defined at exponent_p=1")
        sums = records[:, mask].sum(axis=1)
        sorted_sums = np.sort(sums)[::-1].copy()
        n_adir = int((~mask).sum())
        spec = (
            DistanceSpec.uniform(DistanceVariant.ABSOLUTE, n_adir)
            if n_adir
            else None
        )
        return NndModel(cfg.variant, records, weights, mask, spec, sorted_sums)

    spec = DistanceSpec.for_schema(train.schema, cfg.variant, cfg.exponent_p)
    return NndModel(cfg.variant, records, weights, mask, spec)


def _signed_risk_batch(model: NndModel, queries: np.ndarray) -> np.ndarray:
    sums = queries[:, model.directional_mask].sum(axis=1)
    top = float(np.dot(model.weights, model.sorted_sums[: model.k]))
    return sums - top


def raw_scores(model: NndModel, queries: np.ndarray) -> np.ndarray:
    """Raw detector scores for a (q, m) query matrix (may be negative)."""
    q = np.ascontiguousarray(queries, dtype=np.float64)
    if q.ndim != 2:
        raise ValueError("queries must be a 2-d matrix")
    if q.shape[1] != model.train.shape[1]:
        raise ValueError(
            f"queries have {q.shape[1]} attributes, the model expects "
            f"{model.train.shape[1]}"
        )
    if model.variant is not DistanceVariant.SIGNED:
        dists, _ = knn_batch(model.train, q, model.k, model.spec)
        return dists @ model.weights

    adir = ~model.directional_mask
    parts = []
    if model.directional_mask.any():
        parts.append(_signed_risk_batch(model, q))
    if model.spec is not None:
        dists, _ = knn_batch(model.train[:, adir], q[:, adir], model.k, model.spec)
        parts.append(dists @ model.weights)
    return parts[0] if len(parts) == 1 else parts[0] + parts[1]


def raw_score(model: NndModel, y: np.ndarray) -> float:
    ya = np.asarray(y, dtype=np.float64)
    if ya.ndim != 1:
        raise ValueError("y must be a 1-d vector")
    return float(raw_scores(model, ya[None, :])[0])


def signed_risk(model: NndModel, y: np.ndarray) -> float:
    """Directional risk S_y - sum_i w_i S_(i) against the top training sums."""
    if model.variant is not DistanceVariant.SIGNED:
        raise ValueError("signed_risk is only defined for the signed variant")
    ya = np.asarray(y, dtype=np.float64)
    if ya.ndim != 1 or ya.shape[0] != model.train.shape[1]:
        raise ValueError("y must be a 1-d vector matching the model width")
    return float(_signed_risk_batch(model, ya[None, :])[0])


def anomaly_scores(model: NndModel, queries: np.ndarray) -> np.ndarray:
    """Contracted scores in (0, 1), one per query row."""
    return contract(raw_scores(model, queries))


def anomaly_score(model: NndModel, y: np.ndarray) -> float:
    return float(contract(raw_score(model, y)))
