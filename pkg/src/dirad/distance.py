"""Per-attribute distance variants and their record-level aggregation.

Three per-attribute treatments of a difference ``y_j - x_j``:

* absolute: ``|y_j - x_j|`` -- the symmetric city-block baseline,
* ramp: ``max(0, y_j - x_j)`` -- low test values count as absence of evidence,
* signed: ``y_j - x_j`` -- low test values offset high values elsewhere.

Record distances sum these per attribute (a Boscovich-style p=1 distance);
absolute and ramp also support a general Minkowski exponent p > 1. Signed is
only defined at p = 1.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from . import _backend
from .dataset import AttributeSpec, Direction


class DistanceVariant(enum.Enum):
    ABSOLUTE = "absolute"
    RAMP = "ramp"
    SIGNED = "signed"


_CODES = {
    DistanceVariant.ABSOLUTE: 0,
    DistanceVariant.RAMP: 1,
    DistanceVariant.SIGNED: 2,
}


@dataclass(frozen=True)
class DistanceSpec:
    """Per-attribute variant assignment plus the Minkowski exponent."""

    variants: tuple[DistanceVariant, ...]
    exponent_p: float = 1.0

    def __post_init__(self) -> None:
        variants = tuple(self.variants)
        if not variants:
            raise ValueError("a distance spec needs at least one attribute")
        p = float(self.exponent_p)
        if not math.isfinite(p) or p < 1.0:
            raise ValueError(f"exponent_p must be finite and >= 1, got {p}")
        if p != 1.0 and DistanceVariant.SIGNED in variants:
            raise ValueError("signed distance is only defined at exponent_p=1")
        object.__setattr__(self, "variants", variants)
        object.__setattr__(self, "exponent_p", p)

    @classmethod
    def uniform(
        cls, variant: DistanceVariant, m: int, exponent_p: float = 1.0
    ) -> "DistanceSpec":
        return cls((variant,) * m, exponent_p)

    @classmethod
    def for_schema(
        cls,
        schema: Iterable[AttributeSpec],
        variant: DistanceVariant,
        exponent_p: float = 1.0,
    ) -> "DistanceSpec":
        """Assign ``variant`` to directional attributes, absolute to the rest."""
        variants = tuple(
            variant if a.direction is not Direction.NONE else DistanceVariant.ABSOLUTE
            for a in schema
        )
        return cls(variants, exponent_p)

    @property
    def m(self) -> int:
        return len(self.variants)

    def codes(self) -> np.ndarray:
        """int8 variant codes consumed by the batch kernels."""
        return np.array([_CODES[v] for v in self.variants], dtype=np.int8)


def per_attribute(diff: float, variant: DistanceVariant) -> float:
    """Table of per-attribute distances applied to a difference y_j - x_j."""
    if variant is DistanceVariant.ABSOLUTE:
        return abs(diff)
    if variant is DistanceVariant.RAMP:
        return diff if diff > 0.0 else 0.0
    return diff


def record_distance(
    y: Sequence[float] | np.ndarray, x: Sequence[float] | np.ndarray, spec: DistanceSpec
) -> float:
    """Scalar record-level distance; the reference the batch kernels match.

    At p=1 this is the plain per-attribute sum (asymmetric whenever a ramp or
    signed attribute is present); for p>1 it is the Minkowski form over
    absolute/ramp attributes.
    """
    ya = np.asarray(y, dtype=np.float64)
    xa = np.asarray(x, dtype=np.float64)
    if ya.ndim != 1 or xa.ndim != 1:
        raise ValueError("record_distance expects 1-d vectors")
    if ya.shape[0] != xa.shape[0] or ya.shape[0] != spec.m:
        raise ValueError(
            f"dimension mismatch: y has {ya.shape[0]}, x has {xa.shape[0]}, "
            f"spec has {spec.m}"
        )
    p = spec.exponent_p
    acc = 0.0
    if p == 1.0:
        for j, variant in enumerate(spec.variants):
            acc += per_attribute(float(ya[j]) - float(xa[j]), variant)
        return acc
    for j, variant in enumerate(spec.variants):
        acc += math.pow(per_attribute(float(ya[j]) - float(xa[j]), variant), p)
    return math.pow(acc, 1.0 / p)


def distance_matrix(
    queries: np.ndarray, train: np.ndarray, spec: DistanceSpec
) -> np.ndarray:
    """(q, n) matrix with entry (i, j) = record_distance(queries[i], train[j]).

    Dispatches to the active kernel backend; output is bit-identical to the
    scalar operation.
    """
    q = np.ascontiguousarray(queries, dtype=np.float64)
    t = np.ascontiguousarray(train, dtype=np.float64)
    if q.ndim != 2 or t.ndim != 2:
        raise ValueError("distance_matrix expects 2-d matrices")
    if q.shape[1] != t.shape[1] or q.shape[1] != spec.m:
        raise ValueError(
            f"dimension mismatch: queries have {q.shape[1]} columns, train has "
            f"{t.shape[1]}, spec has {spec.m}"
        )
    return _backend.pairwise(q, t, spec.codes(), spec.exponent_p)
