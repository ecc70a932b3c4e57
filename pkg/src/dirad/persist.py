"""Model bundle persistence: a versioned .npz with a bit-exact round trip.

A bundle always stores the fitted model (NND or ALP) and may carry the
scaler and schema it was trained behind, so a saved model can score raw CSV
queries without the original training data.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .alp import AlpModel
from .dataset import AttributeSpec, Direction, ScalingParams
from .distance import DistanceSpec, DistanceVariant
from .nnd import NndModel

FORMAT_VERSION = 1

_CODE_TO_VARIANT = {
    0: DistanceVariant.ABSOLUTE,
    1: DistanceVariant.RAMP,
    2: DistanceVariant.SIGNED,
}


@dataclass(frozen=True)
class ModelBundle:
    model: NndModel | AlpModel
    scaler: ScalingParams | None = None
    schema: tuple[AttributeSpec, ...] | None = None


def _spec_arrays(prefix: str, spec: DistanceSpec) -> dict:
    return {
        f"{prefix}_codes": spec.codes(),
        f"{prefix}_p": np.float64(spec.exponent_p),
    }


def _spec_from(arrays, prefix: str) -> DistanceSpec:
    codes = arrays[f"{prefix}_codes"]
    variants = tuple(_CODE_TO_VARIANT[int(c)] for c in codes)
    return DistanceSpec(variants, float(arrays[f"{prefix}_p"]))


def save_model(
    path,
    model: NndModel | AlpModel,
    scaler: ScalingParams | None = None,
    schema: tuple[AttributeSpec, ...] | None = None,
) -> None:
    arrays: dict = {"format_version": np.int64(FORMAT_VERSION)}
    if isinstance(model, NndModel):
        arrays["kind"] = np.str_("nnd")
        arrays["variant"] = np.str_(model.variant.value)
        arrays["train"] = model.train
        arrays["weights"] = model.weights
        arrays["directional_mask"] = model.directional_mask
        if model.spec is not None:
            arrays.update(_spec_arrays("spec", model.spec))
        if model.sorted_sums is not None:
            arrays["sorted_sums"] = model.sorted_sums
    elif isinstance(model, AlpModel):
        arrays["kind"] = np.str_("alp")
        arrays["train"] = model.train
        arrays["k"] = np.int64(model.k)
        arrays["l"] = np.int64(model.l)
        arrays["weights_k"] = model.weights_k
        arrays["weights_l"] = model.weights_l
        arrays["train_nn_dists"] = model.train_nn_dists
        arrays.update(_spec_arrays("spec", model.spec))
    else:
        raise TypeError(f"unsupported model type: {type(model).__name__}")
    if scaler is not None:
        arrays["scaler_midhinge"] = scaler.midhinge
        arrays["scaler_semi_iqr"] = scaler.semi_iqr
    if schema is not None:
        arrays["schema_names"] = np.array([a.name for a in schema])
        arrays["schema_directions"] = np.array([a.direction.value for a in schema])
    # Write through a handle so np.savez cannot append ".npz" to the path.
    with open(path, "wb") as handle:
        np.savez(handle, **arrays)


def load_model(path) -> ModelBundle:
    with np.load(path, allow_pickle=False) as data:
        version = int(data["format_version"])
        if version != FORMAT_VERSION:
            raise ValueError(
                f"unsupported model format version {version}; this build "
                f"reads version {FORMAT_VERSION}"
            )
        kind = str(data["kind"])
        if kind == "nnd":
            model: NndModel | AlpModel = NndModel(
                DistanceVariant(str(data["variant"])),
                data["train"],
                data["weights"],
                data["directional_mask"],
                _spec_from(data, "spec") if "spec_codes" in data else None,
                data["sorted_sums"] if "sorted_sums" in data else None,
            )
        elif kind == "alp":
            model = AlpModel(
                data["train"],
                int(data["k"]),
                int(data["l"]),
                data["weights_k"],
                data["weights_l"],
                _spec_from(data, "spec"),
                data["train_nn_dists"],
            )
        else:
            raise ValueError(f"unknown model kind {kind!r}")
        scaler = None
        if "scaler_midhinge" in data:
            scaler = ScalingParams(data["scaler_midhinge"], data["scaler_semi_iqr"])
        schema = None
        if "schema_names" in data:
            schema = tuple(
                AttributeSpec(str(name), Direction(str(direction)))
                for name, direction in zip(
                    data["schema_names"], data["schema_directions"]
                )
            )
    return ModelBundle(model, scaler, schema)
