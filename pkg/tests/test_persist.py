import numpy as np
import pytest

from dirad import alp, nnd
from dirad.dataset import AttributeSpec, Dataset, Direction, ScalingParams
from dirad.distance import DistanceVariant
from dirad.persist import FORMAT_VERSION, load_model, save_model


def fitted_models():
    rng = np.random.default_rng(31)
    schema = (
        AttributeSpec("a", Direction.HIGH),
        AttributeSpec("b", Direction.NONE),
    )
    ds = Dataset(schema, rng.standard_normal((12, 2)))
    yield nnd.fit(ds, nnd.NndConfig(DistanceVariant.ABSOLUTE, k=3))
    yield nnd.fit(ds, nnd.NndConfig(DistanceVariant.RAMP, k=2))
    yield nnd.fit(ds, nnd.NndConfig(DistanceVariant.SIGNED, k=4))
    yield alp.fit(ds, alp.AlpConfig(DistanceVariant.RAMP, k=3, l=5))
    # Signed with every attribute directional: no neighbour spec at all.
    all_dir = Dataset(
        tuple(AttributeSpec(f"x{j}", Direction.HIGH) for j in range(2)),
        rng.standard_normal((8, 2)),
    )
    yield nnd.fit(all_dir, nnd.NndConfig(DistanceVariant.SIGNED, k=2))


def assert_arrays_equal(a, b):
    assert (a is None) == (b is None)
    if a is not None:
        assert a.dtype == b.dtype
        assert a.tobytes() == b.tobytes()


@pytest.mark.parametrize("model", list(fitted_models()), ids=lambda m: type(m).__name__)
def test_roundtrip_is_bit_exact(tmp_path, model):
    path = tmp_path / "model.npz"
    save_model(path, model)
    loaded = load_model(path).model
    assert type(loaded) is type(model)
    if isinstance(model, nnd.NndModel):
        assert loaded.variant == model.variant
        assert loaded.spec == model.spec
        assert_arrays_equal(loaded.train, model.train)
        assert_arrays_equal(loaded.weights, model.weights)
        assert_arrays_equal(loaded.sorted_sums, model.sorted_sums)
        assert np.array_equal(loaded.directional_mask, model.directional_mask)
    else:
        assert (loaded.k, loaded.l) == (model.k, model.l)
        assert loaded.spec == model.spec
        assert_arrays_equal(loaded.train, model.train)
        assert_arrays_equal(loaded.train_nn_dists, model.train_nn_dists)


def test_roundtrip_scores_identically(tmp_path):
    rng = np.random.default_rng(37)
    schema = tuple(AttributeSpec(f"x{j}", Direction.HIGH) for j in range(3))
    ds = Dataset(schema, rng.standard_normal((15, 3)))
    model = nnd.fit(ds, nnd.NndConfig(DistanceVariant.RAMP, k=4))
    path = tmp_path / "m.npz"
    save_model(path, model)
    loaded = load_model(path).model
    queries = rng.standard_normal((6, 3))
    assert np.array_equal(
        nnd.anomaly_scores(model, queries), nnd.anomaly_scores(loaded, queries)
    )


def test_bundle_carries_scaler_and_schema(tmp_path):
    rng = np.random.default_rng(41)
    schema = (AttributeSpec("f", Direction.HIGH),)
    ds = Dataset(schema, rng.standard_normal((10, 1)))
    model = nnd.fit(ds, nnd.NndConfig(DistanceVariant.ABSOLUTE, k=2))
    scaler = ScalingParams([0.5], [2.0])
    path = tmp_path / "bundle.npz"
    save_model(path, model, scaler=scaler, schema=schema)
    bundle = load_model(path)
    assert bundle.schema == schema
    assert_arrays_equal(bundle.scaler.midhinge, scaler.midhinge)
    assert_arrays_equal(bundle.scaler.semi_iqr, scaler.semi_iqr)


def test_version_mismatch_rejected(tmp_path):
    path = tmp_path / "weird.npz"
    np.savez(path, format_version=np.int64(FORMAT_VERSION + 1), kind=np.str_("nnd"))
    with pytest.raises(ValueError, match="version"):
        load_model(path)
