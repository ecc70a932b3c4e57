import numpy as np
import pytest

from dirad.dataset import Direction
from dirad.synthgen import (
    SynthSpec,
    default_shifts,
    generate,
    grid,
    replicate_seed,
)


class TestSpecValidation:
    def test_gaussian_shift_range(self):
        with pytest.raises(ValueError, match="shift"):
            SynthSpec("gaussian", 1.5)

    def test_bernoulli_shift_range(self):
        with pytest.raises(ValueError, match="shift"):
            SynthSpec("bernoulli", 0.6)

    def test_unknown_family(self):
        with pytest.raises(ValueError, match="family"):
            SynthSpec("poisson", 0.1)

    def test_counts_positive(self):
        with pytest.raises(ValueError, match="n_train"):
            SynthSpec("gaussian", 0.1, n_train=0)


class TestGenerate:
    def test_shapes_labels_and_schema(self):
        train, test = generate(SynthSpec("gaussian", 0.3, seed=5))
        assert train.records.shape == (1000, 10)
        assert train.labels is None
        assert test.records.shape == (200, 10)
        assert test.labels.sum() == 100
        assert all(a.direction is Direction.HIGH for a in train.schema)

    def test_same_seed_bit_identical(self):
        spec = SynthSpec("gaussian", 0.5, seed=123)
        t1, s1 = generate(spec)
        t2, s2 = generate(spec)
        assert np.array_equal(t1.records, t2.records)
        assert np.array_equal(s1.records, s2.records)

    def test_different_seeds_differ(self):
        a, _ = generate(SynthSpec("gaussian", 0.5, seed=1))
        b, _ = generate(SynthSpec("gaussian", 0.5, seed=2))
        assert not np.array_equal(a.records, b.records)

    def test_bernoulli_values_are_binary(self):
        train, test = generate(SynthSpec("bernoulli", 0.25, seed=9))
        assert set(np.unique(train.records)) <= {0.0, 1.0}
        assert set(np.unique(test.records)) <= {0.0, 1.0}

    def test_bernoulli_extreme_shift_probabilities(self):
        # b=0.5 puts the normal success probability at 0.25, anomalous at 0.75.
        spec = SynthSpec("bernoulli", 0.5, n_train=20000, seed=2)
        train, test = generate(spec)
        assert abs(train.records.mean() - 0.25) < 0.01
        anom = test.records[test.labels]
        assert abs(anom.mean() - 0.75) < 0.03

    def test_null_shift_classes_indistinguishable(self):
        _, test = generate(SynthSpec("gaussian", 0.0, n_test_normal=2000,
                                     n_test_anomalous=2000, seed=3))
        gap = test.records[test.labels].mean() - test.records[~test.labels].mean()
        assert abs(gap) < 0.05

    def test_training_means_converge_to_zero(self):
        spec = SynthSpec("gaussian", 0.4, n_train=10_000, seed=7)
        train, _ = generate(spec)
        tolerance = 3.0 * (1.0 / np.sqrt(10_000)) * 4.0
        assert np.all(np.abs(train.records.mean(axis=0)) < tolerance)


class TestGrid:
    def test_full_gaussian_grid_size(self):
        specs = grid("gaussian", default_shifts("gaussian"), replicates=100)
        assert len(specs) == 11 * 100

    def test_single_replicate(self):
        specs = grid("gaussian", [0.0, 0.5], replicates=1)
        assert len(specs) == 2

    def test_bernoulli_default_shift_values(self):
        shifts = default_shifts("bernoulli")
        assert len(shifts) == 11
        assert shifts[0] == 0.0 and shifts[-1] == 0.5

    def test_seeds_are_stable_and_distinct(self):
        s1 = replicate_seed(0, "gaussian", 0.5, 0)
        s2 = replicate_seed(0, "gaussian", 0.5, 1)
        s3 = replicate_seed(0, "gaussian", 0.6, 0)
        assert s1 == replicate_seed(0, "gaussian", 0.5, 0)
        assert len({s1, s2, s3}) == 3
        specs = grid("gaussian", [0.5], replicates=3, base_seed=0)
        assert [s.seed for s in specs] == [replicate_seed(0, "gaussian", 0.5, r)
                                           for r in range(3)]

    def test_replicates_must_be_positive(self):
        with pytest.raises(ValueError, match="replicates"):
            grid("gaussian", [0.1], replicates=0)

    def test_spec_fields_forwarded(self):
        specs = grid("bernoulli", [0.1], replicates=1, n_train=50, m=4)
        assert specs[0].n_train == 50 and specs[0].m == 4
