import numpy as np
import pytest

from quatcomp.errors import CapacityError, PurityError
from quatcomp.observation import (
    ObservationSet,
    SamplingScheme,
    derive_seed,
    make_observations,
    observe,
    sample_indices,
)
from quatcomp.quat import QMatrix
from quatcomp.synth import gen_exact
from quatcomp.weights import NoiseCovariance


class TestDeriveSeed:
    def test_deterministic(self):
        assert derive_seed(7, 1, 2) == derive_seed(7, 1, 2)
        assert derive_seed(7, 1, 2) != derive_seed(7, 2, 1)
        assert derive_seed(7) != derive_seed(8)


class TestSampling:
    def test_without_replacement_full_grid(self):
        rows, cols = sample_indices(SamplingScheme("without", 3), 4, 5, 20)
        flat = sorted(r * 5 + c for r, c in zip(rows, cols))
        assert flat == list(range(20))

    def test_without_replacement_distinct(self):
        rows, cols = sample_indices(SamplingScheme("without", 11), 10, 10, 60)
        flat = rows * 10 + cols
        assert len(np.unique(flat)) == 60

    def test_with_replacement_uniform_frequencies(self):
        rows, cols = sample_indices(SamplingScheme("with", 123), 2, 2, 100_000)
        flat = rows * 2 + cols
        freqs = np.bincount(flat, minlength=4) / 100_000
        assert np.all(freqs >= 0.24) and np.all(freqs <= 0.26)

    def test_determinism(self):
        a = sample_indices(SamplingScheme("without", 42), 8, 9, 30)
        b = sample_indices(SamplingScheme("without", 42), 8, 9, 30)
        np.testing.assert_array_equal(a[0], b[0])
        np.testing.assert_array_equal(a[1], b[1])
        c = sample_indices(SamplingScheme("without", 43), 8, 9, 30)
        assert not (np.array_equal(a[0], c[0]) and np.array_equal(a[1], c[1]))

    def test_capacity_error(self):
        with pytest.raises(CapacityError):
            sample_indices(SamplingScheme("without", 1), 3, 3, 10)

    def test_bad_kind(self):
        with pytest.raises(Exception):
            SamplingScheme("bootstrap", 1)


class TestObserve:
    def test_noiseless_values_exact(self):
        theta = gen_exact(10, 12, 3, seed=5)
        rows, cols = sample_indices(SamplingScheme("without", 2), 10, 12, 40)
        obs = observe(theta, rows, cols)
        np.testing.assert_array_equal(obs.values[:, 0], theta.c1[rows, cols])
        np.testing.assert_array_equal(obs.values[:, 1], theta.c2[rows, cols])
        np.testing.assert_array_equal(obs.values[:, 2], theta.c3[rows, cols])
        assert not obs.noisy

    def test_entries_are_pure(self):
        theta = gen_exact(6, 6, 2, seed=1)
        obs = make_observations(theta, SamplingScheme("without", 4), 10,
                                noise=NoiseCovariance.isotropic(1.0))
        for k in range(obs.n):
            _, _, q = obs.entry(k)
            assert q.is_pure

    def test_noise_covariance_matches(self):
        theta = QMatrix.zeros(10, 10)
        rows, cols = sample_indices(SamplingScheme("with", 17), 10, 10, 100_000)
        cov = NoiseCovariance.diagonal(1.5, 0.5, 0.2)
        obs = observe(theta, rows, cols, kind="with", noise=cov, seed=99)
        emp = np.cov(obs.values.T)
        diag_ok = np.abs(np.diag(emp) - [1.5, 0.5, 0.2]) <= \
            0.05 * np.array([1.5, 0.5, 0.2])
        assert diag_ok.all()
        off = emp - np.diag(np.diag(emp))
        assert np.abs(off).max() <= 0.05 * 1.5

    def test_isotropic_marginals(self):
        theta = QMatrix.zeros(5, 5)
        rows, cols = sample_indices(SamplingScheme("with", 23), 5, 5, 60_000)
        obs = observe(theta, rows, cols, kind="with",
                      noise=NoiseCovariance.isotropic(1.0), seed=7)
        var = obs.values.var(axis=0)
        assert np.all(np.abs(var - 1.0) <= 0.05)

    def test_rejects_non_pixel(self):
        a = QMatrix.from_real(np.ones((3, 3)))
        with pytest.raises(PurityError):
            observe(a, np.array([0]), np.array([0]))

    def test_duplicate_positions_rejected_without_replacement(self):
        with pytest.raises(Exception):
            ObservationSet(rows=np.array([0, 0]), cols=np.array([1, 1]),
                           values=np.zeros((2, 3)), kind="without",
                           d1=3, d2=3)
