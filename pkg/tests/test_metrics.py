import math

import numpy as np
import pytest

from quatcomp.errors import DomainError
from quatcomp.metrics import (
    bound_curve,
    cone_bound,
    error_metrics,
    rescaled_n,
    schatten_q,
    spikiness,
)
from quatcomp.quat import QMatrix, fro_norm
from quatcomp.synth import gen_approx

from helpers import rand_low_rank, rand_qmatrix


class TestErrorMetrics:
    def test_identical_matrices(self):
        a = QMatrix.from_pure(np.ones((4, 4)), np.ones((4, 4)),
                              np.ones((4, 4)))
        out = error_metrics(a, a)
        assert out["mse"] == 0.0
        assert out["rse"] == 0.0
        assert out["psnr"] == math.inf

    def test_unit_component_error_gives_mse_three(self):
        d1, d2 = 5, 7
        truth = QMatrix.from_pure(*[np.full((d1, d2), 2.0)] * 3)
        est = QMatrix.from_pure(*[np.full((d1, d2), 3.0)] * 3)
        out = error_metrics(est, truth)
        assert out["mse"] == pytest.approx(3.0, rel=1e-13)

    def test_psnr_round_trips(self):
        rng = np.random.default_rng(401)
        truth = rand_qmatrix(rng, 6, 6, pure=True)
        est = rand_qmatrix(rng, 6, 6, pure=True)
        out = error_metrics(est, truth)
        mse_back = 255.0**2 / 10 ** (out["psnr"] / 10.0)
        # psnr normalizes per channel sample: mse = 3 * per-channel mse
        assert out["mse"] == pytest.approx(3 * mse_back, rel=1e-10)

    def test_rse_identity(self):
        rng = np.random.default_rng(402)
        truth = rand_qmatrix(rng, 5, 8, pure=True)
        est = rand_qmatrix(rng, 5, 8, pure=True)
        out = error_metrics(est, truth)
        assert out["rse"] == pytest.approx(
            out["mse"] * 40 / fro_norm(truth) ** 2, rel=1e-12)

    def test_shape_mismatch(self):
        with pytest.raises(Exception):
            error_metrics(QMatrix.zeros(2, 2), QMatrix.zeros(3, 3))


class TestSpikiness:
    def test_constant_matrix(self):
        a = QMatrix.from_pure(*[np.full((6, 9), 4.0)] * 3)
        assert spikiness(a) == pytest.approx(1.0, rel=1e-12)

    def test_single_nonzero_entry(self):
        c = np.zeros((5, 4))
        c[2, 1] = 7.0
        a = QMatrix.from_pure(c, np.zeros_like(c), np.zeros_like(c))
        assert spikiness(a) == pytest.approx(math.sqrt(20), rel=1e-12)

    def test_range(self):
        rng = np.random.default_rng(403)
        for _ in range(20):
            a = rand_qmatrix(rng, 7, 5)
            val = spikiness(a)
            assert 1.0 - 1e-12 <= val <= math.sqrt(35) + 1e-12

    def test_zero_matrix_rejected(self):
        with pytest.raises(DomainError):
            spikiness(QMatrix.zeros(3, 3))


class TestSchattenQ:
    def test_q_zero_counts_rank(self):
        rng = np.random.default_rng(404)
        a = rand_low_rank(rng, 9, 8, 5)
        assert schatten_q(a, 0.0) == 5.0

    def test_half_power_diagonal(self):
        a = QMatrix.from_real(np.diag([4.0, 1.0]))
        assert schatten_q(a, 0.5) == pytest.approx(3.0, rel=1e-12)

    def test_on_generated_matrix(self):
        a = gen_approx(30, 30, 5, seed=11)
        rho = schatten_q(a, 0.5)
        assert np.isfinite(rho) and rho > 0

    def test_validates_q(self):
        with pytest.raises(DomainError):
            schatten_q(QMatrix.zeros(2, 2), 1.0)


class TestRescaledN:
    def test_unit_point(self):
        d, r = 40, 5
        n = r * d * math.log(2 * d)
        assert rescaled_n(n, d, r, 0.0) == pytest.approx(1.0, rel=1e-12)
        assert bound_curve(1.0, 0.17) == pytest.approx(0.17)

    def test_reference_curve_points(self):
        assert bound_curve(2.0, 0.17, q=0.0) == pytest.approx(0.085)
        assert bound_curve(16.0, 0.15, q=0.5) == pytest.approx(0.15 / 8)

    def test_half_q_scaling(self):
        d, rho = 50, 80.0
        n = 1000.0
        expect = n / (rho ** (4 / 3) * d ** (1 / 3) * math.log(100))
        assert rescaled_n(n, d, rho, 0.5) == pytest.approx(expect, rel=1e-12)


class TestConeBound:
    def test_exact_rank_form(self):
        rng = np.random.default_rng(405)
        delta = rand_qmatrix(rng, 6, 6)
        lhs, rhs = cone_bound(delta, rho=4.0, q=0.0, constant=5.0)
        assert rhs == pytest.approx(5.0 * 2.0 * fro_norm(delta), rel=1e-12)
        assert lhs > 0

    def test_zero_error(self):
        lhs, rhs = cone_bound(QMatrix.zeros(4, 4), rho=3.0, q=0.0,
                              constant=5.0)
        assert lhs == 0.0 and rhs == 0.0
