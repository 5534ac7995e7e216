import math

import numpy as np
import pytest

from quatcomp.errors import DomainError, IllConditionedError
from quatcomp.quat import ChannelWeight
from quatcomp.weights import (
    NoiseCovariance,
    combine_weights,
    lambda_rule,
    wc_decorrelate,
    weight_factors,
    ws_rebalance,
)

from helpers import rand_trace3_weight

# strongly correlated covariance used by the decorrelation experiments
CORR_COV = [[0.70, 0.50, 0.50],
            [0.50, 0.70, 0.66],
            [0.50, 0.66, 0.70]]


class TestNoiseCovariance:
    def test_validates(self):
        with pytest.raises(DomainError):
            NoiseCovariance(np.diag([1.0, -1.0, 1.0]))
        bad = np.eye(3)
        bad[0, 1] = 1e-6
        with pytest.raises(DomainError):
            NoiseCovariance(bad)

    def test_caches(self):
        cov = NoiseCovariance(CORR_COV)
        np.testing.assert_allclose(cov.inverse @ cov.sigma, np.eye(3),
                                   atol=1e-12)
        np.testing.assert_allclose(cov.chol @ cov.chol.T, cov.sigma,
                                   atol=1e-12)


class TestWsRebalance:
    def test_equal_variances_give_identity(self):
        w = ws_rebalance([1.0, 1.0, 1.0])
        np.testing.assert_allclose(w.w, np.eye(3), atol=1e-15)

    def test_hand_evaluated_unbalanced(self):
        # inverse variances 2/3, 2, 5 sum to 23/3
        w = ws_rebalance([1.5, 0.5, 0.2])
        np.testing.assert_allclose(np.diag(w.w),
                                   [6 / 23, 18 / 23, 45 / 23], rtol=1e-14)
        assert np.trace(w.w) == pytest.approx(3.0, abs=1e-13)

    def test_hand_evaluated_simple(self):
        # inverse variances (1/4, 1, 1) sum to 9/4
        w = ws_rebalance([4.0, 1.0, 1.0])
        np.testing.assert_allclose(np.diag(w.w), [1 / 3, 4 / 3, 4 / 3],
                                   rtol=1e-14)
        assert np.trace(w.w) == pytest.approx(3.0, abs=1e-13)

    def test_rejects_nonpositive(self):
        with pytest.raises(DomainError):
            ws_rebalance([1.0, 0.0, 1.0])

    def test_minimizes_over_diagonal_grid(self):
        # diagonal trace-3 weights on a dense grid never beat the formula
        cov = NoiseCovariance.diagonal(1.5, 0.5, 0.2)
        ws = ws_rebalance([1.5, 0.5, 0.2])
        best = np.trace(ws.w @ cov.sigma @ ws.w)
        axis = np.linspace(0.02, 3.0, 50)
        g1, g2, g3 = np.meshgrid(axis, axis, axis, indexing="ij")
        total = g1 + g2 + g3
        w1 = 3.0 * g1 / total
        w2 = 3.0 * g2 / total
        w3 = 3.0 * g3 / total
        vals = (1.5 * w1**2 + 0.5 * w2**2 + 0.2 * w3**2)
        assert vals.min() >= best - 1e-9


class TestWcDecorrelate:
    def test_identity(self):
        w = wc_decorrelate(NoiseCovariance(np.eye(3)))
        np.testing.assert_allclose(w.w, np.eye(3), atol=1e-14)

    def test_matches_inverse_formula(self):
        cov = NoiseCovariance(CORR_COV)
        w = wc_decorrelate(cov)
        inv = np.linalg.inv(np.array(CORR_COV))
        np.testing.assert_allclose(w.w, 3.0 * inv / np.trace(inv),
                                   rtol=1e-12)

    def test_hand_inverted_diagonal(self):
        # inverse is diag(1/2, 1, 1) with trace 5/2
        w = wc_decorrelate(NoiseCovariance.diagonal(2.0, 1.0, 1.0))
        np.testing.assert_allclose(np.diag(w.w), [0.6, 1.2, 1.2],
                                   rtol=1e-14)
        assert np.trace(w.w) == pytest.approx(3.0, abs=1e-13)

    def test_guards_ill_conditioned(self):
        cov = NoiseCovariance.diagonal(1.0, 1.0, 1e-13)
        with pytest.raises(IllConditionedError):
            wc_decorrelate(cov)

    def test_beats_random_weights(self):
        rng = np.random.default_rng(301)
        for _ in range(10):
            m = rng.standard_normal((3, 3))
            cov = NoiseCovariance(m @ m.T + 0.1 * np.eye(3))
            wc = wc_decorrelate(cov)
            best = np.trace(wc.w @ cov.sigma @ wc.w)
            for _ in range(100):
                w = rand_trace3_weight(rng)
                other = np.trace(w.w @ cov.sigma @ w.w)
                if np.linalg.norm(w.w - wc.w) > 1e-6:
                    assert other > best + 1e-9
                else:
                    assert other >= best - 1e-9


class TestCombine:
    def test_zero_gammas_give_identity(self):
        ws = ws_rebalance([2.0, 1.0, 0.5])
        wc = wc_decorrelate(NoiseCovariance(CORR_COV))
        w = combine_weights(0.0, 0.0, ws, wc)
        np.testing.assert_allclose(w.w, np.eye(3), atol=1e-14)

    def test_single_gamma_reduces_to_two_term_mix(self):
        ws = ws_rebalance([1.5, 0.5, 0.2])
        wc = wc_decorrelate(NoiseCovariance(CORR_COV))
        for gamma in (0.2, 0.5, 1.0):
            w = combine_weights(gamma, 0.0, ws, wc)
            np.testing.assert_allclose(
                w.w, (1 - gamma) * np.eye(3) + gamma * ws.w, atol=1e-14)

    def test_two_gamma_formula(self):
        sigma = NoiseCovariance([[75.0, 70.0, 0.0],
                                 [70.0, 75.0, 0.0],
                                 [0.0, 0.0, 5.0]])
        ws = ws_rebalance(np.diag(sigma.sigma))
        wc = wc_decorrelate(sigma)
        w = combine_weights(0.7, 0.1, ws, wc)
        expect = 0.2 * np.eye(3) + 0.7 * ws.w + 0.1 * wc.w
        np.testing.assert_allclose(w.w, expect, atol=1e-13)
        assert np.trace(w.w) == pytest.approx(3.0, abs=1e-12)

    def test_simplex_validation(self):
        ws = ws_rebalance([1.0, 1.0, 1.0])
        with pytest.raises(DomainError):
            combine_weights(0.7, 0.4, ws, ws)
        with pytest.raises(DomainError):
            combine_weights(-0.1, 0.0, ws, ws)

    def test_grid_stays_trace3_and_pd(self):
        ws = ws_rebalance([1.5, 0.5, 0.2])
        wc = wc_decorrelate(NoiseCovariance(CORR_COV))
        for g1 in np.linspace(0, 1, 6):
            for g2 in np.linspace(0, 1 - g1, 4):
                w = combine_weights(g1, g2, ws, wc)
                assert np.trace(w.w) == pytest.approx(3.0, abs=1e-12)
                assert w.lambda_min > 0


class TestLambdaRule:
    def test_homogeneous_in_c(self):
        cov = NoiseCovariance.isotropic(1.0)
        w = ChannelWeight.identity()
        lam1 = lambda_rule(w, cov, 900, 30, 30, 0.6)
        lam2 = lambda_rule(w, cov, 900, 30, 30, 1.2)
        assert lam2 == pytest.approx(2 * lam1, rel=1e-14)

    def test_plugged_in_value(self):
        cov = NoiseCovariance.isotropic(1.0)
        w = ChannelWeight.identity()
        lam = lambda_rule(w, cov, 900, 30, 30, 0.6)
        assert lam == pytest.approx(
            0.6 * math.sqrt(3 * math.log(60) / 27000), rel=1e-14)

    def test_covariance_scaling(self):
        w = ChannelWeight.identity()
        lam1 = lambda_rule(w, NoiseCovariance.isotropic(1.0), 500, 20, 30, 0.6)
        lam4 = lambda_rule(w, NoiseCovariance.isotropic(4.0), 500, 20, 30, 0.6)
        assert lam4 == pytest.approx(2 * lam1, rel=1e-14)

    def test_positive(self):
        w = ChannelWeight.identity()
        assert lambda_rule(w, NoiseCovariance.isotropic(0.01), 10, 5, 7, 0.1) > 0
        with pytest.raises(DomainError):
            lambda_rule(w, NoiseCovariance.isotropic(1.0), 0, 5, 7, 0.1)


class TestWeightFactors:
    def test_identity_attains_minima(self):
        cov = NoiseCovariance.isotropic(1.0)
        f1, f2 = weight_factors(ChannelWeight.identity(), cov)
        assert f1 == pytest.approx(1.0)
        assert f2 == pytest.approx(3.0)

    def test_random_weights_are_worse(self):
        rng = np.random.default_rng(302)
        for _ in range(100):
            w = rand_trace3_weight(rng)
            assert w.max_entry >= 1.0 - 1e-12
            assert w.lambda_min <= 1.0 + 1e-12
            if np.linalg.norm(w.w - np.eye(3)) > 1e-8:
                assert w.max_entry > 1.0 or w.lambda_min < 1.0
