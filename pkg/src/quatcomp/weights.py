"""Cross-channel weight construction and the regularization-weight rule.

Two canonical trace-3 positive definite weights correct for structured
noise in the quadratic loss: a diagonal rebalancing weight built from the
per-channel noise variances, and a decorrelating weight proportional to
the inverse noise covariance.  Convex combinations with the identity
trade noise correction against staying aligned with the unweighted
square error.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import DomainError, IllConditionedError, ShapeMismatchError
from .quat import ChannelWeight

_COND_LIMIT = 1e12


class NoiseCovariance:
    """Symmetric positive definite 3x3 noise covariance (gray levels^2)."""

    __slots__ = ("sigma", "inverse", "chol", "eigvals")

    def __init__(self, sigma):
        sigma = np.array(sigma, dtype=np.float64, copy=True)
        if sigma.shape != (3, 3):
            raise ShapeMismatchError(f"covariance must be 3x3, got {sigma.shape}")
        if not np.allclose(sigma, sigma.T, atol=1e-12, rtol=0.0):
            raise DomainError("covariance must be symmetric within 1e-12")
        sigma = (sigma + sigma.T) / 2.0
        eigvals = np.linalg.eigvalsh(sigma)
        if eigvals[0] <= 0.0:
            raise DomainError(
                f"covariance must be positive definite, eigenvalues "
                f"{eigvals.tolist()}")
        inverse = np.linalg.inv(sigma)
        chol = np.linalg.cholesky(sigma)
        for arr in (sigma, inverse, chol, eigvals):
            arr.setflags(write=False)
        object.__setattr__(self, "sigma", sigma)
        object.__setattr__(self, "inverse", inverse)
        object.__setattr__(self, "chol", chol)
        object.__setattr__(self, "eigvals", eigvals)

    def __setattr__(self, name, value):
        raise AttributeError("NoiseCovariance is immutable")

    @classmethod
    def diagonal(cls, vr: float, vg: float, vb: float) -> "NoiseCovariance":
        return cls(np.diag([vr, vg, vb]))

    @classmethod
    def isotropic(cls, variance: float) -> "NoiseCovariance":
        return cls(np.eye(3) * variance)

    @property
    def condition(self) -> float:
        return float(self.eigvals[-1] / self.eigvals[0])

    def variances(self) -> np.ndarray:
        return np.diag(self.sigma).copy()

    def __repr__(self) -> str:
        return f"NoiseCovariance({self.sigma.tolist()})"


def ws_rebalance(variances) -> ChannelWeight:
    """Diagonal trace-3 weight proportional to the inverse variances.

    This is the unique diagonal trace-3 weight minimizing Tr(W Sigma W)
    when Sigma is diagonal: channels with noisier data get less weight.
    """
    v = np.asarray(variances, dtype=np.float64)
    if v.shape != (3,):
        raise ShapeMismatchError(f"need 3 variances, got shape {v.shape}")
    if np.any(v <= 0.0):
        raise DomainError(f"variances must be positive, got {v.tolist()}")
    inv = 1.0 / v
    return ChannelWeight(np.diag(3.0 * inv / inv.sum()))


def wc_decorrelate(cov: NoiseCovariance) -> ChannelWeight:
    """Trace-3 weight 3 Sigma^{-1} / Tr(Sigma^{-1}).

    The unique trace-3 positive definite minimizer of Tr(W Sigma W);
    it whitens the noise up to a scalar.
    """
    if cov.condition > _COND_LIMIT:
        raise IllConditionedError(
            f"covariance condition number {cov.condition:.3e} exceeds "
            f"{_COND_LIMIT:.0e}")
    inv = cov.inverse
    return ChannelWeight(3.0 * inv / np.trace(inv))


def combine_weights(gamma1: float, gamma2: float, ws: ChannelWeight,
                    wc: ChannelWeight) -> ChannelWeight:
    """(1 - g1 - g2) I + g1 Ws + g2 Wc on the weight simplex."""
    if gamma1 < 0.0 or gamma2 < 0.0 or gamma1 + gamma2 > 1.0 + 1e-12:
        raise DomainError(
            f"need gamma1, gamma2 >= 0 with gamma1 + gamma2 <= 1, "
            f"got ({gamma1}, {gamma2})")
    w = ((1.0 - gamma1 - gamma2) * np.eye(3)
         + gamma1 * ws.w + gamma2 * wc.w)
    return ChannelWeight(w)


def lambda_rule(weight: ChannelWeight, cov: NoiseCovariance, n: int,
                d1: int, d2: int, c_lambda: float) -> float:
    """Regularization weight c * sqrt(Tr(W Sigma W) log(d1+d2) / (n min(d1,d2)))."""
    if n < 1 or d1 < 1 or d2 < 1:
        raise DomainError(f"need n, d1, d2 >= 1, got n={n}, d1={d1}, d2={d2}")
    if c_lambda <= 0.0:
        raise DomainError(f"c_lambda must be positive, got {c_lambda}")
    wsw = weight.w @ cov.sigma @ weight.w
    return c_lambda * math.sqrt(
        np.trace(wsw) * math.log(d1 + d2) / (n * min(d1, d2)))


def weight_factors(weight: ChannelWeight,
                   cov: NoiseCovariance) -> tuple[float, float]:
    """Error-bound diagnostics (F1, F2).

    F1 = max|W| / lambda_min(W)^3 penalizes deviation from the identity;
    F2 = Tr(W Sigma W) / lambda_min(W)^2 measures weighted noise energy.
    Both equal their minima exactly at W = I (F1 = 1) for trace-3 weights.
    """
    lam = weight.lambda_min
    f1 = weight.max_entry / lam**3
    f2 = float(np.trace(weight.w @ cov.sigma @ weight.w)) / lam**2
    return f1, f2
