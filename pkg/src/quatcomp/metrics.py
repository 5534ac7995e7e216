"""Error metrics, structural statistics and theoretical-curve evaluators."""

from __future__ import annotations

import math

import numpy as np

from .adjoint import singular_values
from .errors import DomainError, ShapeMismatchError
from .quat import QMatrix, fro_norm, max_norm

PEAK = 255.0


def error_metrics(theta_hat: QMatrix, theta_true: QMatrix) -> dict[str, float]:
    """MSE, RSE and PSNR of a reconstruction against the ground truth.

    MSE is squared Frobenius error per entry; RSE normalizes by the
    truth's squared Frobenius norm.  PSNR uses peak 255 and divides the
    squared error over all 3*d1*d2 real channel samples; exact recovery
    reports +inf.
    """
    if theta_hat.shape != theta_true.shape:
        raise ShapeMismatchError(
            f"shapes differ: {theta_hat.shape} vs {theta_true.shape}")
    delta = theta_hat - theta_true
    err2 = fro_norm(delta) ** 2
    d1, d2 = theta_true.shape
    mse = err2 / (d1 * d2)
    true2 = fro_norm(theta_true) ** 2
    rse = err2 / true2 if true2 > 0 else (0.0 if err2 == 0.0 else math.inf)
    if err2 == 0.0:
        psnr = math.inf
    else:
        psnr = 10.0 * math.log10(PEAK**2 / (err2 / (3 * d1 * d2)))
    return {"mse": mse, "rse": rse, "psnr": psnr}


def spikiness(theta: QMatrix) -> float:
    """sqrt(d1 d2) * max norm / Frobenius norm, in [1, sqrt(d1 d2)]."""
    f = fro_norm(theta)
    if f == 0.0:
        raise DomainError("spikiness is undefined for the zero matrix")
    return math.sqrt(theta.d1 * theta.d2) * max_norm(theta) / f


def schatten_q(theta: QMatrix, q: float, tol: float | None = None) -> float:
    """Sum of singular values to the power q, for q in [0, 1).

    q = 0 counts the singular values above the rank tolerance, i.e. the
    numerical rank.
    """
    if not 0.0 <= q < 1.0:
        raise DomainError(f"q must lie in [0, 1), got {q}")
    s = singular_values(theta)
    if s.size == 0 or s[0] == 0.0:
        return 0.0
    if q == 0.0:
        if tol is None:
            tol = 1e-10 * max(theta.d1, theta.d2)
        return float(np.sum(s > tol * s[0]))
    return float(np.sum(s**q))


def rescaled_n(n: float, d: float, r_or_rho: float, q: float) -> float:
    """Sample size rescaled by the theoretical sampling complexity.

    q = 0: n / (r d log 2d);  q = 1/2: n / (rho^{4/3} d^{1/3} log 2d).
    """
    if n <= 0 or d <= 0 or r_or_rho <= 0:
        raise DomainError("n, d and r/rho must be positive")
    if q == 0.0:
        return n / (r_or_rho * d * math.log(2 * d))
    if q == 0.5:
        return n / (r_or_rho ** (4.0 / 3.0) * d ** (1.0 / 3.0) * math.log(2 * d))
    raise DomainError(f"rescaling is defined for q in {{0, 1/2}}, got {q}")


def bound_curve(n_re: float, c: float, q: float = 0.0) -> float:
    """Theoretical error envelope c / n_re (q=0) or c / n_re^{3/4} (q=1/2)."""
    if n_re <= 0:
        raise DomainError(f"rescaled sample size must be positive, got {n_re}")
    if q == 0.0:
        return c / n_re
    if q == 0.5:
        return c / n_re**0.75
    raise DomainError(f"bound curve is defined for q in {{0, 1/2}}, got {q}")


def cone_bound(delta: QMatrix, rho: float, q: float,
               constant: float) -> tuple[float, float]:
    """(lhs, rhs) of the solver-error cone inequality.

    lhs is the nuclear norm of the error; rhs is
    constant * rho^{1/(2-q)} * fro^{(2-2q)/(2-q)}.  For exactly low-rank
    truth use q = 0 and rho = rank; clean solves use constant 5 and
    corrupted solves 5*C1/(C1-1).
    """
    s = singular_values(delta)
    lhs = float(s.sum())
    f = fro_norm(delta)
    rhs = constant * rho ** (1.0 / (2.0 - q)) * f ** ((2.0 - 2.0 * q) / (2.0 - q))
    return lhs, rhs
