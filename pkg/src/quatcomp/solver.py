"""ADMM solvers for nuclear-norm completion of pixel quaternion matrices.

Both programs split into two blocks: the data/constraint block Theta
(pure, componentwise nonnegative, (weighted) max norm at most alpha,
plus exact interpolation or the weighted quadratic loss) and the
nuclear-norm block Z, coupled by Theta = Z with scaled dual U.

The Theta update is separable per entry.  With observations it is a
3-variable strictly convex QP over {q >= 0, q^T W q <= alpha^2}, solved
exactly by enumerating the 8 free-variable patterns x {norm constraint
active, inactive}; without observations it reduces to the Euclidean
projection onto that set.  Everything is vectorized across entries in
the eigenbasis of W, where (c + 2 nu) W + mu I is diagonal.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .adjoint import to_adjoint, _j_conj
from .errors import (
    ConvergenceWarning,
    DomainError,
    InfeasibleError,
    PurityError,
)
from .observation import ObservationSet
from .quat import ChannelWeight, QMatrix, Quaternion

_EPS = 1e-300
_BISECT_STEPS = 100
_PATTERNS = [(0,), (1,), (2,), (0, 1), (0, 2), (1, 2), (0, 1, 2)]


@dataclass
class SolverConfig:
    """Knobs shared by both completion programs.

    alpha bounds the (weighted) entrywise magnitude; lam and weight only
    matter for the corrupted program.  mu is the ADMM penalty, adapted
    by residual balancing unless mu_adapt is off.
    """

    alpha: float
    lam: float = 0.0
    weight: ChannelWeight | None = None
    mu: float = 1.0
    mu_adapt: bool = True
    mu_factor: float = 2.0
    mu_ratio: float = 10.0
    tol_rel: float = 1e-7
    max_iter: int = 1000

    def __post_init__(self):
        if self.alpha <= 0:
            raise DomainError(f"alpha must be positive, got {self.alpha}")
        if self.mu <= 0:
            raise DomainError(f"mu must be positive, got {self.mu}")
        if self.tol_rel <= 0:
            raise DomainError(f"tol_rel must be positive, got {self.tol_rel}")
        if self.lam < 0:
            raise DomainError(f"lam must be nonnegative, got {self.lam}")
        if self.max_iter < 1:
            raise DomainError(f"max_iter must be >= 1, got {self.max_iter}")


@dataclass
class CompletionResult:
    """Reconstruction plus convergence diagnostics."""

    theta_hat: QMatrix
    iterations: int
    primal_residuals: list[float] = field(repr=False)
    dual_residuals: list[float] = field(repr=False)
    objective_history: list[float] = field(repr=False)
    converged: bool
    binding_fraction: float = 0.0


# ---------------------------------------------------------------------
# feasible-set projections
# ---------------------------------------------------------------------


def _weight_eig(weight: ChannelWeight | None):
    if weight is None:
        return np.ones(3), np.eye(3)
    return np.asarray(weight.eigvals), np.asarray(weight.eigvecs)


def _isotropic_scale(weight: ChannelWeight | None) -> float | None:
    """c such that W = c*I, or None if W is not isotropic."""
    if weight is None:
        return 1.0
    w = weight.w
    c = w[0, 0]
    if np.all(w == c * np.eye(3)):
        return float(c)
    return None


def _project_ellipsoid_batch(v: np.ndarray, evals: np.ndarray,
                             evecs: np.ndarray, alpha: float) -> np.ndarray:
    """Euclidean projection of rows of v onto {x : x^T W x <= alpha^2}."""
    y = v @ evecs
    g = (evals * y**2).sum(axis=1)
    out = v.copy()
    outside = g > alpha**2
    if not np.any(outside):
        return out
    yo = y[outside]
    # x(nu) in the eigenbasis is y / (1 + nu*evals); the constraint value
    # is strictly decreasing in nu, so bisect on [0, nu_hi]
    nu_hi = np.sqrt((yo**2 / evals).sum(axis=1)) / alpha + 1.0
    lo = np.zeros_like(nu_hi)
    hi = nu_hi
    for _ in range(_BISECT_STEPS):
        mid = (lo + hi) / 2.0
        val = (evals * (yo / (1.0 + np.outer(mid, evals)))**2).sum(axis=1)
        too_big = val > alpha**2
        lo = np.where(too_big, mid, lo)
        hi = np.where(too_big, hi, mid)
    nu = (lo + hi) / 2.0
    xo = yo / (1.0 + np.outer(nu, evals))
    out[outside] = xo @ evecs.T
    return out


def _exactify_feasible(x: np.ndarray, weight: ChannelWeight | None,
                       alpha: float) -> np.ndarray:
    """Clamp tiny violations so the output is feasible exactly."""
    x = np.maximum(x, 0.0)
    if weight is None:
        g = (x**2).sum(axis=1)
    else:
        g = np.einsum("ni,ij,nj->n", x, weight.w, x)
    over = g > alpha**2
    if np.any(over):
        x[over] *= (alpha / np.sqrt(g[over]))[:, None]
    return x


def _project_feasible_batch(v: np.ndarray, alpha: float,
                            weight: ChannelWeight | None = None,
                            max_sweeps: int = 200,
                            tol: float = 1e-12) -> np.ndarray:
    """Projection of rows of v onto {x >= 0, x^T W x <= alpha^2}.

    For isotropic W the projection is clamp-to-nonnegative followed by
    radial scaling (exact for a cone intersected with a centered ball).
    Otherwise Dykstra's alternating projections between the orthant and
    the ellipsoid converge to the exact projection.
    """
    v = np.asarray(v, dtype=np.float64)
    c = _isotropic_scale(weight)
    if c is not None:
        x = np.maximum(v, 0.0)
        radius = alpha / math.sqrt(c)
        nrm = np.sqrt((x**2).sum(axis=1))
        over = nrm > radius
        if np.any(over):
            x[over] *= (radius / nrm[over])[:, None]
        return x
    evals, evecs = _weight_eig(weight)
    scale = max(1.0, float(np.abs(v).max(initial=0.0)))
    x = v.copy()
    p = np.zeros_like(v)
    q = np.zeros_like(v)
    for _ in range(max_sweeps):
        y = np.maximum(x + p, 0.0)
        p = x + p - y
        z = _project_ellipsoid_batch(y + q, evals, evecs, alpha)
        q = y + q - z
        move = float(np.abs(z - x).max(initial=0.0))
        x = z
        if move < tol * scale:
            break
    else:
        warnings.warn("Dykstra projection hit the sweep limit; returning "
                      "the best iterate", ConvergenceWarning)
    return _exactify_feasible(x, weight, alpha)


def project_feasible(v: Quaternion, alpha: float,
                     weight: ChannelWeight | None = None) -> Quaternion:
    """Euclidean projection of a pure quaternion onto the feasible set
    {q pure, components >= 0, |q|_w <= alpha}."""
    if not v.is_pure:
        raise PurityError("projection is defined for pure quaternions")
    x = _project_feasible_batch(v.vec()[None, :], alpha, weight)[0]
    return Quaternion.pure(*x)


# ---------------------------------------------------------------------
# per-entry constrained quadratic solve
# ---------------------------------------------------------------------


def _pattern_eigs(weight: ChannelWeight | None):
    """Eigendecomposition of each principal submatrix W_FF."""
    w = np.eye(3) if weight is None else weight.w
    eigs = {}
    for pat in _PATTERNS:
        sub = w[np.ix_(pat, pat)]
        vals, vecs = np.linalg.eigh(sub)
        eigs[pat] = (vals, vecs)
    return eigs


def _entry_qp_batch(b: np.ndarray, cshare: np.ndarray, mu: float,
                    alpha: float, weight: ChannelWeight | None,
                    pattern_eigs=None) -> np.ndarray:
    """Exact minimizers of 0.5 q^T (c W + mu I) q - q^T b over the
    feasible set, one row per entry.

    Enumerates free-variable patterns; the norm-active branch solves the
    multiplier by bisection in the eigenbasis of W_FF.  The best feasible
    candidate per entry is the unique KKT point by strict convexity.
    """
    m = b.shape[0]
    if m == 0:
        return np.zeros((0, 3))
    if pattern_eigs is None:
        pattern_eigs = _pattern_eigs(weight)
    w = np.eye(3) if weight is None else weight.w
    alpha2 = alpha**2
    best_q = np.zeros((m, 3))
    best_obj = np.zeros(m)  # objective of the q = 0 candidate
    feas_tol = 1e-9

    def consider(q: np.ndarray, feasible: np.ndarray):
        nonlocal best_q, best_obj
        wq = q @ w
        obj = 0.5 * (cshare * np.einsum("ni,ni->n", q, wq)
                     + mu * (q**2).sum(axis=1)) - np.einsum("ni,ni->n", q, b)
        better = feasible & (obj < best_obj)
        if np.any(better):
            best_q[better] = q[better]
            best_obj[better] = obj[better]

    for pat in _PATTERNS:
        vals, vecs = pattern_eigs[pat]
        bf = b[:, pat]
        y = bf @ vecs
        denom = np.outer(cshare, vals) + mu
        # norm constraint inactive: plain diagonal solve
        qf = (y / denom) @ vecs.T
        q = np.zeros((m, 3))
        q[:, pat] = qf
        gval = np.einsum("ni,ij,nj->n", q, w, q)
        scale_row = 1.0 + np.abs(qf).max(axis=1)
        feasible = ((qf.min(axis=1) >= -feas_tol * scale_row)
                    & (gval <= alpha2 * (1.0 + feas_tol)))
        consider(q, feasible)

        # norm constraint active: ((c + 2 nu) W_FF + mu I) q_F = b_F with
        # nu >= 0 chosen so the constraint holds with equality
        phi0 = (vals * (y / denom)**2).sum(axis=1)
        need = phi0 > alpha2
        if np.any(need):
            yn = y[need]
            cn = cshare[need]
            nu_hi = 0.5 * np.sqrt((yn**2 / vals).sum(axis=1)) / alpha + 1.0
            lo = np.zeros_like(nu_hi)
            hi = nu_hi
            for _ in range(_BISECT_STEPS):
                mid = (lo + hi) / 2.0
                dd = np.outer(cn + 2.0 * mid, vals) + mu
                val = (vals * (yn / dd)**2).sum(axis=1)
                too_big = val > alpha2
                lo = np.where(too_big, mid, lo)
                hi = np.where(too_big, hi, mid)
            nu = (lo + hi) / 2.0
            dd = np.outer(cn + 2.0 * nu, vals) + mu
            qfn = (yn / dd) @ vecs.T
            qa = np.zeros((m, 3))
            qa[np.ix_(need, pat)] = qfn
            scale_row = 1.0 + np.abs(qfn).max(axis=1)
            ok = np.zeros(m, dtype=bool)
            ok[need] = qfn.min(axis=1) >= -feas_tol * scale_row
            consider(qa, ok)

    return _exactify_feasible(best_q, weight, alpha)


def entry_qp(obs_values, count_share: float, weight: ChannelWeight | None,
             mu: float, v: Quaternion, alpha: float) -> Quaternion:
    """Exact minimizer of the per-entry objective

        (1/2n) sum_k |Y_k - q|_w^2 + (mu/2) |q - v|^2

    over {q pure, components >= 0, |q|_w <= alpha}, where count_share is
    n_ij/n for this entry and obs_values are its n_ij observed values.
    """
    if not v.is_pure:
        raise PurityError("anchor point must be a pure quaternion")
    obs = list(obs_values)
    if any(not y.is_pure for y in obs):
        raise PurityError("observed values must be pure quaternions")
    if count_share < 0:
        raise DomainError(f"count share must be nonnegative, got {count_share}")
    if not obs or count_share == 0.0:
        return project_feasible(v, alpha, weight)
    w = np.eye(3) if weight is None else weight.w
    mean = np.mean([y.vec() for y in obs], axis=0)
    b = count_share * (w @ mean) + mu * v.vec()
    q = _entry_qp_batch(b[None, :], np.array([count_share]), mu, alpha, weight)[0]
    return Quaternion.pure(*q)


def entry_qp_kkt_residual(obs_values, count_share: float,
                          weight: ChannelWeight | None, mu: float,
                          v: Quaternion, alpha: float,
                          q: Quaternion) -> float:
    """Scaled KKT residual of q for the per-entry QP (0 at the optimum).

    Reconstructs the norm-constraint multiplier from the stationarity
    condition on free components and measures the worst violation across
    stationarity, primal feasibility, dual feasibility and
    complementary slackness.
    """
    w = np.eye(3) if weight is None else weight.w
    obs = list(obs_values)
    mean = (np.mean([y.vec() for y in obs], axis=0) if obs else np.zeros(3))
    b = count_share * (w @ mean) + mu * v.vec()
    x = q.vec()
    scale = max(1.0, float(np.abs(b).max()))
    grad = count_share * (w @ x) + mu * x - b
    wx = w @ x
    gval = float(x @ wx)
    active_norm = gval >= alpha**2 * (1.0 - 1e-8)
    free = x > 1e-10 * max(1.0, float(np.abs(x).max()))
    nu = 0.0
    if active_norm and np.any(free):
        gf = grad[free]
        wf = wx[free]
        denom = 2.0 * float(wf @ wf)
        if denom > _EPS:
            nu = max(0.0, -float(gf @ wf) / denom)
    s = grad + 2.0 * nu * wx
    res = 0.0
    if np.any(free):
        res = max(res, float(np.abs(s[free]).max()))
    if np.any(~free):
        res = max(res, float(np.maximum(-s[~free], 0.0).max()))
    res = max(res, float(np.maximum(-x, 0.0).max()) * scale)
    res = max(res, max(0.0, gval - alpha**2 * (1.0 + 1e-12)) / max(1.0, alpha))
    if not active_norm:
        res = max(res, nu * abs(gval - alpha**2) / max(1.0, alpha**2))
    return res / scale


# ---------------------------------------------------------------------
# observation bookkeeping
# ---------------------------------------------------------------------


def _aggregate(obs: ObservationSet):
    """Unique observed positions with per-position counts and value sums."""
    flat = obs.rows * obs.d2 + obs.cols
    uniq, inv, counts = np.unique(flat, return_inverse=True,
                                  return_counts=True)
    sums = np.zeros((len(uniq), 3))
    np.add.at(sums, inv, obs.values)
    return uniq, counts, sums


def _channels(m: QMatrix) -> np.ndarray:
    return np.stack([m.c1, m.c2, m.c3], axis=-1)


def _loss_w(obs: ObservationSet, theta3: np.ndarray,
            weight: ChannelWeight | None) -> float:
    if obs.n == 0:
        return 0.0
    res = obs.values - theta3[obs.rows, obs.cols]
    if weight is None:
        quad = (res**2).sum()
    else:
        quad = np.einsum("ni,ij,nj->", res, weight.w, res)
    return 0.5 * float(quad) / obs.n


def _binding_fraction(theta3: np.ndarray, weight: ChannelWeight | None,
                      alpha: float) -> float:
    if weight is None:
        g = np.sqrt((theta3**2).sum(axis=-1))
    else:
        g = np.sqrt(np.einsum("mni,ij,mnj->mn", theta3, weight.w, theta3))
    return float(np.mean(g >= alpha * (1.0 - 1e-6)))


def _svt_nuclear(z4: np.ndarray, tau: float) -> tuple[np.ndarray, float]:
    """SVT of the 4-plane array z4, returning (4-plane result, nuclear norm)."""
    a1 = z4[..., 0] + 1j * z4[..., 1]
    a2 = z4[..., 2] + 1j * z4[..., 3]
    m = np.block([[a1, a2], [-np.conj(a2), np.conj(a1)]])
    p, s, vh = np.linalg.svd(m, full_matrices=False)
    shrunk = np.maximum(s - tau, 0.0)
    nz = shrunk > 0
    d = (p[:, nz] * shrunk[nz]) @ vh[nz, :]
    d = (d + _j_conj(d)) / 2.0
    d1 = z4.shape[0]
    d2 = z4.shape[1]
    b1 = d[:d1, :d2]
    b2 = d[:d1, d2:]
    out = np.stack([b1.real, b1.imag, b2.real, b2.imag], axis=-1)
    return out, float(shrunk.sum()) / 2.0


def _zero_result(d1: int, d2: int) -> CompletionResult:
    return CompletionResult(theta_hat=QMatrix.zeros(d1, d2), iterations=0,
                            primal_residuals=[], dual_residuals=[],
                            objective_history=[], converged=True)


# ---------------------------------------------------------------------
# the two ADMM drivers
# ---------------------------------------------------------------------


def _admm(theta_update, tau_of_mu, obj_value, obs, config: SolverConfig,
          weight):
    """Shared two-block ADMM loop.

    theta_update(v3, mu) maps the 3-channel target (Z - U imaginary
    part) to the next feasible Theta; Z collects the shrinkage step; U
    is the scaled dual.  Z and U are full quaternion 4-plane arrays
    since shrinkage does not preserve purity.
    """
    d1, d2 = obs.d1, obs.d2
    mu = config.mu
    theta3 = theta_update(np.zeros((d1, d2, 3)), mu)
    z4 = np.zeros((d1, d2, 4))
    z4[..., 1:] = theta3
    u4 = np.zeros((d1, d2, 4))
    primal_hist: list[float] = []
    dual_hist: list[float] = []
    obj_hist: list[float] = []
    converged = False
    it = 0
    for it in range(1, config.max_iter + 1):
        v3 = z4[..., 1:] - u4[..., 1:]
        theta3 = theta_update(v3, mu)
        t4 = np.concatenate([np.zeros((d1, d2, 1)), theta3], axis=-1)
        z_prev = z4
        z4, znuc = _svt_nuclear(t4 + u4, tau_of_mu(mu))
        u4 = u4 + t4 - z4
        r_norm = float(np.linalg.norm((t4 - z4).ravel()))
        s_norm = mu * float(np.linalg.norm((z4 - z_prev).ravel()))
        scale = max(float(np.linalg.norm(t4.ravel())),
                    float(np.linalg.norm(z4.ravel())), _EPS)
        primal_hist.append(r_norm / scale)
        dual_hist.append(s_norm / scale)
        obj_hist.append(obj_value(theta3, znuc))
        if max(primal_hist[-1], dual_hist[-1]) <= config.tol_rel:
            converged = True
            break
        if config.mu_adapt:
            if r_norm > config.mu_ratio * s_norm and mu < 1e6:
                mu *= config.mu_factor
                u4 /= config.mu_factor
            elif s_norm > config.mu_ratio * r_norm and mu > 1e-6:
                mu /= config.mu_factor
                u4 *= config.mu_factor
    theta_hat = QMatrix.from_pure(theta3[..., 0], theta3[..., 1],
                                  theta3[..., 2])
    return CompletionResult(
        theta_hat=theta_hat, iterations=it,
        primal_residuals=primal_hist, dual_residuals=dual_hist,
        objective_history=obj_hist, converged=converged,
        binding_fraction=_binding_fraction(theta3, weight, config.alpha))


def complete_clean(obs: ObservationSet, config: SolverConfig) -> CompletionResult:
    """Nuclear-norm minimization with exact interpolation of clean
    observations, over pixel matrices with max norm at most alpha."""
    d1, d2 = obs.d1, obs.d2
    if obs.n == 0:
        warnings.warn("no observations: the interpolation program is "
                      "ill-posed; returning the zero matrix",
                      ConvergenceWarning)
        return _zero_result(d1, d2)
    if obs.values.min(initial=0.0) < 0.0:
        raise InfeasibleError("clean observations must be componentwise "
                              "nonnegative")
    if obs.max_abs() > config.alpha * (1.0 + 1e-12):
        raise InfeasibleError(
            f"observed magnitude {obs.max_abs():.6g} exceeds the bound "
            f"alpha = {config.alpha:.6g}")
    uniq, counts, sums = _aggregate(obs)
    yvals = sums / counts[:, None]
    spread = np.abs(obs.values - yvals[
        np.searchsorted(uniq, obs.rows * d2 + obs.cols)]).max(initial=0.0)
    if spread > 1e-9 * max(1.0, obs.max_abs()):
        raise InfeasibleError("conflicting duplicate observations in the "
                              "clean model")
    urows, ucols = uniq // d2, uniq % d2
    alpha = config.alpha

    if len(uniq) == d1 * d2:
        # every entry pinned; the constraints determine the solution
        theta3 = np.zeros((d1, d2, 3))
        theta3[urows, ucols] = yvals
        theta_hat = QMatrix.from_pure(*[theta3[..., i] for i in range(3)])
        return CompletionResult(theta_hat=theta_hat, iterations=1,
                                primal_residuals=[0.0], dual_residuals=[0.0],
                                objective_history=[], converged=True)

    mask = np.zeros((d1, d2), dtype=bool)
    mask[urows, ucols] = True
    free = ~mask

    def theta_update(v3: np.ndarray, mu: float) -> np.ndarray:
        out = np.empty_like(v3)
        out[urows, ucols] = yvals
        out[free] = _project_feasible_batch(v3[free], alpha, None)
        return out

    return _admm(theta_update, lambda mu: 1.0 / mu,
                 lambda theta3, znuc: znuc, obs, config, None)


def complete_noisy(obs: ObservationSet, config: SolverConfig) -> CompletionResult:
    """Weighted quadratic loss plus lam * nuclear norm over pixel
    matrices with weighted max norm at most alpha."""
    d1, d2 = obs.d1, obs.d2
    if config.lam <= 0:
        raise DomainError("the corrupted program needs lam > 0")
    weight = config.weight
    if obs.n == 0:
        return _zero_result(d1, d2)
    uniq, counts, sums = _aggregate(obs)
    urows, ucols = uniq // d2, uniq % d2
    mask = np.zeros((d1, d2), dtype=bool)
    mask[urows, ucols] = True
    free = ~mask
    n = obs.n
    alpha = config.alpha
    w = np.eye(3) if weight is None else weight.w
    cshare = counts / n
    wsum = (sums @ w.T) / n
    pattern_eigs = _pattern_eigs(weight)
    lam = config.lam

    def theta_update(v3: np.ndarray, mu: float) -> np.ndarray:
        out = np.empty_like(v3)
        b = wsum + mu * v3[urows, ucols]
        out[urows, ucols] = _entry_qp_batch(b, cshare, mu, alpha,
                                            weight, pattern_eigs)
        if np.any(free):
            out[free] = _project_feasible_batch(v3[free], alpha, weight)
        return out

    return _admm(theta_update, lambda mu: lam / mu,
                 lambda theta3, znuc: _loss_w(obs, theta3, weight)
                 + lam * znuc, obs, config, weight)
