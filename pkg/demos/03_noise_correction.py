"""Cross-channel weights against unbalanced and correlated noise.

Corrupts every observation of a small low-rank matrix with structured
Gaussian noise and sweeps the weight-mixing parameter gamma.  Interior
gamma beats both the unweighted loss (gamma = 0) and the fully
corrected weight (gamma = 1), matching the error-bound diagnostics
F1 and F2 printed alongside.
"""

import numpy as np

from quatcomp import (
    NoiseCovariance,
    SamplingScheme,
    SolverConfig,
    combine_weights,
    complete_noisy,
    derive_seed,
    error_metrics,
    gen_exact,
    lambda_rule,
    make_observations,
    wc_decorrelate,
    weight_factors,
    weighted_max_norm,
    ws_rebalance,
)

d, r, n = 24, 3, 420
cov = NoiseCovariance.diagonal(1.5, 0.5, 0.2)
ws = ws_rebalance([1.5, 0.5, 0.2])
wc = wc_decorrelate(cov)
theta = gen_exact(d, d, r, seed=7)

print(f"noise variances {np.diag(cov.sigma)}, rebalancing weight "
      f"diag {np.round(np.diag(ws.w), 3)}")
print(f"\n{'gamma':>6} {'mean MSE':>10} {'tr(WSW)':>9} {'F1':>8} {'F2':>8}")
for gamma in (0.0, 0.2, 0.4, 0.6, 0.8, 1.0):
    weight = combine_weights(gamma, 0.0, ws, wc)
    alpha = weighted_max_norm(theta, weight)
    lam = lambda_rule(weight, cov, n, d, d, 0.6)
    mses = []
    for trial in range(4):
        obs = make_observations(
            theta, SamplingScheme("without", derive_seed(55, trial)), n,
            noise=cov, noise_seed=derive_seed(56, trial))
        res = complete_noisy(obs, SolverConfig(
            alpha=alpha, lam=lam, weight=weight, tol_rel=1e-5,
            max_iter=1200))
        mses.append(error_metrics(res.theta_hat, theta)["mse"])
    f1, f2 = weight_factors(weight, cov)
    wsw = float(np.trace(weight.w @ cov.sigma @ weight.w))
    print(f"{gamma:6.1f} {np.mean(mses):10.4f} {wsw:9.3f} {f1:8.3f} "
          f"{f2:8.3f}")

print("\nThe raw weighted noise energy tr(WSW) falls with gamma, but the")
print("bound factors F1, F2 (which divide by powers of lambda_min) blow")
print("up as W drifts from the identity; the best gamma sits in between.")
