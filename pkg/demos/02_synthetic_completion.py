"""Clean completion of synthetic nonnegative pure quaternion matrices.

Generates exactly low-rank matrices, observes a fraction of the entries
uniformly, reconstructs by nuclear-norm minimization, and prints an
MSE-versus-rescaled-sample-size table together with the c/n_re envelope.
"""

import math

import numpy as np

from quatcomp import (
    SamplingScheme,
    SolverConfig,
    bound_curve,
    complete_clean,
    derive_seed,
    error_metrics,
    gen_exact,
    make_observations,
    max_norm,
    rank,
    rescaled_n,
    spikiness,
)

d, r = 40, 8
master = 123
theta = gen_exact(d, d, r, seed=master)
theta = theta * (10.0 / max_norm(theta))
print(f"matrix: {d}x{d}, rank {rank(theta)}, "
      f"spikiness {spikiness(theta):.3f}, max {max_norm(theta):.1f}")

print(f"\n{'n_re':>5} {'n':>6} {'mean MSE':>12} {'0.17/n_re':>10}")
for n_re in (0.5, 0.75, 1.0, 1.5, 2.0):
    n = round(n_re * r * d * math.log(2 * d))
    mses = []
    for trial in range(5):
        obs = make_observations(
            theta, SamplingScheme("with", derive_seed(master, trial)), n)
        res = complete_clean(obs, SolverConfig(alpha=max_norm(theta),
                                               tol_rel=1e-6, max_iter=1200))
        mses.append(error_metrics(res.theta_hat, theta)["mse"])
    n_re_actual = rescaled_n(n, d, r, 0.0)
    print(f"{n_re_actual:5.2f} {n:6d} {np.mean(mses):12.4e} "
          f"{bound_curve(n_re_actual, 0.17):10.4f}")

print("\nMSE collapses onto the envelope scale and then drops to the")
print("solver floor once the sample size crosses the recovery threshold.")
