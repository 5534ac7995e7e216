"""Config-driven experiment harness with CSV emission.

A sweep config is one JSON document with sections {experiment, matrix,
sampling, noise, weights, solver, output, seeds}.  Each experiment
expands into parameter points; each point runs once per trial seed plus
one aggregated mean row.  Per-trial seeds are derived up front from the
master seed, so output is independent of worker scheduling, and rows
are emitted in canonical parameter order.
"""

from __future__ import annotations

import io
import json
import math
import time
from importlib import resources
from multiprocessing import Pool

import numpy as np

from .adjoint import rank as qrank
from .errors import DomainError
from .metrics import error_metrics, rescaled_n, schatten_q, spikiness
from .observation import SamplingScheme, derive_seed, make_observations
from .quat import (
    ChannelWeight,
    QMatrix,
    max_norm,
    weighted_max_norm,
)
from .solver import SolverConfig, complete_clean, complete_noisy
from .synth import gen_approx, gen_exact
from .weights import (
    NoiseCovariance,
    combine_weights,
    lambda_rule,
    wc_decorrelate,
    weight_factors,
    ws_rebalance,
)

CSV_COLUMNS = [
    "experiment", "d1", "d2", "r", "q", "rho", "n", "n_rescaled", "scheme",
    "gamma1", "gamma2", "c_lambda", "seed", "mse", "rse", "psnr",
    "spikiness", "iterations", "converged", "runtime_ms", "f1_diag",
    "f2_diag",
]

EXPERIMENTS = ("fig1", "fig2", "fig4l", "fig4r", "fig5", "fig6", "image")

_MEAN_FIELDS = ("mse", "rse", "psnr", "spikiness", "iterations",
                "runtime_ms", "f1_diag", "f2_diag")


class ConfigError(DomainError):
    """Invalid sweep configuration; message carries the field path."""


# ---------------------------------------------------------------------
# config validation
# ---------------------------------------------------------------------


def _expect(cfg, path, key, types, default=None, required=False):
    cur = cfg
    for part in path:
        cur = cur.get(part, {}) if isinstance(cur, dict) else {}
    dotted = ".".join(path + (key,))
    if not isinstance(cur, dict):
        raise ConfigError(f"{'.'.join(path)}: expected an object")
    if key not in cur:
        if required:
            raise ConfigError(f"{dotted}: required field missing")
        return default
    val = cur[key]
    if not isinstance(val, types):
        raise ConfigError(
            f"{dotted}: expected {types}, got {type(val).__name__}")
    return val


def _num_list(cfg, path, key, default):
    val = _expect(cfg, path, key, list, default=default)
    dotted = ".".join(path + (key,))
    if val is default:
        return default
    out = []
    for i, item in enumerate(val):
        if not isinstance(item, (int, float)) or isinstance(item, bool):
            raise ConfigError(f"{dotted}[{i}]: expected a number")
        out.append(float(item))
    return out


def validate_config(cfg: dict) -> dict:
    """Validate and normalize a sweep config; raises ConfigError."""
    if not isinstance(cfg, dict):
        raise ConfigError("config: expected a JSON object")
    exp = cfg.get("experiment")
    if exp not in EXPERIMENTS:
        raise ConfigError(
            f"experiment: expected one of {EXPERIMENTS}, got {exp!r}")
    out = {"experiment": exp}
    out["master_seed"] = int(_expect(cfg, ("seeds",), "master",
                                     (int,), default=20240731))
    out["trials"] = int(_expect(cfg, ("seeds",), "trials", (int,),
                                default=10))
    if out["trials"] < 1:
        raise ConfigError("seeds.trials: must be >= 1")
    out["tol_rel"] = float(_expect(cfg, ("solver",), "tol_rel",
                                   (int, float), default=1e-6))
    out["max_iter"] = int(_expect(cfg, ("solver",), "max_iter", (int,),
                                  default=1500))
    out["mu"] = float(_expect(cfg, ("solver",), "mu", (int, float),
                              default=1.0))
    out["timing"] = bool(_expect(cfg, ("output",), "timing", (bool,),
                                 default=False))
    out["normalize_max"] = _expect(cfg, ("matrix",), "normalize_max",
                                   (int, float), default=10.0)

    if exp in ("fig1", "fig2"):
        default_pairs = ([[50, 15], [70, 15], [70, 20], [90, 20]]
                         if exp == "fig1" else [[50, 15], [70, 15]])
        pairs = _expect(cfg, ("matrix",), "pairs", list,
                        default=default_pairs)
        for i, pair in enumerate(pairs):
            if (not isinstance(pair, list) or len(pair) != 2
                    or not all(isinstance(x, int) for x in pair)):
                raise ConfigError(f"matrix.pairs[{i}]: expected [d, r]")
        out["pairs"] = [tuple(p) for p in pairs]
        out["n_rescaled"] = _num_list(
            cfg, ("sampling",), "n_rescaled",
            [0.5, 0.75, 1.0, 1.25, 1.5, 2.0, 2.5, 3.0])
        out["scheme"] = _expect(cfg, ("sampling",), "scheme", str,
                                default="with")
    elif exp == "fig4l":
        out["d"] = int(_expect(cfg, ("matrix",), "d", (int,), default=50))
        out["r"] = int(_expect(cfg, ("matrix",), "r", (int,), default=20))
        out["spikiness_targets"] = _num_list(
            cfg, ("matrix",), "spikiness_targets", [1.5, 2.5, 4.0, 6.0])
        out["n_grid"] = [int(v) for v in _num_list(
            cfg, ("sampling",), "n_grid", [900, 1200, 1500, 1800, 2100])]
        out["scheme"] = _expect(cfg, ("sampling",), "scheme", str,
                                default="with")
    elif exp == "fig4r":
        out["d"] = int(_expect(cfg, ("matrix",), "d", (int,), default=30))
        out["r"] = int(_expect(cfg, ("matrix",), "r", (int,), default=5))
        out["noise_scales"] = _num_list(cfg, ("noise",), "scales",
                                        [0.25, 1.0, 2.25])
        out["n_grid"] = [int(v) for v in _num_list(
            cfg, ("sampling",), "n_grid", [500, 650, 800])]
        out["c_lambda"] = float(_expect(cfg, ("weights",), "c_lambda",
                                        (int, float), default=0.6))
    elif exp in ("fig5", "fig6"):
        out["d"] = int(_expect(cfg, ("matrix",), "d", (int,), default=30))
        out["r"] = int(_expect(cfg, ("matrix",), "r", (int,),
                               default=5 if exp == "fig5" else 2))
        default_cov = ([[1.5, 0, 0], [0, 0.5, 0], [0, 0, 0.2]]
                       if exp == "fig5" else
                       [[0.70, 0.50, 0.50], [0.50, 0.70, 0.66],
                        [0.50, 0.66, 0.70]])
        cov = _expect(cfg, ("noise",), "covariance", list,
                      default=default_cov)
        out["covariance"] = _parse_cov(cov)
        out["gamma_grid"] = _num_list(cfg, ("weights",), "gamma_grid",
                                      [0.0, 0.2, 0.4, 0.6, 0.8, 1.0])
        out["c_lambda_grid"] = _num_list(cfg, ("weights",), "c_lambda_grid",
                                         [0.4, 0.6, 0.8])
        out["mode"] = "ws" if exp == "fig5" else "wc"
        default_n = [900, 800, 700, 500] if exp == "fig5" else \
            [900, 700, 400, 200]
        out["n_grid"] = [int(v) for v in _num_list(cfg, ("sampling",),
                                                   "n_grid", default_n)]
    elif exp == "image":
        out["image"] = _expect(cfg, ("matrix",), "image", str,
                               default="bundled:lagoon")
        out["mask_frac"] = float(_expect(cfg, ("sampling",), "mask_frac",
                                         (int, float), default=0.85))
        cov = _expect(cfg, ("noise",), "covariance", list, default=None)
        out["covariance"] = _parse_cov(cov) if cov is not None else None
        out["gamma1_grid"] = _num_list(cfg, ("weights",), "gamma1_grid",
                                       [0.0])
        out["gamma2_grid"] = _num_list(cfg, ("weights",), "gamma2_grid",
                                       [0.0])
        out["c_lambda"] = float(_expect(cfg, ("weights",), "c_lambda",
                                        (int, float), default=0.6))
        out["alpha"] = float(_expect(cfg, ("solver",), "alpha",
                                     (int, float),
                                     default=255.0 * math.sqrt(3.0)))
    return out


def _parse_cov(rows) -> list:
    arr = np.array(rows, dtype=float)
    if arr.shape != (3, 3):
        raise ConfigError("noise.covariance: expected a 3x3 matrix")
    if not np.allclose(arr, arr.T, atol=1e-12):
        raise ConfigError("noise.covariance: must be symmetric")
    return arr.tolist()


def load_raw_config(source) -> dict:
    """Raw config dict from a file path, preset name, or dict."""
    if isinstance(source, dict):
        return source
    import os
    if os.path.exists(source):
        with open(source, "r", encoding="utf-8") as fh:
            try:
                return json.load(fh)
            except json.JSONDecodeError as exc:
                raise ConfigError(f"config: invalid JSON ({exc})") from exc
    preset = resources.files("quatcomp").joinpath(
        f"data/presets/{source}.json")
    if preset.is_file():
        return json.loads(preset.read_text(encoding="utf-8"))
    raise ConfigError(f"config: no such file or preset: {source!r}")


def load_config(source) -> dict:
    """Load and validate a config from a path, preset name, or dict."""
    return validate_config(load_raw_config(source))


# ---------------------------------------------------------------------
# experiment expansion
# ---------------------------------------------------------------------


def _base_row(cfg, **kw):
    row = {col: "" for col in CSV_COLUMNS}
    row["experiment"] = cfg["experiment"]
    row.update(kw)
    return row


def expand_points(cfg: dict) -> list[dict]:
    """Canonically ordered parameter points for a validated config."""
    exp = cfg["experiment"]
    points = []
    if exp in ("fig1", "fig2"):
        q = 0.0 if exp == "fig1" else 0.5
        for d, r in cfg["pairs"]:
            for n_re in cfg["n_rescaled"]:
                points.append({"d": d, "r": r, "q": q, "n_re": n_re,
                               "scheme": cfg["scheme"]})
    elif exp == "fig4l":
        for target in cfg["spikiness_targets"]:
            for n in cfg["n_grid"]:
                points.append({"d": cfg["d"], "r": cfg["r"],
                               "spikiness_target": target, "n": n,
                               "scheme": cfg["scheme"]})
    elif exp == "fig4r":
        for scale in cfg["noise_scales"]:
            for n in cfg["n_grid"]:
                for scheme in ("with", "without"):
                    points.append({"d": cfg["d"], "r": cfg["r"],
                                   "noise_scale": scale, "n": n,
                                   "scheme": scheme,
                                   "c_lambda": cfg["c_lambda"]})
    elif exp in ("fig5", "fig6"):
        for n in cfg["n_grid"]:
            for gamma in cfg["gamma_grid"]:
                for c_lambda in cfg["c_lambda_grid"]:
                    points.append({"d": cfg["d"], "r": cfg["r"], "n": n,
                                   "gamma": gamma, "c_lambda": c_lambda,
                                   "mode": cfg["mode"],
                                   "covariance": cfg["covariance"]})
    elif exp == "image":
        for g1 in cfg["gamma1_grid"]:
            for g2 in cfg["gamma2_grid"]:
                if g1 + g2 > 1.0 + 1e-12:
                    continue
                points.append({"image": cfg["image"],
                               "mask_frac": cfg["mask_frac"],
                               "covariance": cfg["covariance"],
                               "gamma1": g1, "gamma2": g2,
                               "c_lambda": cfg["c_lambda"],
                               "alpha": cfg["alpha"]})
    return points


# ---------------------------------------------------------------------
# per-task execution
# ---------------------------------------------------------------------


def _solver_kwargs(cfg):
    return dict(tol_rel=cfg["tol_rel"], max_iter=cfg["max_iter"],
                mu=cfg["mu"])


def _normalized_matrix(generator, d, r, seed, target):
    theta = generator(d, d, r, seed)
    if target:
        theta = theta * (float(target) / max_norm(theta))
    return theta


def _scale_row_to_spikiness(theta: QMatrix, target: float) -> QMatrix:
    """Scale the first row until the spikiness target is met (rank is
    preserved by row scaling)."""

    def with_factor(t):
        c1 = theta.c1.copy()
        c2 = theta.c2.copy()
        c3 = theta.c3.copy()
        c1[0] *= t
        c2[0] *= t
        c3[0] *= t
        return QMatrix.from_pure(c1, c2, c3)

    if spikiness(theta) >= target:
        return theta
    lo, hi = 1.0, 2.0
    while spikiness(with_factor(hi)) < target and hi < 1e6:
        lo, hi = hi, hi * 2.0
    for _ in range(60):
        mid = (lo + hi) / 2.0
        if spikiness(with_factor(mid)) < target:
            lo = mid
        else:
            hi = mid
    return with_factor(hi)


def run_task(cfg: dict, point: dict, point_idx: int, trial: int) -> dict:
    """Run one (parameter point, trial) and return a CSV row dict."""
    exp = cfg["experiment"]
    master = cfg["master_seed"]
    t0 = time.perf_counter()
    if exp in ("fig1", "fig2"):
        row = _run_fig12(cfg, point, point_idx, trial, master)
    elif exp == "fig4l":
        row = _run_fig4l(cfg, point, point_idx, trial, master)
    elif exp == "fig4r":
        row = _run_fig4r(cfg, point, point_idx, trial, master)
    elif exp in ("fig5", "fig6"):
        row = _run_fig56(cfg, point, point_idx, trial, master)
    else:
        row = _run_image(cfg, point, point_idx, trial, master)
    row["seed"] = trial
    row["runtime_ms"] = (round((time.perf_counter() - t0) * 1000.0)
                         if cfg["timing"] else 0)
    return row


def _run_fig12(cfg, point, point_idx, trial, master):
    d, r, q = point["d"], point["r"], point["q"]
    gen = gen_exact if q == 0.0 else gen_approx
    # one matrix per (d, r) config; trials vary the sampling pattern
    theta = _normalized_matrix(gen, d, r, derive_seed(master, 3000, d, r),
                               cfg["normalize_max"])
    rho = float(r) if q == 0.0 else schatten_q(theta, 0.5)
    n_re = point["n_re"]
    if q == 0.0:
        n = round(n_re * r * d * math.log(2 * d))
    else:
        n = round(n_re * rho ** (4 / 3) * d ** (1 / 3) * math.log(2 * d))
    scheme = SamplingScheme(point["scheme"],
                            derive_seed(master, point_idx, trial, 1))
    obs = make_observations(theta, scheme, n)
    alpha = max_norm(theta)
    res = complete_clean(obs, SolverConfig(alpha=alpha,
                                           **_solver_kwargs(cfg)))
    met = error_metrics(res.theta_hat, theta)
    return _base_row(cfg, d1=d, d2=d, r=r, q=q, rho=rho, n=n,
                     n_rescaled=rescaled_n(n, d, rho if q else r, q),
                     scheme=point["scheme"], mse=met["mse"], rse=met["rse"],
                     psnr=met["psnr"],
                     spikiness=spikiness(theta),
                     iterations=res.iterations, converged=res.converged)


def _run_fig4l(cfg, point, point_idx, trial, master):
    d, r = point["d"], point["r"]
    theta = _normalized_matrix(gen_exact, d, r,
                               derive_seed(master, 3500, d, r),
                               cfg["normalize_max"])
    theta = _scale_row_to_spikiness(theta, point["spikiness_target"])
    n = point["n"]
    scheme = SamplingScheme(point["scheme"],
                            derive_seed(master, point_idx, trial, 1))
    obs = make_observations(theta, scheme, n)
    res = complete_clean(obs, SolverConfig(alpha=max_norm(theta),
                                           **_solver_kwargs(cfg)))
    met = error_metrics(res.theta_hat, theta)
    return _base_row(cfg, d1=d, d2=d, r=r, q=0.0, rho=r, n=n,
                     scheme=point["scheme"], mse=met["mse"],
                     rse=met["rse"], psnr=met["psnr"],
                     spikiness=spikiness(theta),
                     iterations=res.iterations, converged=res.converged)


def _run_fig4r(cfg, point, point_idx, trial, master):
    d, r = point["d"], point["r"]
    theta = _normalized_matrix(gen_exact, d, r, derive_seed(master, 4000),
                               cfg["normalize_max"])
    cov = NoiseCovariance.isotropic(point["noise_scale"])
    weight = None
    n = point["n"]
    scheme = SamplingScheme(point["scheme"],
                            derive_seed(master, point_idx, trial, 1))
    obs = make_observations(theta, scheme, n, noise=cov,
                            noise_seed=derive_seed(master, d, r,
                                                   int(point["noise_scale"]
                                                       * 1000),
                                                   point["n"], trial, 2))
    lam = lambda_rule(ChannelWeight.identity(), cov, n, d, d,
                      point["c_lambda"])
    res = complete_noisy(obs, SolverConfig(alpha=max_norm(theta), lam=lam,
                                           weight=weight,
                                           **_solver_kwargs(cfg)))
    met = error_metrics(res.theta_hat, theta)
    f1, f2 = weight_factors(ChannelWeight.identity(), cov)
    return _base_row(cfg, d1=d, d2=d, r=r, q=0.0, rho=r, n=n,
                     scheme=point["scheme"], c_lambda=point["c_lambda"],
                     mse=met["mse"], rse=met["rse"], psnr=met["psnr"],
                     spikiness=spikiness(theta), iterations=res.iterations,
                     converged=res.converged, f1_diag=f1, f2_diag=f2)


def _build_weight(mode, gamma, cov: NoiseCovariance):
    if mode == "ws":
        ws = ws_rebalance(np.diag(cov.sigma))
        return combine_weights(gamma, 0.0, ws, ws)
    wc = wc_decorrelate(cov)
    return combine_weights(0.0, gamma, wc, wc)


def _run_fig56(cfg, point, point_idx, trial, master):
    d, r = point["d"], point["r"]
    theta = _normalized_matrix(gen_exact, d, r, derive_seed(master, 5000),
                               None)
    cov = NoiseCovariance(np.array(point["covariance"]))
    weight = _build_weight(point["mode"], point["gamma"], cov)
    n = point["n"]
    # sampling/noise draws depend only on (n, trial) so every
    # (gamma, c_lambda) cell sees identical observations
    scheme = SamplingScheme("without", derive_seed(master, n, trial, 1))
    obs = make_observations(theta, scheme, n, noise=cov,
                            noise_seed=derive_seed(master, n, trial, 2))
    alpha = weighted_max_norm(theta, weight)
    lam = lambda_rule(weight, cov, n, d, d, point["c_lambda"])
    res = complete_noisy(obs, SolverConfig(alpha=alpha, lam=lam,
                                           weight=weight,
                                           **_solver_kwargs(cfg)))
    met = error_metrics(res.theta_hat, theta)
    f1, f2 = weight_factors(weight, cov)
    gamma1 = point["gamma"] if point["mode"] == "ws" else 0.0
    gamma2 = point["gamma"] if point["mode"] == "wc" else 0.0
    return _base_row(cfg, d1=d, d2=d, r=r, q=0.0, rho=r, n=n,
                     scheme="without", gamma1=gamma1, gamma2=gamma2,
                     c_lambda=point["c_lambda"], mse=met["mse"],
                     rse=met["rse"], psnr=met["psnr"],
                     spikiness=spikiness(theta), iterations=res.iterations,
                     converged=res.converged, f1_diag=f1, f2_diag=f2)


def _load_bundled_or_path(name: str):
    from .imageio import read_image
    if name.startswith("bundled:"):
        ref = resources.files("quatcomp").joinpath(
            f"data/images/{name[len('bundled:'):]}.ppm")
        with resources.as_file(ref) as path:
            return read_image(path)
    return read_image(name)


def _run_image(cfg, point, point_idx, trial, master):
    from .imageio import image_to_qmatrix
    pixels = _load_bundled_or_path(point["image"])
    theta = image_to_qmatrix(pixels)
    d1, d2 = theta.shape
    n = round(point["mask_frac"] * d1 * d2)
    scheme = SamplingScheme("without", derive_seed(master, trial, 1))
    alpha = point["alpha"]
    if point["covariance"] is None:
        obs = make_observations(theta, scheme, n)
        res = complete_clean(obs, SolverConfig(alpha=alpha,
                                               **_solver_kwargs(cfg)))
        gamma1 = gamma2 = 0.0
        f1 = f2 = ""
        c_lambda = ""
    else:
        cov = NoiseCovariance(np.array(point["covariance"]))
        obs = make_observations(theta, scheme, n, noise=cov,
                                noise_seed=derive_seed(master, trial, 2))
        ws = ws_rebalance(np.diag(cov.sigma))
        wc = wc_decorrelate(cov)
        gamma1, gamma2 = point["gamma1"], point["gamma2"]
        weight = combine_weights(gamma1, gamma2, ws, wc)
        c_lambda = point["c_lambda"]
        lam = lambda_rule(weight, cov, n, d1, d2, c_lambda)
        res = complete_noisy(obs, SolverConfig(alpha=alpha, lam=lam,
                                               weight=weight,
                                               **_solver_kwargs(cfg)))
        f1, f2 = weight_factors(weight, cov)
    met = error_metrics(res.theta_hat, theta)
    return _base_row(cfg, d1=d1, d2=d2, n=n, scheme="without",
                     gamma1=gamma1, gamma2=gamma2, c_lambda=c_lambda,
                     mse=met["mse"], rse=met["rse"], psnr=met["psnr"],
                     spikiness=spikiness(theta), iterations=res.iterations,
                     converged=res.converged, f1_diag=f1, f2_diag=f2)


# ---------------------------------------------------------------------
# CSV assembly
# ---------------------------------------------------------------------


def _fmt_cell(val) -> str:
    if isinstance(val, bool):
        return "true" if val else "false"
    if isinstance(val, (np.floating, float)):
        return repr(float(val))
    if isinstance(val, (np.integer, int)):
        return str(int(val))
    return str(val)


def _mean_row(rows: list[dict]) -> dict:
    out = dict(rows[0])
    out["seed"] = "mean"
    for field in _MEAN_FIELDS:
        vals = [r[field] for r in rows if r[field] != ""]
        if not vals:
            continue
        out[field] = float(np.mean([float(v) for v in vals]))
    out["converged"] = all(r["converged"] is True or r["converged"] == "true"
                           for r in rows)
    return out


def _task_star(args):
    return run_task(*args)


def run_sweep(config, out=None, jobs: int = 1) -> str:
    """Run a sweep and return the CSV text (also written to `out`)."""
    cfg = load_config(config)
    points = expand_points(cfg)
    tasks = [(cfg, point, idx, trial)
             for idx, point in enumerate(points)
             for trial in range(cfg["trials"])]
    if jobs > 1 and tasks:
        with Pool(processes=jobs) as pool:
            results = pool.map(_task_star, tasks)
    else:
        results = [run_task(*task) for task in tasks]
    by_point: dict[int, list[dict]] = {}
    for (cfg_, point, idx, trial), row in zip(tasks, results):
        by_point.setdefault(idx, []).append((trial, row))
    buf = io.StringIO()
    buf.write(",".join(CSV_COLUMNS) + "\n")
    for idx in range(len(points)):
        rows = [row for _, row in sorted(by_point.get(idx, []))]
        for row in rows:
            buf.write(",".join(_fmt_cell(row[c]) for c in CSV_COLUMNS) + "\n")
        if rows:
            mean = _mean_row(rows)
            buf.write(",".join(_fmt_cell(mean[c]) for c in CSV_COLUMNS)
                      + "\n")
    text = buf.getvalue()
    if out is not None:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    return text


def all_points_failed(csv_text: str) -> bool:
    """True when no per-trial row converged (CLI exit code 4)."""
    lines = csv_text.strip().split("\n")[1:]
    conv_col = CSV_COLUMNS.index("converged")
    seed_col = CSV_COLUMNS.index("seed")
    trial_rows = [ln.split(",") for ln in lines if ln]
    trial_rows = [r for r in trial_rows if r[seed_col] != "mean"]
    if not trial_rows:
        return False
    return all(r[conv_col] == "false" for r in trial_rows)
