"""Command line front door: experiment sweeps and image inpainting.

    quatcomp sweep --config <file-or-preset> [--out csv] [--jobs N]
    quatcomp inpaint --image in.ppm (--mask m.pgm | --mask-frac F
        --mask-seed S) [--noise-cov a,b,c,d,e,f] [--gamma1 F] [--gamma2 F]
        [--c-lambda F] [--alpha F] --out out.ppm

Exit codes: 0 success, 2 config error, 3 I/O error, 4 solver
non-convergence on every point.  QUATCOMP_SEED overrides the config
master seed.
"""

from __future__ import annotations

import argparse
import math
import os
import sys

import numpy as np

from .errors import DomainError, QuatCompError
from .imageio import (
    image_to_qmatrix,
    mask_from_pgm,
    qmatrix_to_image,
    read_image,
    read_pgm,
    write_ppm,
)
from .metrics import error_metrics, spikiness
from .observation import derive_seed, observe, sample_indices, SamplingScheme
from .solver import SolverConfig, complete_clean, complete_noisy
from .sweep import ConfigError, all_points_failed, load_raw_config, run_sweep
from .weights import (
    NoiseCovariance,
    combine_weights,
    lambda_rule,
    wc_decorrelate,
    ws_rebalance,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_IO = 3
EXIT_NOCONV = 4


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="quatcomp",
        description="Pure-quaternion matrix completion toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    sw = sub.add_parser("sweep", help="run a config-driven experiment sweep")
    sw.add_argument("--config", required=True,
                    help="config file path or preset name "
                         "(fig1|fig2|fig4l|fig4r|fig5|fig6|image)")
    sw.add_argument("--out", default=None,
                    help="CSV output path (default: stdout)")
    sw.add_argument("--jobs", type=int, default=1,
                    help="worker processes (output independent of N)")

    ip = sub.add_parser("inpaint", help="reconstruct a partially observed "
                                        "color image")
    ip.add_argument("--image", required=True, help="input image (ppm or png)")
    group = ip.add_mutually_exclusive_group(required=True)
    group.add_argument("--mask", help="PGM mask: 255 observed, 0 missing")
    group.add_argument("--mask-frac", type=float,
                       help="observed fraction in (0, 1]")
    ip.add_argument("--mask-seed", type=int, default=0,
                    help="seed for --mask-frac sampling")
    ip.add_argument("--noise-cov", default=None,
                    help="symmetric covariance packed as a,b,c,d,e,f for "
                         "[[a,b,c],[b,d,e],[c,e,f]]")
    ip.add_argument("--noise-seed", type=int, default=None)
    ip.add_argument("--gamma1", type=float, default=0.0,
                    help="noise-rebalance weight share")
    ip.add_argument("--gamma2", type=float, default=0.0,
                    help="decorrelation weight share")
    ip.add_argument("--c-lambda", type=float, default=0.6)
    ip.add_argument("--alpha", type=float, default=255.0 * math.sqrt(3.0))
    ip.add_argument("--tol-rel", type=float, default=1e-5)
    ip.add_argument("--max-iter", type=int, default=600)
    ip.add_argument("--out", required=True, help="output PPM path")
    return parser


def _cmd_sweep(args) -> int:
    try:
        raw = load_raw_config(args.config)
        env_seed = os.environ.get("QUATCOMP_SEED")
        if env_seed is not None:
            raw.setdefault("seeds", {})["master"] = int(env_seed)
        csv_text = run_sweep(raw, out=args.out, jobs=max(1, args.jobs))
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO
    if args.out is None:
        sys.stdout.write(csv_text)
    if all_points_failed(csv_text):
        print("no sweep point converged", file=sys.stderr)
        return EXIT_NOCONV
    return EXIT_OK


def _parse_packed_cov(text: str) -> NoiseCovariance:
    parts = text.split(",")
    if len(parts) != 6:
        raise ConfigError(
            f"--noise-cov: expected 6 comma-separated numbers, got "
            f"{len(parts)}")
    try:
        a, b, c, d, e, f = (float(p) for p in parts)
    except ValueError as exc:
        raise ConfigError(f"--noise-cov: {exc}") from exc
    return NoiseCovariance([[a, b, c], [b, d, e], [c, e, f]])


def _cmd_inpaint(args) -> int:
    try:
        pixels = read_image(args.image)
    except (OSError, DomainError) as exc:
        print(f"cannot read image: {exc}", file=sys.stderr)
        return EXIT_IO
    theta = image_to_qmatrix(pixels)
    d1, d2 = theta.shape

    try:
        if args.mask is not None:
            try:
                mask = mask_from_pgm(read_pgm(args.mask))
            except (OSError, DomainError) as exc:
                print(f"cannot read mask: {exc}", file=sys.stderr)
                return EXIT_IO
            if mask.shape != (d1, d2):
                print(f"mask shape {mask.shape} does not match image "
                      f"{(d1, d2)}", file=sys.stderr)
                return EXIT_IO
            rows, cols = np.nonzero(mask)
        else:
            frac = args.mask_frac
            if not 0.0 < frac <= 1.0:
                raise ConfigError(f"--mask-frac: need 0 < F <= 1, got {frac}")
            n = round(frac * d1 * d2)
            rows, cols = sample_indices(
                SamplingScheme("without", args.mask_seed), d1, d2, n)

        cov = (_parse_packed_cov(args.noise_cov)
               if args.noise_cov is not None else None)
        noise_seed = (args.noise_seed if args.noise_seed is not None
                      else derive_seed(args.mask_seed, 1))
        obs = observe(theta, rows, cols, kind="without", noise=cov,
                      seed=noise_seed)

        if cov is None:
            cfg = SolverConfig(alpha=args.alpha, tol_rel=args.tol_rel,
                               max_iter=args.max_iter)
            res = complete_clean(obs, cfg)
        else:
            ws = ws_rebalance(np.diag(cov.sigma))
            wc = wc_decorrelate(cov)
            weight = combine_weights(args.gamma1, args.gamma2, ws, wc)
            lam = lambda_rule(weight, cov, obs.n, d1, d2, args.c_lambda)
            cfg = SolverConfig(alpha=args.alpha, lam=lam, weight=weight,
                               tol_rel=args.tol_rel, max_iter=args.max_iter)
            res = complete_noisy(obs, cfg)
    except (ConfigError, DomainError, QuatCompError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    out_pixels = qmatrix_to_image(res.theta_hat)
    try:
        write_ppm(args.out, out_pixels)
    except OSError as exc:
        print(f"cannot write output: {exc}", file=sys.stderr)
        return EXIT_IO

    met = error_metrics(image_to_qmatrix(out_pixels), theta)
    print(f"psnr={met['psnr']:.4f} mse={met['mse']:.6g} "
          f"rse={met['rse']:.6g} spikiness={spikiness(theta):.4f} "
          f"iterations={res.iterations} "
          f"converged={'true' if res.converged else 'false'}")
    if not res.converged:
        return EXIT_NOCONV
    return EXIT_OK


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    if args.command == "sweep":
        return _cmd_sweep(args)
    return _cmd_inpaint(args)


if __name__ == "__main__":
    sys.exit(main())
