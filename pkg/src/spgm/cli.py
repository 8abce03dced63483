"""Command line interface: `spgm reference|run|diagnose`.

Experiments are described by a key=value config file; a handful of common
settings can be overridden with flags. The reference cache directory comes
from --cache-dir or the SPGM_CACHE_DIR environment variable.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from .bench import (
    ExperimentConfig,
    estimate_diagnostics,
    run_experiment,
    _build_application,
)
from .core import StepFailure
from .reference import compute_reference


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="key=value experiment config file")
    parser.add_argument("--out", help="output directory")
    parser.add_argument("--seeds", help="comma-separated seed list")
    parser.add_argument("--batch-sizes", dest="batch_sizes",
                        help="comma-separated batch sizes")
    parser.add_argument("--method", help="comma-separated methods (spgm,sgdm)")
    parser.add_argument("--policy", choices=["constant", "variable", "mixed"])
    parser.add_argument("--mu0", type=float)
    parser.add_argument("--eps", type=float)
    parser.add_argument("--max-iter", dest="max_iter", type=int)
    parser.add_argument("--cache-dir", dest="cache_dir")


def _config_from_args(args) -> ExperimentConfig:
    cfg = ExperimentConfig.from_file(args.config) if args.config else ExperimentConfig()
    overrides = {
        "out": args.out, "policy": args.policy, "cache_dir": args.cache_dir,
    }
    for key, value in overrides.items():
        if value is not None:
            setattr(cfg, key, value)
    if args.seeds is not None:
        cfg.set_option("seeds", args.seeds)
    if args.batch_sizes is not None:
        cfg.set_option("batch_sizes", args.batch_sizes)
    if args.method is not None:
        cfg.set_option("methods", args.method)
    if args.mu0 is not None:
        cfg.mu0 = args.mu0
    if args.eps is not None:
        cfg.eps = args.eps
    if args.max_iter is not None:
        cfg.max_iter = args.max_iter
    return cfg


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="spgm",
        description="Minibatch stochastic proximal gradient benchmark harness")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, description in [
        ("reference", "compute and cache the full-batch reference solution"),
        ("run", "run the configured experiment grid and write CSVs"),
        ("diagnose", "print diagnostics estimated at the reference solution"),
    ]:
        _add_common(sub.add_parser(name, help=description))
    args = parser.parse_args(argv)

    try:
        cfg = _config_from_args(args)
        cfg.validate()
        if args.command == "run":
            result = run_experiment(cfg)
            for path in result.csv_paths:
                print(path)
            print(result.manifest_path)
            return 0
        problem, key, _, _ = _build_application(cfg)
        ref_tol = cfg.ref_tol
        if ref_tol is None:
            ref_tol = 1e-8 if cfg.application == "svm" else 1e-9
        w_star = compute_reference(problem, tol=ref_tol, cache_key=key,
                                   cache_dir=cfg.cache_dir)
        if args.command == "reference":
            print(f"instance_hash={key}")
            print(f"norm_w_star={np.linalg.norm(w_star)!r}")
            return 0
        diag = estimate_diagnostics(problem, w_star)
        print(f"instance_hash={key}")
        print(f"sigma_hat_sq={diag.sigma_hat_sq!r}")
        print(f"s_hat={diag.s_hat!r}")
        print(f"lipschitz={diag.lipschitz!r}")
        print(f"strong_convexity={diag.strong_convexity!r}")
        return 0
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except StepFailure as exc:
        print(f"inner solver failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
