"""Command-line front end.

Subcommands
-----------
run               run a convergence experiment from a JSON config
demo              run the built-in desk-scale study row (no config needed)
verify            run the built-in verification suites
prop6             randomized trials of the kernel-perturbation bound
baseline-compare  induced-prior posterior vs the data-driven Matérn baseline

All artifacts (rates.csv, baseline_rates.csv, posterior.csv, manifest.json,
verify-report.txt) are written inside --out and are byte-stable for a
fixed seed and thread count.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import experiments, verify
from .experiments import (
    ExperimentConfig,
    demo_config,
    l2_error,
    make_rng,
    matern_baseline,
    simulate_data,
    uniform_points,
)
from .fem import InducedPrior, Mesh1D
from .gp import condition

EXIT_OK = 0
EXIT_RUNTIME = 1
EXIT_CONFIG = 2


def _write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")


def _write_result(result: experiments.ExperimentResult, out: Path,
                  threads: int) -> None:
    _write(out / "rates.csv", result.rates.to_csv_text())
    _write(out / "baseline_rates.csv", result.baseline_rates.to_csv_text())
    manifest = json.dumps(result.manifest(threads=threads), indent=2,
                          sort_keys=True)
    _write(out / "manifest.json", manifest + "\n")


def _load_config(path: str, seed_override) -> ExperimentConfig:
    cfg_path = Path(path)
    if not cfg_path.is_file():
        raise FileNotFoundError(f"config file not found: {cfg_path}")
    config = ExperimentConfig.from_json(cfg_path)
    if seed_override is not None:
        config = ExperimentConfig.from_dict(
            {**config.to_dict(), "seed": int(seed_override)})
    return config


def cmd_run(args) -> int:
    try:
        config = _load_config(args.config, args.seed)
        if args.mode is not None:
            config = ExperimentConfig.from_dict(
                {**config.to_dict(), "m_mode": args.mode})
    except (OSError, ValueError, KeyError, json.JSONDecodeError) as exc:
        print(f"invalid config: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    result = experiments.run_convergence(config, threads=args.threads)
    _write_result(result, Path(args.out), args.threads)
    for s in result.rates.series:
        print(f"nu={s.nu} l={s.lengthscale} s2={s.variance} n_fe={s.n_fe}: "
              f"fitted slope {s.fitted_slope:.4f} (theory {s.theory_slope:.4f})")
    for note in result.rates.diagnostics:
        print(f"note: {note}")
    return EXIT_OK


def cmd_demo(args) -> int:
    seed = 20260809 if args.seed is None else args.seed
    config = demo_config(seed=seed, m_mode=args.mode or "lumped")
    out = Path(args.out)
    result = experiments.run_convergence(config, threads=args.threads)
    _write_result(result, out, args.threads)
    _write(out / "posterior.csv", experiments.posterior_grid_csv(config, n=7))
    for s in result.rates.series:
        print(f"demo: nu={s.nu} n_fe={s.n_fe} fitted slope {s.fitted_slope:.4f} "
              f"(theory {s.theory_slope:.4f}), {len(s.rows)} rows")
    return EXIT_OK


def cmd_verify(args) -> int:
    results = verify.run_all(mode=args.mode or "exact")
    lines = [r.line() for r in results]
    report = "\n".join(lines) + "\n"
    _write(Path(args.out) / "verify-report.txt", report)
    print(report, end="")
    return EXIT_OK if all(r.passed for r in results) else EXIT_RUNTIME


def cmd_prop6(args) -> int:
    seed = 17 if args.seed is None else args.seed
    reports = experiments.prop6_randomized_trials(n_trials=args.trials, seed=seed)
    violations = [r for r in reports if not r.passed]
    lines = [
        f"trial {i}: lhs={r.lhs:.6e} rhs={r.rhs:.6e} delta={r.delta:.6e} "
        f"{'ok' if r.passed else 'VIOLATION at x=' + repr(r.witness_x)}"
        for i, r in enumerate(reports)
    ]
    summary = f"{len(reports) - len(violations)}/{len(reports)} trials passed"
    _write(Path(args.out) / "prop6-report.txt", "\n".join(lines + [summary]) + "\n")
    print(summary)
    return EXIT_OK if not violations else EXIT_RUNTIME


def cmd_baseline_compare(args) -> int:
    seed = 20260809 if args.seed is None else args.seed
    config = demo_config(seed=seed, m_mode=args.mode or "lumped")
    kc = config.kernels[0]
    truth = experiments.TRUTHS[config.truth]
    prior = InducedPrior(experiments.OPERATORS[config.operator](),
                         Mesh1D.uniform(config.n_fe[0]), kc.build(),
                         mode=config.m_mode)
    X = uniform_points(args.n)
    errs, bl_errs = [], []
    for r in range(args.realizations):
        rng = make_rng(config.seed, 7, 0, r)
        y = simulate_data(truth.solution, X, config.noise_sd, rng)
        model = condition(prior.mean, prior.kernel, X, y, config.noise_sd)
        errs.append(l2_error(truth.solution, model.predict))
        bl = matern_baseline(X, y, config.noise_sd, kc.nu)
        bl_errs.append(l2_error(truth.solution, bl.predict))
    mean_err, mean_bl = float(np.mean(errs)), float(np.mean(bl_errs))
    text = (f"n={args.n} realizations={args.realizations}\n"
            f"induced-prior mean L2 error: {mean_err!r}\n"
            f"matern-baseline mean L2 error: {mean_bl!r}\n"
            f"induced prior {'<=' if mean_err <= mean_bl else '>'} baseline\n")
    _write(Path(args.out) / "baseline-compare.txt", text)
    print(text, end="")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="statfem",
        description="Finite-element induced Gaussian process priors: "
                    "experiments and verification",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, config_required=False):
        if config_required:
            p.add_argument("--config", required=True, help="JSON experiment config")
        p.add_argument("--out", default="out", help="output directory")
        p.add_argument("--seed", type=int, default=None, help="RNG seed override")
        p.add_argument("--threads", type=int, default=os.cpu_count() or 1,
                       help="parallel realizations (output is thread-count invariant)")
        p.add_argument("--mode", choices=["exact", "lumped"], default=None,
                       help="kernel Gram assembly mode override")

    p_run = sub.add_parser("run", help="run an experiment from a config file")
    common(p_run, config_required=True)
    p_run.set_defaults(func=cmd_run)

    p_demo = sub.add_parser("demo", help="run the built-in desk-scale row")
    common(p_demo)
    p_demo.set_defaults(func=cmd_demo)

    p_verify = sub.add_parser("verify", help="run the verification suites")
    common(p_verify)
    p_verify.set_defaults(func=cmd_verify)

    p_prop6 = sub.add_parser("prop6", help="randomized perturbation-bound trials")
    common(p_prop6)
    p_prop6.add_argument("--trials", type=int, default=100)
    p_prop6.set_defaults(func=cmd_prop6)

    p_bc = sub.add_parser("baseline-compare",
                          help="induced prior vs data-driven Matérn baseline")
    common(p_bc)
    p_bc.add_argument("--n", type=int, default=7, help="number of observations")
    p_bc.add_argument("--realizations", type=int, default=50)
    p_bc.set_defaults(func=cmd_baseline_compare)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
