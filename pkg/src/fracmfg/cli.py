"""Command-line driver for the preset runs and convergence studies.

Examples:

    fracmfg --test 1 --out results/test1
    fracmfg --test 3 --nt 100 --out results/test3
    fracmfg --study order --alpha 0.5
    fracmfg --study refine --test 3 --T 0.5 --nh 16 --nt 50
    fracmfg --config run.cfg --out results/custom

A config file holds flat ``key = value`` lines using the same names as the
long options (alpha may be a comma-separated list); command-line flags
override config-file values.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from fracmfg.experiments import (
    PRESET_ALPHAS,
    ExperimentConfig,
    run_test,
    self_convergence_study,
    temporal_order_study,
)
from fracmfg.mfg import FixedPointError


def _parse_config_file(path: Path) -> dict[str, str]:
    values = {}
    for raw in path.read_text().splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise SystemExit(f"config line not of the form key = value: {raw!r}")
        key, val = (part.strip() for part in line.split("=", 1))
        values[key] = val
    return values


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fracmfg", description="Time-fractional MFG finite-difference experiments")
    parser.add_argument("--test", type=int, choices=(1, 2, 3), help="preset: 1 (plain), 2 (diffusive), 3 (penalized)")
    parser.add_argument("--study", choices=("order", "refine"), help="run a convergence study instead of a plain solve")
    parser.add_argument("--alpha", type=float, nargs="+", help="fractional order(s) in (0, 1]")
    parser.add_argument("--sigma", type=float, help="diffusion coefficient")
    parser.add_argument("--lambda", dest="lam", type=float, help="density penalization weight")
    parser.add_argument("--beta", type=float, help="Hamiltonian power (>= 2)")
    parser.add_argument("--scale", type=float, help="Hamiltonian scale factor (0.5 gives |p|^2/2)")
    parser.add_argument("--nh", type=int, help="spatial cells per axis")
    parser.add_argument("--nt", type=int, help="time steps")
    parser.add_argument("--T", dest="horizon", type=float, help="time horizon")
    parser.add_argument("--full", action="store_true", help="use the full-scale preset time resolution (N = 2000)")
    parser.add_argument("--out", type=Path, help="output directory for CSV / summary files")
    parser.add_argument("--config", type=Path, help="flat key = value config file")
    return parser


_CONFIG_CASTS = {
    "test": int,
    "study": str,
    "sigma": float,
    "lam": float,
    "beta": float,
    "scale": float,
    "nh": int,
    "nt": int,
    "horizon": float,
    "out": Path,
}
_CONFIG_ALIASES = {"lambda": "lam", "T": "horizon"}


def _apply_config_file(args: argparse.Namespace) -> None:
    if args.config is None:
        return
    for key, raw in _parse_config_file(args.config).items():
        dest = _CONFIG_ALIASES.get(key, key)
        if dest == "alpha":
            if args.alpha is None:
                args.alpha = [float(v) for v in raw.replace(",", " ").split()]
            continue
        if dest not in _CONFIG_CASTS:
            raise SystemExit(f"unknown config key {key!r}")
        if getattr(args, dest) is None:
            setattr(args, dest, _CONFIG_CASTS[dest](raw))


def _experiment_config(args: argparse.Namespace) -> ExperimentConfig:
    overrides = {}
    for name in ("sigma", "lam", "beta", "scale"):
        if getattr(args, name) is not None:
            overrides[name] = getattr(args, name)
    if args.nh is not None:
        overrides["n_h"] = args.nh
    if args.nt is not None:
        overrides["n_t"] = args.nt
    if args.horizon is not None:
        overrides["horizon"] = args.horizon
    if args.alpha is not None:
        overrides["alphas"] = tuple(args.alpha)
    overrides["out_dir"] = args.out
    if args.test is not None:
        return ExperimentConfig.preset(args.test, full_scale=args.full, **overrides)
    return ExperimentConfig(**overrides)


def _run_order_study(args: argparse.Namespace) -> int:
    alphas = args.alpha if args.alpha is not None else [0.5, 0.7]
    horizon = args.horizon if args.horizon is not None else 1.0
    dt_list = [horizon / n for n in (40, 80, 160, 320, 640)]
    for alpha in alphas:
        study = temporal_order_study(alpha, dt_list, horizon=horizon)
        print(f"alpha = {alpha:g}: observed temporal order {study.slope:.3f}")
        for dt, err in zip(study.dts, study.errors):
            print(f"    dt = {dt:.6g}   error = {err:.6e}")
    return 0


def _run_refine_study(args: argparse.Namespace) -> int:
    config = _experiment_config(args)
    alpha = config.alphas[0]
    study = self_convergence_study(config, alpha)
    print(f"self-convergence for alpha = {alpha:g}:")
    print(f"    density sup-L2 diffs:       {[f'{d:.4e}' for d in study.density_diffs]}")
    print(f"    value gradient L^beta diffs: {[f'{d:.4e}' for d in study.value_gradient_diffs]}")
    print(f"    monotone decrease: {study.monotone}")
    return 0 if study.monotone else 1


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    _apply_config_file(args)
    if args.study == "order":
        return _run_order_study(args)
    if args.study == "refine":
        return _run_refine_study(args)

    config = _experiment_config(args)
    try:
        records = run_test(config)
    except FixedPointError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    for record in records:
        report = record.report
        print(
            f"alpha = {record.alpha:g}: iterations = {record.solution.iterations}, "
            f"mass_max_dev = {report.max_mass_deviation:.3e}, min_density = {report.min_density:.3e}, "
            f"wall = {record.wall_time:.2f}s"
        )
        for path in record.manifest:
            print(f"    wrote {path}")
    ok = all(record.report.ok for record in records)
    return 0 if ok else 1


if __name__ == "__main__":
    raise SystemExit(main())
