"""Command-line interface.

Subcommands: ``test`` (relative dependency test on CSV files), ``hsic``
(plain dependence estimate), and the synthetic experiment drivers
``power``, ``calibrate``, ``scatter``, ``converge``.  Results go to
standard output as JSON (or CSV with --format csv); diagnostics go to
standard error.  Exit codes: 0 success, 2 usage or I/O problems, 3
statistical preconditions not met.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from pathlib import Path

import numpy as np

from reldep import synthbench
from reldep.dataset import (
    DatasetError,
    PreconditionError,
    align,
    load_csv,
)
from reldep.hsic import hsic_estimate, variance_hsic
from reldep.kernels import (
    GAUSSIAN,
    LINEAR,
    KernelConfig,
    KernelSpec,
    build_gram,
    zero_diagonal,
)
from reldep.reltest import (
    dependent_test,
    generalized_test,
    independent_test,
    joint_summary,
)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_PRECONDITION = 3


class CliError(Exception):
    def __init__(self, message: str, code: int = EXIT_USAGE):
        super().__init__(message)
        self.code = code


def _default_seed(value) -> int:
    if value is not None:
        return value
    env = os.environ.get("RELDEP_SEED")
    if env is not None:
        try:
            return int(env)
        except ValueError:
            raise CliError(f"RELDEP_SEED must be an integer, got {env!r}")
    return 0


def _parse_weights(text: str) -> list[float]:
    try:
        weights = [float(w) for w in text.split(",") if w.strip() != ""]
    except ValueError:
        raise CliError(f"cannot parse weights {text!r}")
    if not weights or all(w == 0.0 for w in weights):
        raise CliError("weights must be non-empty and not all zero")
    return weights


def _parse_pairs(text: str) -> list[tuple[int, int]]:
    pairs = []
    for item in text.split(","):
        parts = item.split("-")
        if len(parts) != 2:
            raise CliError(f"cannot parse pair {item!r} (expected like 0-1)")
        try:
            pairs.append((int(parts[0]), int(parts[1])))
        except ValueError:
            raise CliError(f"cannot parse pair {item!r} (expected like 0-1)")
    return pairs


def _parse_grid(text: str) -> list[float]:
    """start:step:stop inclusive grid, or a comma-separated list."""
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise CliError(f"grid {text!r} must be start:step:stop")
        try:
            start, step, stop = (float(p) for p in parts)
        except ValueError:
            raise CliError(f"cannot parse grid {text!r}")
        if step <= 0 or stop < start:
            raise CliError(f"grid {text!r} must have step > 0 and stop >= start")
        count = int(round((stop - start) / step)) + 1
        grid = [start + i * step for i in range(count)]
        return [g for g in grid if g <= stop + 1e-12]
    try:
        grid = [float(p) for p in text.split(",") if p.strip() != ""]
    except ValueError:
        raise CliError(f"cannot parse grid {text!r}")
    if not grid:
        raise CliError("grid is empty")
    return grid


def _parse_int_list(text: str) -> list[int]:
    try:
        values = [int(p) for p in text.split(",") if p.strip() != ""]
    except ValueError:
        raise CliError(f"cannot parse integer list {text!r}")
    if not values:
        raise CliError("list is empty")
    return values


def _kernel_spec(family: str | None, bandwidth: float | None) -> KernelSpec:
    family = family or GAUSSIAN
    if family == LINEAR and bandwidth is not None:
        raise CliError("--bandwidth-* cannot be combined with a linear kernel")
    return KernelSpec(family=family, bandwidth=bandwidth)


def _kernel_config(args) -> KernelConfig:
    return KernelConfig(
        x=_kernel_spec(args.kernel_x, args.bandwidth_x),
        y=_kernel_spec(args.kernel_y, args.bandwidth_y),
        z=_kernel_spec(args.kernel_z, args.bandwidth_z),
    )


def _check_alpha(alpha: float) -> None:
    if not (0.0 < alpha < 1.0):
        raise CliError(f"--alpha must lie in (0, 1), got {alpha}")


def _result_csv(payload: dict) -> str:
    flat = {
        k: (json.dumps(v) if isinstance(v, (dict, list)) else v)
        for k, v in payload.items()
    }
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=list(flat))
    writer.writeheader()
    writer.writerow(flat)
    return buf.getvalue()


def _emit(payload: dict, args) -> None:
    if getattr(args, "format", "json") == "csv":
        text = _result_csv(payload)
        sys.stdout.write(text)
    else:
        text = json.dumps(payload, indent=2)
        sys.stdout.write(text + "\n")
    out = getattr(args, "out", None)
    if out:
        Path(out).write_text(
            json.dumps(payload, indent=2) + "\n", encoding="utf-8"
        )


def _load_inputs(paths, args):
    delimiter = args.delimiter
    has_header = args.header
    return [
        load_csv(p, delimiter=delimiter, has_header=has_header) for p in paths
    ]


# ---------------------------------------------------------------------------
# Subcommands.
# ---------------------------------------------------------------------------


def cmd_test(args) -> int:
    _check_alpha(args.alpha)
    samples = _load_inputs(args.inputs, args)
    config = _kernel_config(args)

    if args.pairs or args.weights:
        if not (args.pairs and args.weights):
            raise CliError("--pairs and --weights must be used together")
        pairs = _parse_pairs(args.pairs)
        weights = _parse_weights(args.weights)
        if len(weights) != len(pairs):
            raise CliError(
                f"{len(weights)} weights for {len(pairs)} pairs"
            )
        for a, b in pairs:
            if not (0 <= a < len(samples) and 0 <= b < len(samples)):
                raise CliError(f"pair {a}-{b} indexes outside the input files")
        summary, info = joint_summary(samples, pairs, config, with_info=True)
        result = generalized_test(summary, weights, alpha=args.alpha)
        payload = result.to_dict()
        payload["kernel"] = info
        payload["pairs"] = [f"{a}-{b}" for a, b in pairs]
        payload["weights"] = weights
    else:
        if len(samples) != 3:
            raise CliError(
                "test needs exactly three input files (x, y, z) unless "
                "--pairs/--weights select a generalized combination"
            )
        j = align(*samples)
        if args.method == "independent":
            shuffle_seed = _default_seed(args.seed) if args.shuffle_split else None
            result = independent_test(
                j, config, alpha=args.alpha, shuffle_seed=shuffle_seed
            )
        else:
            result = dependent_test(j, config, alpha=args.alpha)
        payload = result.to_dict()
    _emit(payload, args)
    return EXIT_OK


def cmd_hsic(args) -> int:
    samples = _load_inputs(args.inputs, args)
    x, y = samples
    if x.m != y.m:
        raise DatasetError(f"sample sizes {x.m},{y.m} differ")
    config = _kernel_config(args)
    gx = build_gram(x, config.x)
    gy = build_gram(y, config.y)
    est = hsic_estimate(zero_diagonal(gx), zero_diagonal(gy), "XY")
    payload = {
        "hsic": est.value,
        "variance": variance_hsic(est),
        "m": est.m,
        "kernel": {"x": gx.descriptor(), "y": gy.descriptor()},
    }
    _emit(payload, args)
    return EXIT_OK


def _base_config(args, gamma3: float | None = None) -> synthbench.SynthConfig:
    return synthbench.SynthConfig(
        m=args.m,
        gamma1=args.gamma1,
        gamma2=args.gamma2,
        gamma3=args.gamma2 if gamma3 is None else gamma3,
        seed=_default_seed(args.seed),
    )


def _out_dir(args) -> Path:
    out = Path(getattr(args, "out", None) or ".")
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_power(args) -> int:
    _check_alpha(args.alpha)
    grid = _parse_grid(args.gamma3)
    base = _base_config(args)
    table = synthbench.power_curve(
        grid, base, trials=args.trials, alpha=args.alpha, jobs=args.jobs
    )
    stem = synthbench.output_basename("power", args.m, base.seed)
    csv_path = _out_dir(args) / f"{stem}.csv"
    synthbench.write_rows_csv(
        csv_path,
        table.rows,
        ["gamma3", "power_dependent", "power_independent", "trials", "alpha", "m"],
    )
    summary = {
        "experiment": "power",
        "m": args.m,
        "seed": base.seed,
        "trials": args.trials,
        "alpha": args.alpha,
        "rows": len(table.rows),
        "csv": str(csv_path),
    }
    (_out_dir(args) / f"{stem}.json").write_text(
        json.dumps(summary, indent=2) + "\n", encoding="utf-8"
    )
    print(json.dumps(summary))
    return EXIT_OK


def cmd_calibrate(args) -> int:
    _check_alpha(args.alpha)
    base = _base_config(args)
    rate = synthbench.calibration(
        base, trials=args.trials, alpha=args.alpha, jobs=args.jobs
    )
    stem = synthbench.output_basename("calibrate", args.m, base.seed)
    row = argparse.Namespace(
        m=args.m, trials=args.trials, alpha=args.alpha, rejection_rate=rate
    )
    csv_path = _out_dir(args) / f"{stem}.csv"
    synthbench.write_rows_csv(
        csv_path, [row], ["m", "trials", "alpha", "rejection_rate"]
    )
    summary = {
        "experiment": "calibrate",
        "m": args.m,
        "seed": base.seed,
        "trials": args.trials,
        "alpha": args.alpha,
        "rejection_rate": rate,
        "csv": str(csv_path),
    }
    (_out_dir(args) / f"{stem}.json").write_text(
        json.dumps(summary, indent=2) + "\n", encoding="utf-8"
    )
    print(json.dumps(summary))
    return EXIT_OK


def cmd_scatter(args) -> int:
    _check_alpha(args.alpha)
    cfg = _base_config(args, gamma3=args.gamma3)
    records = synthbench.scatter_experiment(
        cfg, trials=args.trials, alpha=args.alpha, jobs=args.jobs
    )
    stem = synthbench.output_basename("scatter", args.m, cfg.seed)
    csv_path = _out_dir(args) / f"{stem}.csv"
    synthbench.write_rows_csv(
        csv_path,
        records,
        [
            "trial",
            "hsic_xy",
            "hsic_xz",
            "hsic_xy_half",
            "hsic_xz_half",
            "p_dep",
            "p_indep",
        ],
    )
    p_dep = float(np.median([r.p_dep for r in records]))
    p_indep = float(np.median([r.p_indep for r in records]))
    summary = {
        "experiment": "scatter",
        "m": args.m,
        "seed": cfg.seed,
        "gamma3": args.gamma3,
        "trials": args.trials,
        "median_p_dep": p_dep,
        "median_p_indep": p_indep,
        "csv": str(csv_path),
    }
    (_out_dir(args) / f"{stem}.json").write_text(
        json.dumps(summary, indent=2) + "\n", encoding="utf-8"
    )
    print(json.dumps(summary))
    return EXIT_OK


def cmd_converge(args) -> int:
    grid = _parse_int_list(args.m_grid)
    cfg = synthbench.SynthConfig(
        m=grid[0],
        gamma1=args.gamma1,
        gamma2=args.gamma2,
        gamma3=args.gamma3,
        seed=_default_seed(args.seed),
    )
    points = synthbench.convergence_diagnostic(
        grid, cfg, trials=args.trials, jobs=args.jobs
    )
    stem = synthbench.output_basename("converge", max(grid), cfg.seed)
    csv_path = _out_dir(args) / f"{stem}.csv"
    synthbench.write_rows_csv(csv_path, points, ["m", "median_abs_dev"])
    logs = np.log([p.m for p in points])
    logd = np.log([p.median_abs_dev for p in points])
    slope = float(np.polyfit(logs, logd, 1)[0])
    summary = {
        "experiment": "converge",
        "m_grid": grid,
        "seed": cfg.seed,
        "gamma3": args.gamma3,
        "trials": args.trials,
        "loglog_slope": slope,
        "csv": str(csv_path),
    }
    (_out_dir(args) / f"{stem}.json").write_text(
        json.dumps(summary, indent=2) + "\n", encoding="utf-8"
    )
    print(json.dumps(summary))
    return EXIT_OK


# ---------------------------------------------------------------------------
# Parser.
# ---------------------------------------------------------------------------


def _add_common_io(p):
    p.add_argument("--delimiter", default=",", help="CSV delimiter (default comma)")
    p.add_argument(
        "--header", action="store_true", help="treat the first row as a header"
    )
    p.add_argument("--out", help="also write the result to this file")
    p.add_argument(
        "--format", choices=["json", "csv"], default="json", help="stdout format"
    )


def _add_kernel_flags(p):
    for var in ("x", "y", "z"):
        p.add_argument(
            f"--kernel-{var}", choices=[GAUSSIAN, LINEAR], help=f"kernel for {var}"
        )
        p.add_argument(
            f"--bandwidth-{var}",
            type=float,
            help=f"Gaussian bandwidth for {var} (default: median heuristic)",
        )


def _add_experiment_flags(p, with_gamma3: bool):
    p.add_argument("--m", type=int, required=True, help="sample size per trial")
    p.add_argument("--trials", type=int, required=True, help="Monte-Carlo trials")
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--gamma1", type=float, default=0.3)
    p.add_argument("--gamma2", type=float, default=0.3)
    if with_gamma3:
        p.add_argument("--gamma3", type=float, required=True)
    p.add_argument("--seed", type=int, default=None, help="master seed (or RELDEP_SEED)")
    p.add_argument("--jobs", type=int, default=1, help="parallel trial workers")
    p.add_argument("--out", help="output directory (default: current)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="reldep",
        description=(
            "Relative dependency testing: decide whether a source variable "
            "is more dependent on one target than on another."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("test", help="relative dependency test on CSV files")
    p.add_argument("inputs", nargs="+", help="CSV files: x y z (or more with --pairs)")
    p.add_argument(
        "--method",
        choices=["dependent", "independent"],
        default="dependent",
        help="full-sample correlated test (default) or split-half baseline",
    )
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--weights", help="comma-separated weights for --pairs")
    p.add_argument("--pairs", help="comma-separated index pairs like 0-1,0-2,0-3")
    p.add_argument(
        "--shuffle-split",
        action="store_true",
        help="seeded pre-shuffle of rows before the independent split",
    )
    p.add_argument("--seed", type=int, default=None, help="seed for --shuffle-split")
    _add_kernel_flags(p)
    _add_common_io(p)
    p.set_defaults(func=cmd_test)

    p = sub.add_parser("hsic", help="unbiased HSIC estimate for two CSV files")
    p.add_argument("inputs", nargs=2, help="CSV files: x y")
    _add_kernel_flags(p)
    _add_common_io(p)
    p.set_defaults(func=cmd_hsic)

    p = sub.add_parser("power", help="power curve over a gamma3 grid")
    p.add_argument(
        "--gamma3", required=True, help="grid start:step:stop or comma list"
    )
    _add_experiment_flags(p, with_gamma3=False)
    p.set_defaults(func=cmd_power)

    p = sub.add_parser("calibrate", help="Type I rate at the null boundary")
    _add_experiment_flags(p, with_gamma3=False)
    p.set_defaults(func=cmd_calibrate)

    p = sub.add_parser("scatter", help="per-trial estimates and p-values")
    _add_experiment_flags(p, with_gamma3=True)
    p.set_defaults(func=cmd_scatter)

    p = sub.add_parser("converge", help="convergence-rate diagnostic")
    p.add_argument("--m-grid", required=True, help="comma list, e.g. 100,200,400,800")
    p.add_argument("--trials", type=int, required=True)
    p.add_argument("--gamma1", type=float, default=0.3)
    p.add_argument("--gamma2", type=float, default=0.3)
    p.add_argument("--gamma3", type=float, default=0.7)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out", help="output directory (default: current)")
    p.set_defaults(func=cmd_converge)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors already; normalize other codes
        return EXIT_USAGE if exc.code not in (0,) else 0
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except PreconditionError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION
    except DatasetError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
