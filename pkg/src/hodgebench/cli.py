"""Command-line interface.

Subcommands:

* ``sweep``    iteration-count benchmark over (level, alpha, k) tuples
* ``oracle``   dense spectral verification of the stability bounds
* ``kernels``  micro-benchmark of the compiled vs pure-python kernels

Exit codes: 0 full success, 1 if any tuple failed (or an oracle bound was
violated), 2 on configuration errors.  A plain-text config file with
``key = value`` lines (keys repeated for lists) can seed any run; every key
is also a flag, and flags win.
"""

from __future__ import annotations

import argparse
import sys

from . import bench
from .errors import DenseSizeError


def _parse_config_file(path):
    values = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(
                    f"{path}:{lineno}: expected 'key = value', got {raw!r}")
            key, value = line.split("=", 1)
            values.setdefault(key.strip(), []).append(value.strip())
    return values


_LIST_KEYS = {"k", "alpha", "levels", "mesh"}
_SCALAR_KEYS = {"dim", "tol", "maxiter", "format", "out", "max_dof", "timing",
                "level", "repeats"}


def _merge_config(args, parser):
    """Fill argparse defaults from the config file; flags override."""
    if not getattr(args, "config", None):
        return args
    try:
        values = _parse_config_file(args.config)
    except OSError as exc:
        parser.error(f"cannot read config file: {exc}")
        return args
    for key, items in values.items():
        if key not in _LIST_KEYS and key not in _SCALAR_KEYS:
            parser.error(f"unknown config key {key!r}")
        dest = {"k": "k", "alpha": "alpha", "levels": "levels", "mesh": "mesh",
                "format": "fmt", "timing": "timing"}.get(key, key)
        if not hasattr(args, dest):
            continue
        if getattr(args, dest) is not None and getattr(args, dest) != ():
            continue  # explicitly given on the command line
        try:
            if key == "k":
                setattr(args, dest, [int(v) for v in items])
            elif key == "alpha":
                setattr(args, dest, [float(v) for v in items])
            elif key == "levels":
                setattr(args, dest, [int(v) for v in items])
            elif key == "mesh":
                setattr(args, dest, list(items))
            elif key in ("dim", "maxiter", "max_dof", "level", "repeats"):
                setattr(args, dest, int(items[-1]))
            elif key == "tol":
                setattr(args, dest, float(items[-1]))
            elif key == "timing":
                setattr(args, dest, items[-1].lower() in ("1", "true", "yes", "on"))
            else:
                setattr(args, dest, items[-1])
        except ValueError as exc:
            parser.error(f"bad value for config key {key!r}: {exc}")
    return args


def _add_common(sub):
    sub.add_argument("--config", help="config file with key = value lines")
    sub.add_argument("--dim", type=int, default=None, choices=(2, 3))
    sub.add_argument("--k", type=int, nargs="+", default=None,
                     help="form degrees to sweep")
    sub.add_argument("--alpha", type=float, nargs="+", default=None,
                     help="weighting parameters")
    sub.add_argument("--levels", type=int, nargs="+", default=None,
                     help="structured mesh subdivisions per axis")
    sub.add_argument("--mesh", action="append", default=None, metavar="PATH.msh",
                     help="MSH 2.2/4.1 file, repeatable; appended to levels")
    sub.add_argument("--out", default=None, help="output path (default stdout)")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="hodge-bench",
        description="mixed Hodge-Laplace preconditioning benchmark")
    subs = parser.add_subparsers(dest="command", required=True)

    sweep = subs.add_parser("sweep", help="MINRES iteration-count sweep")
    _add_common(sweep)
    sweep.add_argument("--tol", type=float, default=None,
                       help="unpreconditioned relative residual target")
    sweep.add_argument("--maxiter", type=int, default=None)
    sweep.add_argument("--format", dest="fmt", choices=("csv", "markdown"),
                       default=None)
    sweep.add_argument("--no-timing", dest="timing", action="store_false",
                       default=None,
                       help="emit wall_time as 0.0 for byte-identical reruns")

    oracle = subs.add_parser("oracle", help="spectral verification report")
    _add_common(oracle)
    oracle.add_argument("--max-dof", dest="max_dof", type=int, default=None,
                        help="dense size cap for the oracle eigensolves")

    kern = subs.add_parser("kernels", help="compare kernel backends")
    kern.add_argument("--config", help="config file with key = value lines")
    kern.add_argument("--dim", type=int, default=None, choices=(2, 3))
    kern.add_argument("--level", type=int, default=None)
    kern.add_argument("--repeats", type=int, default=None)
    kern.add_argument("--out", default=None)
    return parser


def _config_from_args(args):
    levels = list(args.levels or [])
    levels += list(args.mesh or [])
    kwargs = dict(
        dim=args.dim if args.dim is not None else 2,
        degrees=tuple(args.k) if args.k else None,
        levels=tuple(levels) if levels else None,
    )
    if args.alpha:
        kwargs["alphas"] = tuple(args.alpha)
    if getattr(args, "tol", None) is not None:
        kwargs["tol"] = args.tol
    if getattr(args, "maxiter", None) is not None:
        kwargs["maxiter"] = args.maxiter
    if getattr(args, "fmt", None) is not None:
        kwargs["fmt"] = args.fmt
    if getattr(args, "max_dof", None) is not None:
        kwargs["max_dof"] = args.max_dof
    if getattr(args, "timing", None) is not None:
        kwargs["record_timing"] = args.timing
    if args.out:
        kwargs["out"] = args.out
    return bench.SweepConfig(**kwargs)


def _write_output(data, out):
    if out:
        with open(out, "wb") as fh:
            fh.write(data)
    else:
        sys.stdout.buffer.write(data)
        sys.stdout.flush()


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    args = _merge_config(args, parser)

    if args.command == "kernels":
        report = bench.kernel_benchmark(
            dim=args.dim if args.dim is not None else 2,
            level=args.level if args.level is not None else 24,
            repeats=args.repeats if args.repeats is not None else 3)
        _write_output(report.encode(), args.out)
        return 0

    try:
        config = _config_from_args(args)
        config.resolved(oracle=args.command == "oracle")
    except ValueError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2

    if args.command == "sweep":
        result = bench.run_sweep(config)
        data = bench.emit_table(result, config.fmt)
        _write_output(data, config.out)
        return 1 if result.any_failed else 0

    # oracle
    try:
        report = bench.run_oracle_report(config)
    except DenseSizeError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    _write_output(report, config.out)
    return 0 if bench.oracle_report_passed(report) else 1


if __name__ == "__main__":
    sys.exit(main())
