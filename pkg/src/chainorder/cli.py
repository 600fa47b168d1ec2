"""Command-line interface.

Exit codes: 0 success, 2 input error, 3 infeasible parameters, 4 internal
invariant breach.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import platform
import sys
from pathlib import Path

import numpy as np

from chainorder import __version__
from chainorder.counts import build_counts, read_sequence, write_sequence
from chainorder.errors import InfeasibleError, InputError
from chainorder.gdl import decode_order, gdl_profile, round_profile
from chainorder.generator import DEFAULT_BURN_IN, sample_chain, tensor_from_config
from chainorder.harness import (
    ESTIMATORS,
    load_config,
    parse_estimators,
    render_table,
    run_experiment,
    spec_from_config,
)
from chainorder.likelihood import CONVENTIONS, criteria, estimate_order
from chainorder.variance import diagnose

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_INFEASIBLE = 3
EXIT_INTERNAL = 4

log = logging.getLogger("chainorder")


class InvariantError(AssertionError):
    """A computed result violated one of its own guarantees."""


def _existing_file(value: str) -> Path:
    path = Path(value)
    if not path.is_file():
        raise InputError(f"no such file: {value}")
    return path


def _writable(value: str | None) -> Path | None:
    if value is None:
        return None
    path = Path(value)
    parent = path.parent if str(path.parent) else Path(".")
    if not parent.is_dir():
        raise InputError(f"output directory does not exist: {parent}")
    return path


def _emit(text: str, path: Path | None) -> None:
    if path is None:
        sys.stdout.write(text)
    else:
        path.write_text(text, encoding="utf-8")


def _add_sequence_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--input", required=True, help="sequence file (whitespace-separated symbols 1..m)")
    p.add_argument("--m", type=int, default=None,
                   help="alphabet size (default: largest symbol observed)")
    p.add_argument("--alphabet", default=None,
                   help='read the file as characters mapped in order, e.g. "acgt" -> 1..4')
    p.add_argument("--B", type=int, default=5, help="largest candidate order (default: 5)")


def _read(args):
    seq = read_sequence(_existing_file(args.input), m=args.m, alphabet=args.alphabet)
    log.info("read %d symbols over m=%d from %s", seq.n, seq.m, args.input)
    return seq


def _gdl_csv(profile) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["eta", "statistic", "gdl", "sigma"])
    sigma = round_profile(profile.gdl)
    for eta in range(profile.B + 1):
        w.writerow([eta, repr(float(profile.per_eta_statistic[eta])),
                    repr(float(profile.gdl[eta])), int(sigma[eta])])
    return buf.getvalue()


def _gdl_json(profile, verbose: bool) -> str:
    from chainorder.counts import decode

    order, saturated = decode_order(profile)
    payload = {
        "n": profile.n,
        "m": profile.m,
        "B": profile.B,
        "dof": profile.dof,
        "statistic": profile.per_eta_statistic.tolist(),
        "gdl": profile.gdl.tolist(),
        "sigma": round_profile(profile.gdl).tolist(),
        "order": order,
        "saturated": saturated,
    }
    if verbose:
        payload["delta2"] = {
            str(eta): {
                "".join(map(str, decode(int(code), eta, profile.m))) or "-": float(d[code])
                for code in np.flatnonzero(d)
            }
            for eta, d in enumerate(profile.local)
        }
    return json.dumps(payload, indent=2) + "\n"


def cmd_estimate(args) -> int:
    estimators = parse_estimators(args.estimators)
    out = _writable(args.output)
    seq = _read(args)
    B = args.B
    need = B + 2 if ("gdl" in estimators or args.curves) else B + 1
    table = build_counts(seq, need)
    results = {}
    curve = profile = None
    if any(e != "gdl" for e in estimators) or args.curves:
        curve = criteria(table, B, convention=args.penalty)
        for e in estimators:
            if e != "gdl":
                results[e] = (estimate_order(curve, e), False)
    if "gdl" in estimators or args.curves:
        profile = gdl_profile(table, B, min_count=args.min_count)
        if "gdl" in estimators:
            results["gdl"] = decode_order(profile)
    for e, (k, _) in results.items():
        if not 0 <= k <= B:
            raise InvariantError(f"{e} returned order {k} outside 0..{B}")

    lines = [f"n={seq.n} m={seq.m} B={B}"]
    for e in estimators:
        k, sat = results[e]
        lines.append(f"{e.upper()}: {k}" + (" (saturated: bound B reached)" if sat else ""))
    report = "\n".join(lines) + "\n"
    if args.curves:
        if out is None:
            report += "\n" + curve.to_csv() + "\n" + _gdl_csv(profile)
        else:
            Path(f"{out}.criteria.csv").write_text(curve.to_csv(), encoding="utf-8")
            Path(f"{out}.gdl.csv").write_text(_gdl_csv(profile), encoding="utf-8")
    if out is not None:
        out.write_text(report, encoding="utf-8")
    sys.stdout.write(report)
    return EXIT_OK


def _apply_overrides(cfg: dict, args) -> dict:
    cfg = dict(cfg)
    if getattr(args, "seed", None) is not None:
        cfg["seed"] = args.seed
    if getattr(args, "burn_in", None) is not None:
        cfg["burn_in"] = args.burn_in
    if getattr(args, "min_count", None) is not None:
        cfg["min_count"] = args.min_count
    if getattr(args, "estimators", None) is not None:
        cfg["estimators"] = args.estimators
    if getattr(args, "B", None) is not None:
        cfg["B"] = args.B
    return cfg


def cmd_simulate(args) -> int:
    cfg = _apply_overrides(load_config(_existing_file(args.config)), args)
    output = cfg.get("output") or {}
    fmt = (args.format or output.get("format") or "markdown").lower()
    target = args.output or output.get("path")
    if target is not None and args.output is None:
        Path(target).parent.mkdir(parents=True, exist_ok=True)
    out = _writable(target)
    spec = spec_from_config(cfg)
    table = run_experiment(spec, workers=args.workers)
    log.info("%d replications in %.2f s", table.replications, table.wall_time)
    for e in table.estimators:
        if sum(table.counts[e]) != table.replications:
            raise InvariantError(f"{e} tallies do not add up to {table.replications}")
    _emit(render_table(table, fmt), out)
    if out is not None:
        meta = {
            "table": json.loads(table.to_json()),
            "wall_time_seconds": table.wall_time,
            "workers": args.workers,
            "rng": "numpy PCG64, per-replication seeds via SplitMix64(seed ^ SplitMix64(r))",
            "chainorder_version": __version__,
            "numpy_version": np.__version__,
            "python": platform.python_version(),
            "config": str(args.config),
        }
        Path(f"{out}.meta.json").write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n",
                                            encoding="utf-8")
    return EXIT_OK


def cmd_gen(args) -> int:
    cfg = _apply_overrides(load_config(_existing_file(args.config)), args)
    out = _writable(args.output)
    if "generator" not in cfg:
        raise InputError("config needs a 'generator' section")
    tensor = tensor_from_config(cfg["generator"])
    n = int(args.n if args.n is not None else cfg.get("n", 0))
    if n < 1:
        raise InfeasibleError("sample size n must be >= 1 (set 'n' in the config or pass --n)")
    seq = sample_chain(tensor, n, int(cfg.get("seed", 0)), int(cfg.get("burn_in", DEFAULT_BURN_IN)))
    if out is None:
        from chainorder.counts import format_sequence

        sys.stdout.write(format_sequence(seq))
    else:
        write_sequence(out, seq)
    return EXIT_OK


def cmd_gdl_profile(args) -> int:
    out = _writable(args.output)
    seq = _read(args)
    profile = gdl_profile(build_counts(seq, args.B + 2), args.B, min_count=args.min_count)
    if np.any((profile.gdl < 0) | (profile.gdl > 1)):
        raise InvariantError("GDL value outside [0, 1]")
    fmt = (args.format or "csv").lower()
    if fmt == "json" or args.verbose:
        text = _gdl_json(profile, args.verbose)
    elif fmt == "csv":
        text = _gdl_csv(profile)
    else:
        raise InputError(f"gdl-profile supports csv or json, not {fmt!r}")
    _emit(text, out)
    return EXIT_OK


def _parse_context(value: str) -> tuple[int, ...]:
    value = value.strip()
    if value in ("", "-"):
        return ()
    try:
        return tuple(int(v) for v in value.replace(",", " ").split())
    except ValueError:
        raise InputError(f"context must be comma-separated symbols, got {value!r}") from None


def cmd_diagnostics(args) -> int:
    out = _writable(args.output)
    seq = _read(args)
    context = _parse_context(args.context)
    if any(not 1 <= s <= seq.m for s in context):
        raise InputError(f"context {context} has symbols outside 1..{seq.m}")
    try:
        report = diagnose(seq, context, blocks=args.blocks, c_l=args.c_l, c_g=args.c_g)
    except ValueError as exc:
        raise InfeasibleError(str(exc)) from exc
    _emit(report.to_csv(), out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="chainorder",
        description="Estimate the order of a finite-state Markov chain (AIC, BIC, EDC, GDL), "
        "generate chains of known order and run replication experiments.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="command", required=True)

    p = sub.add_parser("estimate", help="estimate the order of a sequence file")
    _add_sequence_args(p)
    p.add_argument("--estimators", default=",".join(ESTIMATORS),
                   help='comma-separated subset of aic,bic,edc,gdl (default: "aic,bic,edc,gdl")')
    p.add_argument("--curves", action="store_true",
                   help="also write per-order criterion and GDL curves as CSV")
    p.add_argument("--output", default=None,
                   help="write the report here; with --curves also <output>.criteria.csv and "
                   "<output>.gdl.csv")
    p.add_argument("--min-count", type=int, default=0,
                   help="GDL: ignore contexts flanked fewer times than this (default: 0)")
    p.add_argument("--penalty", choices=CONVENTIONS, default="free-parameters",
                   help="penalty convention for AIC/BIC/EDC (default: free-parameters)")
    p.add_argument("--verbose", action="store_true", help="log progress to stderr")
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("simulate", help="run a replication experiment from a config file")
    p.add_argument("--config", required=True, help="experiment config (YAML)")
    p.add_argument("--output", default=None, help="table path (default: config output.path or stdout)")
    p.add_argument("--format", choices=("markdown", "csv", "json"), default=None,
                   help="table format (default: config output.format or markdown)")
    p.add_argument("--seed", type=int, default=None, help="override the config seed")
    p.add_argument("--burn-in", type=int, default=None, help="override the config burn-in")
    p.add_argument("--estimators", default=None, help="override the config estimator list")
    p.add_argument("--B", type=int, default=None, help="override the config bound B")
    p.add_argument("--min-count", type=int, default=None, help="override the config GDL min count")
    p.add_argument("--workers", type=int, default=1, help="worker processes (default: 1)")
    p.add_argument("--verbose", action="store_true", help="log progress to stderr")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("gen", help="sample a chain from a generator config")
    p.add_argument("--config", required=True, help="config with a generator section (YAML)")
    p.add_argument("--output", default=None, help="sequence file to write (default: stdout)")
    p.add_argument("--n", type=int, default=None, help="sample size (default: config n)")
    p.add_argument("--seed", type=int, default=None, help="override the config seed")
    p.add_argument("--burn-in", type=int, default=None, help="override the config burn-in")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("gdl-profile", help="print the GDL profile of a sequence file")
    _add_sequence_args(p)
    p.add_argument("--format", choices=("csv", "json"), default="csv", help="output format")
    p.add_argument("--output", default=None, help="write here instead of stdout")
    p.add_argument("--min-count", type=int, default=0,
                   help="ignore contexts flanked fewer times than this (default: 0)")
    p.add_argument("--verbose", action="store_true",
                   help="JSON output including the divergence of every context")
    p.set_defaults(func=cmd_gdl_profile)

    p = sub.add_parser("diagnostics", help="delta-method variances for one context")
    p.add_argument("--input", required=True, help="sequence file")
    p.add_argument("--m", type=int, default=None, help="alphabet size")
    p.add_argument("--alphabet", default=None, help="character alphabet, e.g. acgt")
    p.add_argument("--context", required=True,
                   help='comma-separated context symbols, "-" for the empty context')
    p.add_argument("--blocks", type=int, default=20,
                   help="non-overlapping blocks for moment estimates (default: 20)")
    p.add_argument("--c-l", type=float, default=0.5, help="interpolation constant for L (default: 0.5)")
    p.add_argument("--c-g", type=float, default=0.5, help="interpolation constant for G (default: 0.5)")
    p.add_argument("--output", default=None, help="write CSV here instead of stdout")
    p.set_defaults(func=cmd_diagnostics)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    verbose = getattr(args, "verbose", False)
    logging.basicConfig(level=logging.INFO if verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except InfeasibleError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except AssertionError as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
