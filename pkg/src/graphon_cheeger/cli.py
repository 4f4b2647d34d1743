"""Command-line driver: spectrum, partition, oracle, verify and sweep.

All subcommands emit canonical JSON (sorted keys, 17-significant-digit
floats; byte-identical across runs for identical flags) plus optional CSV
companions. Exit codes: 0 success, 1 domain error, 2 usage error, 3 theorem
check failure.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from pathlib import Path

import numpy as np

from .errors import GraphonError, ParseError
from .graphon import CellSet, StepGraphon, VertexFunction, expansion, rayleigh
from .io import FORMATS, canonical_json, load_graphon, write_csv
from .partition import GridShift, LocalizationReport, sweep_cut, sweep_profile
from .pipeline import (
    DEFAULT_ORACLE_LIMIT,
    OracleResult,
    PartitionResult,
    brute_force_hk,
    k_way_partition,
    verify_theorem,
)
from .presets import discretize_preset, parse_preset
from .spectral import eigen_k

SEED_ENV = "GRAPHON_CHEEGER_SEED"


def _default_seed() -> int:
    raw = os.environ.get(SEED_ENV)
    if raw is None:
        return 0
    try:
        return int(raw)
    except ValueError:
        raise ParseError(f"{SEED_ENV} must be an integer, got {raw!r}") from None


def _add_source_args(p: argparse.ArgumentParser, need_k: bool = True) -> None:
    p.add_argument("--preset", help="analytic kernel, e.g. constant:0.5 or sbm:2,1.0,0.05")
    p.add_argument("--input", help="kernel file path")
    p.add_argument("--format", default="dense-text", choices=FORMATS, help="kernel file format")
    p.add_argument("--n", type=int, help="cell count for preset discretization")
    p.add_argument("--subsample", type=int, default=8, help="midpoints per cell axis for presets")
    if need_k:
        p.add_argument("--k", type=int, required=True, help="number of parts / eigenpairs")
    p.add_argument(
        "--require-connected",
        action=argparse.BooleanOptionalAction,
        default=True,
        help="reject disconnected kernels",
    )
    p.add_argument("--out", help="write the JSON report here (default: stdout)")
    p.add_argument("--csv", help="write the CSV companion here")


def _load_source(args, parser: argparse.ArgumentParser) -> StepGraphon:
    if (args.preset is None) == (args.input is None):
        parser.error("exactly one of --preset or --input is required")
    if args.preset is not None:
        if args.n is None:
            parser.error("--preset requires --n")
        return discretize_preset(
            parse_preset(args.preset),
            args.n,
            subsample=args.subsample,
            require_connected=args.require_connected,
        )
    return load_graphon(args.input, format=args.format, require_connected=args.require_connected)


def _input_section(args, W: StepGraphon, extra: dict | None = None) -> dict:
    doc = {
        "preset": args.preset,
        "path": args.input,
        "format": args.format if args.input is not None else None,
        "n": W.n,
        "subsample": args.subsample if args.preset is not None else None,
        "require_connected": args.require_connected,
    }
    if hasattr(args, "k"):
        doc["k"] = args.k
    if extra:
        doc.update(extra)
    return doc


def _spectrum_section(W: StepGraphon, k: int) -> dict:
    basis = eigen_k(W, k)
    discrete = [float(v) for v in basis.eigenvalues]
    return {"discrete": discrete, "graphon": [min(v, 1.0) for v in discrete]}


def _shift_doc(shift: GridShift) -> dict:
    return {
        "k": shift.k,
        "s": shift.s,
        "w": [float(v) for v in shift.w],
        "margin": shift.margin,
        "seed": shift.seed,
    }


def _partition_section(result: PartitionResult) -> dict:
    loc = result.localization
    lam = result.lambda_discrete
    # Observed ratio against the certified sqrt(8000) k^3.5 factor, for
    # empirical study of how loose the explicit constant is.
    ratio = result.h_alg / math.sqrt(lam) if lam > 0.0 else None
    return {
        "sets": [list(A.members) for A in result.sets],
        "expansions": list(result.expansions),
        "h_alg": result.h_alg,
        "bound": result.upper_bound,
        "observed_ratio": ratio,
        "lambda_discrete": result.lambda_discrete,
        "lambda_graphon": result.lambda_graphon,
        "certificates": {
            "seed": result.seed,
            "shift": _shift_doc(result.shift),
            "retries_used": result.retries_used,
            "family": {
                "accepted": result.family_accepted,
                "masses": list(result.family_masses),
                "total_mass": result.family_total_mass,
                "min_separation": result.family_min_separation,
            },
            "anchors": {"masses": list(result.anchor_masses)},
            "localization": {
                "lambda_discrete": loc.lambda_discrete,
                "bound": loc.bound,
                "rayleigh": list(loc.rayleigh_values),
                "norm_sq": list(loc.norm_sq),
                "lipschitz_scale": loc.lipschitz_scale,
                "lipschitz_slack": list(loc.lipschitz_slack),
            },
            "sweep": {"bounds": list(result.sweep_bounds)},
            "config": {"max_tries": result.max_tries, "slack": result.slack},
        },
    }


def _result_from_doc(doc: dict, n: int, seed: int, max_tries: int, slack: float) -> PartitionResult:
    """Rebuild a PartitionResult from an emitted partition section."""
    part = doc["partition"]
    cert = part["certificates"]
    loc = cert["localization"]
    sets = tuple(CellSet(n, tuple(members)) for members in part["sets"])
    shift = cert["shift"]
    sep = cert["family"]["min_separation"]
    return PartitionResult(
        k=len(sets),
        seed=int(cert["seed"]),
        sets=sets,
        expansions=tuple(part["expansions"]),
        h_alg=part["h_alg"],
        lambda_discrete=part["lambda_discrete"],
        lambda_graphon=part["lambda_graphon"],
        upper_bound=part["bound"],
        shift=GridShift(
            k=shift["k"],
            s=shift["s"],
            w=np.asarray(shift["w"], dtype=float),
            margin=shift["margin"],
            seed=shift["seed"],
        ),
        retries_used=cert["retries_used"],
        family_accepted=cert["family"]["accepted"],
        family_masses=tuple(cert["family"]["masses"]),
        family_total_mass=cert["family"]["total_mass"],
        family_min_separation=math.inf if sep is None else sep,
        anchor_masses=tuple(cert["anchors"]["masses"]),
        localization=LocalizationReport(
            k=len(sets),
            lambda_discrete=loc["lambda_discrete"],
            bound=loc["bound"],
            rayleigh_values=tuple(loc["rayleigh"]),
            norm_sq=tuple(loc["norm_sq"]),
            lipschitz_scale=loc["lipschitz_scale"],
            lipschitz_slack=tuple(loc["lipschitz_slack"]),
        ),
        sweep_bounds=tuple(cert["sweep"]["bounds"]),
        max_tries=max_tries,
        slack=slack,
    )


def _verify_section(report) -> dict:
    return {
        "checks": [
            {
                "name": c.name,
                "lhs": c.lhs,
                "rhs": c.rhs,
                "tol": c.tol,
                "passed": c.passed,
                "slack": c.slack,
            }
            for c in report.checks
        ],
        "passed": report.passed,
    }


def _oracle_section(oracle: OracleResult) -> dict:
    return {
        "h_exact_cellwise": oracle.h_exact_cellwise,
        "witness": [list(A.members) for A in oracle.witness],
        "enumerated_count": oracle.enumerated_count,
    }


def _emit(doc: dict, out: str | None) -> None:
    text = canonical_json(doc)
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _cmd_spectrum(args, parser) -> int:
    W = _load_source(args, parser)
    spec = _spectrum_section(W, args.k)
    doc = {"input": _input_section(args, W), "spectrum": spec}
    _emit(doc, args.out)
    if args.csv:
        rows = [
            [j + 1, spec["discrete"][j], spec["graphon"][j]] for j in range(args.k)
        ]
        write_csv(args.csv, ["index", "discrete", "graphon"], rows)
    return 0


def _cmd_partition(args, parser) -> int:
    W = _load_source(args, parser)
    result = k_way_partition(
        W, args.k, args.seed, max_tries=args.max_tries, slack=args.slack
    )
    doc = {
        "input": _input_section(
            args, W, {"seed": args.seed, "max_tries": args.max_tries, "slack": args.slack}
        ),
        "spectrum": _spectrum_section(W, args.k),
        "partition": _partition_section(result),
    }
    code = 0
    if args.verify:
        report = verify_theorem(W, args.k, result)
        doc["verify"] = _verify_section(report)
        if not report.passed:
            code = 3
    _emit(doc, args.out)
    if args.csv:
        rows = [
            [i, len(A), result.expansions[i], result.sweep_bounds[i]]
            for i, A in enumerate(result.sets)
        ]
        write_csv(args.csv, ["set", "size", "expansion", "sweep_bound"], rows)
    return code


def _cmd_oracle(args, parser) -> int:
    W = _load_source(args, parser)
    oracle = brute_force_hk(W, args.k, limit=args.oracle_limit)
    doc = {
        "input": _input_section(args, W, {"oracle_limit": args.oracle_limit}),
        "oracle": _oracle_section(oracle),
    }
    _emit(doc, args.out)
    return 0


def _cmd_verify(args, parser) -> int:
    W = _load_source(args, parser)
    if args.result:
        import json as _json

        loaded = _json.loads(Path(args.result).read_text())
        result = _result_from_doc(loaded, W.n, args.seed, args.max_tries, args.slack)
        if result.k != args.k:
            parser.error(f"--result holds k = {result.k}, asked to verify k = {args.k}")
    else:
        result = k_way_partition(
            W, args.k, args.seed, max_tries=args.max_tries, slack=args.slack
        )
    oracle = None
    if (args.k + 1) ** W.n <= args.oracle_limit:
        oracle = brute_force_hk(W, args.k, limit=args.oracle_limit)
    report = verify_theorem(W, args.k, result, oracle)
    doc = {
        "input": _input_section(
            args, W, {"seed": args.seed, "max_tries": args.max_tries, "slack": args.slack}
        ),
        "spectrum": _spectrum_section(W, args.k),
        "partition": _partition_section(result),
        "verify": _verify_section(report),
    }
    if oracle is not None:
        doc["oracle"] = _oracle_section(oracle)
    _emit(doc, args.out)
    return 0 if report.passed else 3


def _cmd_sweep(args, parser) -> int:
    W = _load_source(args, parser)
    try:
        tokens = Path(args.g_values).read_text().split()
        values = np.asarray([float(t) for t in tokens], dtype=float)
    except ValueError as exc:
        raise ParseError(f"{args.g_values}: {exc}") from None
    g = VertexFunction(W.n, values)
    profile = sweep_profile(W, g)
    cut = sweep_cut(W, g)
    r = rayleigh(W, g)
    doc = {
        "input": _input_section(args, W, {"g_values": args.g_values}),
        "sweep": {
            "set": list(cut.members),
            "expansion": expansion(W, cut),
            "rayleigh": r,
            "bound": math.sqrt(2.0 * r),
            "profile": [
                {
                    "threshold": s.threshold,
                    "size": s.size,
                    "volume": s.volume,
                    "cut": s.cut,
                    "expansion": s.expansion,
                }
                for s in profile
            ],
        },
    }
    _emit(doc, args.out)
    if args.csv:
        rows = [[s.threshold, s.size, s.volume, s.cut, s.expansion] for s in profile]
        write_csv(args.csv, ["threshold", "size", "volume", "cut", "expansion"], rows)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="graphon-cheeger",
        description="Certified k-way spectral partitioning of step graphons",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    seed = _default_seed()

    p = sub.add_parser("spectrum", help="eigenvalues of the step space and graphon caps")
    _add_source_args(p)
    p.set_defaults(func=_cmd_spectrum)

    p = sub.add_parser("partition", help="run the certified partition pipeline")
    _add_source_args(p)
    p.add_argument("--seed", type=int, default=seed, help=f"shift seed (env {SEED_ENV})")
    p.add_argument("--max-tries", type=int, default=64, help="shift retry budget")
    p.add_argument("--slack", type=float, default=0.0, help="accepted mass shortfall")
    p.add_argument("--verify", action="store_true", help="append the theorem report; exit 3 on failure")
    p.set_defaults(func=_cmd_partition)

    p = sub.add_parser("oracle", help="exact cell-granularity k-way expansion constant")
    _add_source_args(p)
    p.add_argument("--oracle-limit", type=int, default=DEFAULT_ORACLE_LIMIT, help="max (k+1)^n")
    p.set_defaults(func=_cmd_oracle)

    p = sub.add_parser("verify", help="two-sided theorem report (with oracle when feasible)")
    _add_source_args(p)
    p.add_argument("--seed", type=int, default=seed, help=f"shift seed (env {SEED_ENV})")
    p.add_argument("--max-tries", type=int, default=64, help="shift retry budget")
    p.add_argument("--slack", type=float, default=0.0, help="accepted mass shortfall")
    p.add_argument("--oracle-limit", type=int, default=DEFAULT_ORACLE_LIMIT, help="max (k+1)^n")
    p.add_argument("--result", help="previously emitted partition JSON to re-verify")
    p.set_defaults(func=_cmd_verify)

    p = sub.add_parser("sweep", help="sweep cut of a function given on the cells")
    _add_source_args(p, need_k=False)
    p.add_argument("--g-values", required=True, help="file of n whitespace-separated values")
    p.set_defaults(func=_cmd_sweep)
    return parser


def run_command(argv) -> int:
    try:
        parser = build_parser()
        args = parser.parse_args(argv)
        return args.func(args, parser)
    except SystemExit as exc:  # argparse usage errors carry code 2
        return int(exc.code or 0)
    except GraphonError as exc:
        sys.stderr.write(f"error: {type(exc).__name__}: {exc}\n")
        return 1


def main() -> None:
    sys.exit(run_command(sys.argv[1:]))


if __name__ == "__main__":
    main()
