"""``memslab`` command line: sweeps, ensembles, figure data, verification, teleportation oracle.

Exit codes: 0 success, 1 verification or runtime failure, 2 usage error.
"""
from __future__ import annotations

import argparse
import json
import sys
from typing import Optional, Sequence

from . import checks, ensemble, families, measures, pipeline, telesim

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _u64(text: str) -> int:
    try:
        value = int(text, 0)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}")
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must fit in an unsigned 64-bit integer")
    return value


def _positive(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return value


def build_parser() -> argparse.ArgumentParser:
    tokens = [f.value for f in families.FamilyId]
    parser = argparse.ArgumentParser(prog="memslab", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sweep", help="measure a state family on a parameter grid")
    p.add_argument("--family", required=True, choices=tokens)
    p.add_argument("--p-min", type=float, default=0.0)
    p.add_argument("--p-max", type=float, default=1.0)
    p.add_argument("--steps", type=int, default=101)
    p.add_argument("--out", required=True)

    p = sub.add_parser("ensemble", help="generate random MEMS of one rank")
    p.add_argument("--rank", type=int, required=True, choices=(2, 3, 4))
    p.add_argument("--count", type=_positive, required=True)
    p.add_argument("--seed", type=_u64, required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--workers", type=_positive, default=1, help="threads; output does not depend on it")

    p = sub.add_parser("figures", help="write plot-ready data for fig1..fig4")
    p.add_argument("--id", dest="figure_id", required=True, choices=tuple(pipeline.FIGURE_AXES))
    p.add_argument("--in", dest="inputs", nargs="*", default=[],
                   help="sweep CSVs (fig1/fig2, optional) or ensemble CSVs (fig3/fig4)")
    p.add_argument("--out", required=True)
    p.add_argument("--subsample", type=_positive, default=None)
    p.add_argument("--seed", type=_u64, default=0)
    p.add_argument("--wide", action="store_true", help="use rho2 on [0, 1] instead of its MEMS range")

    sub.add_parser("verify", help="run the acceptance checks")

    p = sub.add_parser("telesim", help="compare the fidelity formula against simulated teleportation")
    p.add_argument("--family", required=True, choices=tokens)
    p.add_argument("--p", type=float, default=None)
    p.add_argument("--mode", choices=("exact", "mc"), default="exact")
    p.add_argument("--samples", type=int, default=100_000)
    p.add_argument("--seed", type=_u64, default=1)
    p.add_argument("--json", action="store_true")
    return parser


def cmd_sweep(args) -> int:
    rows = pipeline.sweep(args.family, args.p_min, args.p_max, args.steps)
    pipeline.write_sweep_csv(rows, args.out)
    print(f"wrote {len(rows)} rows to {args.out}")
    return EXIT_OK


def cmd_ensemble(args) -> int:
    csv_path, manifest_path = ensemble.write_ensemble(args.rank, args.count, args.seed, args.out,
                                                      workers=args.workers)
    print(f"wrote {args.count} rank-{args.rank} states to {csv_path} (manifest {manifest_path})")
    return EXIT_OK


def cmd_figures(args) -> int:
    ds = pipeline.build_figure(args.figure_id, args.inputs, k=args.subsample, seed=args.seed, wide=args.wide)
    paths = ds.write(args.out)
    print("wrote " + ", ".join(str(p) for p in paths))
    return EXIT_OK


def cmd_verify(args) -> int:
    results = checks.run_all(echo=print)
    failed = [r for r in results if not r.passed]
    print(f"{len(results) - len(failed)}/{len(results)} checks passed")
    return EXIT_FAIL if failed else EXIT_OK


def cmd_telesim(args) -> int:
    fid = families.FamilyId(args.family)
    if fid in families.PARAMETRIC and args.p is None:
        raise UsageError(f"--p is required for family {fid.value}")
    rho = families.make_state(fid, args.p)
    analytic = measures.opt_fidelity(rho)
    table, _ = telesim.optimize_corrections(rho)
    if args.mode == "exact":
        rep = telesim.exact_teleport(rho, table)
    else:
        rep = telesim.mc_teleport(rho, table, args.samples, args.seed)
    report = {
        "family": fid.value,
        "p": args.p,
        "analytic_f": analytic,
        "oracle_f": rep.avg_fidelity,
        "gap": rep.avg_fidelity - analytic,
        "method": rep.method,
        "corrections": table.as_dict(),
        "fef_f": (2.0 * telesim.fully_entangled_fraction(rho) + 1.0) / 3.0,
    }
    if rep.method == "monte-carlo":
        report["n_samples"] = rep.n_samples
        report["std_error"] = rep.std_error
    if args.json:
        print(json.dumps(report, indent=2))
    else:
        for key, value in report.items():
            print(f"{key:12s} {value}")
    return EXIT_OK


COMMANDS = {
    "sweep": cmd_sweep,
    "ensemble": cmd_ensemble,
    "figures": cmd_figures,
    "verify": cmd_verify,
    "telesim": cmd_telesim,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return COMMANDS[args.command](args)
    except (UsageError, ValueError, FileNotFoundError) as exc:
        print(f"memslab {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"memslab {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
