"""Command-line front end: gen, solve, relations, hardness, bench, oracle.

Exit status: 0 on success, 1 on usage errors, 2 on runtime errors and 3 when a
single ``solve`` stops at the node cap. Data goes to stdout or ``--out``;
diagnostics go to stderr.
"""

from __future__ import annotations

import argparse
import csv
import logging
import math
import sys
from pathlib import Path
from typing import Optional, Sequence

from nlsched.bench import EXPERIMENTS, HARDNESS_COLUMNS, hardness_rows, run_experiment
from nlsched.core import (BRUTE_FORCE_MAX_N, DP_MAX_N, InstanceError, SizeError, brute_force_opt,
                          dp_opt, read_instance)
from nlsched.dominance import TABLE_COLUMNS, DominanceError, PenaltyFn, Rules, build_table
from nlsched.instgen import (MAIN_BETAS, MAIN_SIGMAS, GenSpec, gen_main_grid, gen_set, gen_set_n,
                             gen_set_T, write_set)
from nlsched.search import (RESULT_COLUMNS, Direction, SolveConfig, Status, available_backends,
                            result_row, solve)

EXIT_OK, EXIT_USAGE, EXIT_RUNTIME, EXIT_NODE_CAP = 0, 1, 2, 3

log = logging.getLogger("nlsched")


class UsageError(Exception):
    pass


class Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def positive_float(text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not (value > 0 and math.isfinite(value)):
        raise argparse.ArgumentTypeError(f"must be positive and finite, got {text}")
    return value


def positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be at least 1, got {text}")
    return value


def build_parser() -> Parser:
    parser = Parser(prog="nlsched", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND", parser_class=Parser)
    sub.required = True

    g = sub.add_parser("gen", help="generate instance sets")
    g.add_argument("--set", dest="setname", choices=["main", "set-n", "set-T", "custom"],
                   default="custom", help="which set to generate (default: custom)")
    g.add_argument("--n", type=positive_int,
                   help="jobs per instance (main: 20, set-T: 25, custom: required)")
    g.add_argument("--sigma", type=positive_float, nargs="+",
                   help="sigma values (main: 0.1..1.0; custom: exactly one)")
    g.add_argument("--beta", type=positive_float, nargs="+",
                   help="beta values the weights are drawn for (main: 0.5..3.2; custom: one)")
    g.add_argument("--count", type=positive_int,
                   help="instances per cell (main: 25, set-n: 10, set-T: 3, custom: 1)")
    g.add_argument("--seed", type=int, default=0, help="master seed (default: 0)")
    g.add_argument("--out", type=Path, required=True, metavar="DIR",
                   help="output directory; files go to DIR/sets and DIR/manifest.csv")

    s = sub.add_parser("solve", help="solve one instance exactly")
    s.add_argument("--instance", type=Path, required=True, metavar="FILE", help="instance file")
    s.add_argument("--beta", type=positive_float, required=True, help="cost exponent")
    s.add_argument("--direction", choices=[d.value for d in Direction], default="auto",
                   help="search direction (default: auto)")
    s.add_argument("--rules", choices=[r.value for r in Rules], default="all",
                   help="dominance rules used for pruning (default: all)")
    s.add_argument("--node-cap", type=positive_int, default=1_000_000,
                   help="stop after this many generated nodes (default: 1000000)")
    s.add_argument("--backend", choices=["cython", "python"],
                   help="search kernel (default: compiled when available)")
    s.add_argument("--no-timing", action="store_true",
                   help="leave wall_ms empty so output is reproducible byte for byte")

    r = sub.add_parser("relations", help="write the pairwise dominance table as CSV")
    r.add_argument("--instance", type=Path, required=True, metavar="FILE", help="instance file")
    r.add_argument("--beta", type=positive_float, required=True, help="cost exponent")
    r.add_argument("--rules", choices=[x.value for x in Rules], default="all",
                   help="rule families to evaluate (default: all)")
    r.add_argument("--out", type=Path, metavar="FILE", help="output CSV (default: stdout)")

    h = sub.add_parser("hardness", help="fraction of globally ordered pairs per instance")
    h.add_argument("--dir", type=Path, required=True, metavar="DIR",
                   help="directory searched recursively for *.inst files")
    h.add_argument("--beta", type=positive_float, required=True, help="cost exponent")
    h.add_argument("--out", type=Path, metavar="FILE", help="output CSV (default: stdout)")

    b = sub.add_parser("bench", help="run an experiment grid")
    b.add_argument("--experiment", choices=EXPERIMENTS, required=True, help="experiment name")
    b.add_argument("--dir", type=Path, required=True, metavar="DIR",
                   help="instance directory; missing instances are generated there")
    b.add_argument("--beta-grid", type=positive_float, nargs="+", default=list(MAIN_BETAS),
                   help="beta values to run (default: 0.5 0.8 ... 3.2)")
    b.add_argument("--out", type=Path, required=True, metavar="DIR",
                   help="results directory; one CSV per experiment")
    b.add_argument("--full", action="store_true",
                   help="full grid (n=20, 25 per cell) instead of the desk grid (n=16, 5 per cell)")
    b.add_argument("--plot-data", action="store_true",
                   help="also write aggregated plot_<experiment>.csv with x, y, series columns")
    b.add_argument("--seed", type=int, default=0, help="master seed (default: 0)")
    b.add_argument("--workers", type=positive_int, default=1,
                   help="worker processes (default: 1)")
    b.add_argument("--node-cap", type=positive_int, default=1_000_000,
                   help="node cap per solve (default: 1000000)")

    o = sub.add_parser("oracle", help="exhaustive optimum for cross-checking")
    o.add_argument("--instance", type=Path, required=True, metavar="FILE", help="instance file")
    o.add_argument("--beta", type=positive_float, required=True, help="cost exponent")
    o.add_argument("--method", choices=["perm", "dp"], default="dp",
                   help=f"perm: all permutations (n <= {BRUTE_FORCE_MAX_N}); "
                        f"dp: subset recursion (n <= {DP_MAX_N}) (default: dp)")
    o.add_argument("--check", action="store_true",
                   help="also run solve and fail with status 2 on a cost mismatch")
    return parser


def _open_out(path: Optional[Path]):
    if path is None:
        return sys.stdout
    path.parent.mkdir(parents=True, exist_ok=True)
    return path.open("w", newline="")


def _write_csv(path: Optional[Path], header: list, rows: list) -> None:
    fh = _open_out(path)
    try:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)
    finally:
        if fh is not sys.stdout:
            fh.close()


def cmd_gen(args) -> int:
    n, sigmas, betas, count = args.n, args.sigma, args.beta, args.count
    if args.setname == "custom":
        if n is None or sigmas is None or betas is None:
            raise UsageError("--set custom needs --n, --sigma and --beta")
        if len(sigmas) != 1 or len(betas) != 1:
            raise UsageError("--set custom takes exactly one --sigma and one --beta")
        spec = GenSpec(n, betas[0], sigmas[0], args.seed, count or 1)
        instances = gen_set(spec)
    elif args.setname == "main":
        instances = gen_main_grid(args.seed, n or 20, count or 25, betas or MAIN_BETAS,
                                  sigmas or MAIN_SIGMAS)
    elif args.setname == "set-n":
        if sigmas or betas:
            raise UsageError("set-n is fixed at beta=2, sigma=0.5")
        sizes = range(1, (n or 35) + 1)
        instances = gen_set_n(args.seed, sizes, count or 10)
    else:
        if betas:
            raise UsageError("set-T is fixed at beta=2")
        instances = gen_set_T(args.seed, n or 25, count or 3, sigmas)
    manifest = write_set(instances, args.out)
    log.info("wrote %d instances; manifest %s", len(instances), manifest)
    return EXIT_OK


def cmd_solve(args) -> int:
    if args.backend and args.backend not in available_backends():
        raise UsageError(f"backend {args.backend!r} is not available")
    inst = read_instance(args.instance)
    config = SolveConfig(Direction(args.direction), Rules(args.rules), args.node_cap)
    res = solve(inst, PenaltyFn(args.beta), config, backend=args.backend)
    _write_csv(None, RESULT_COLUMNS, [result_row(inst, args.beta, res, not args.no_timing)])
    if res.status is Status.NODE_CAP:
        print(f"node cap of {args.node_cap} reached", file=sys.stderr)
        return EXIT_NODE_CAP
    labels = inst.labels()
    print("# schedule: " + " ".join(labels[k] for k in res.schedule.order))
    return EXIT_OK


def cmd_relations(args) -> int:
    inst = read_instance(args.instance)
    table = build_table(inst, PenaltyFn(args.beta), Rules(args.rules))
    _write_csv(args.out, TABLE_COLUMNS, list(table.csv_rows()))
    return EXIT_OK


def cmd_hardness(args) -> int:
    if not args.dir.is_dir():
        raise UsageError(f"--dir {args.dir} is not a directory")
    paths = sorted(args.dir.rglob("*.inst"))
    if not paths:
        raise UsageError(f"no .inst files under {args.dir}")
    _write_csv(args.out, HARDNESS_COLUMNS, hardness_rows(paths, args.beta))
    return EXIT_OK


def cmd_bench(args) -> int:
    path = run_experiment(args.experiment, args.dir, args.out, args.beta_grid, args.full,
                          args.plot_data, args.seed, args.workers, args.node_cap)
    print(path)
    return EXIT_OK


def cmd_oracle(args) -> int:
    inst = read_instance(args.instance)
    if args.method == "perm":
        schedule, cost = brute_force_opt(inst, args.beta)
        labels = inst.labels()
        print(f"{cost!r}")
        print("# schedule: " + " ".join(labels[k] for k in schedule.order))
    else:
        cost = dp_opt(inst, args.beta)
        print(f"{cost!r}")
    if args.check:
        res = solve(inst, PenaltyFn(args.beta))
        if res.status is not Status.OPTIMAL:
            print("solve stopped at the node cap", file=sys.stderr)
            return EXIT_RUNTIME
        if abs(res.cost - cost) > 1e-9 * max(1.0, abs(cost)):
            print(f"mismatch: oracle {cost!r}, solve {res.cost!r}", file=sys.stderr)
            return EXIT_RUNTIME
    return EXIT_OK


COMMANDS = dict(gen=cmd_gen, solve=cmd_solve, relations=cmd_relations, hardness=cmd_hardness,
                bench=cmd_bench, oracle=cmd_oracle)


def run(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"nlsched {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (InstanceError, SizeError, DominanceError, OSError, ValueError, RuntimeError) as exc:
        print(f"nlsched {args.command}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
