"""Compare the compiled and pure-Python search kernels on the same instances.

Usage: python benchmarks/bench_backends.py [--n 12] [--count 5] [--beta 2.0] [--repeat 3]

Both kernels must return the same cost and node counts; the script exits 1
on any disagreement and prints per-backend best-of-repeat times otherwise.
"""

import argparse
import sys
import time

from nlsched.dominance import PenaltyFn, Rules, build_table
from nlsched.instgen import GenSpec, gen_set
from nlsched.search import Direction, SolveConfig, available_backends, solve


def best_time(instance, fn, config, table, backend, repeat):
    best, result = float("inf"), None
    for _ in range(repeat):
        start = time.perf_counter()
        result = solve(instance, fn, config, backend=backend, table=table)
        best = min(best, time.perf_counter() - start)
    return best, result


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--n", type=int, default=12, help="jobs per instance (default: 12)")
    parser.add_argument("--count", type=int, default=5, help="instances (default: 5)")
    parser.add_argument("--beta", type=float, default=2.0, help="cost exponent (default: 2.0)")
    parser.add_argument("--sigma", type=float, default=0.5, help="ratio spread (default: 0.5)")
    parser.add_argument("--rules", choices=[r.value for r in Rules], default="local",
                        help="pruning rules (default: local)")
    parser.add_argument("--repeat", type=int, default=3, help="timed runs per solve (default: 3)")
    parser.add_argument("--seed", type=int, default=0, help="generator seed (default: 0)")
    args = parser.parse_args(argv)

    if "cython" not in available_backends():
        print("compiled kernel not built; nothing to compare", file=sys.stderr)
        return 1
    fn = PenaltyFn(args.beta)
    config = SolveConfig(Direction.AUTO, Rules(args.rules))
    instances = gen_set(GenSpec(args.n, args.beta, args.sigma, args.seed, args.count))
    totals = {"cython": 0.0, "python": 0.0}
    print(f"{'instance':<16}{'nodes':>10}{'cython_ms':>12}{'python_ms':>12}{'speedup':>10}")
    for inst in instances:
        table = build_table(inst, fn, config.rules)
        tc, rc = best_time(inst, fn, config, table, "cython", args.repeat)
        tp, rp = best_time(inst, fn, config, table, "python", args.repeat)
        if (rc.cost, rc.stats) != (rp.cost, rp.stats):
            print(f"{inst.name}: kernels disagree: {rc.cost}/{rc.stats} vs {rp.cost}/{rp.stats}",
                  file=sys.stderr)
            return 1
        totals["cython"] += tc
        totals["python"] += tp
        print(f"{inst.name:<16}{rc.stats.nodes_generated:>10}{tc * 1e3:>12.2f}{tp * 1e3:>12.2f}"
              f"{tp / tc:>10.1f}")
    print(f"{'total':<16}{'':>10}{totals['cython'] * 1e3:>12.2f}{totals['python'] * 1e3:>12.2f}"
          f"{totals['python'] / totals['cython']:>10.1f}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
