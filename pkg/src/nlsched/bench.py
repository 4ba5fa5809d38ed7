"""Experiment drivers: hardness, direction comparison, solve rate, improvement
factor and node growth with n.

Every experiment writes one row per solve to ``<out>/<experiment>.csv``.
Re-running with the same arguments skips rows that are already present, so
interrupted grids resume where they stopped. Aggregates exclude runs that hit
the node cap and report how many were excluded.
"""

from __future__ import annotations

import csv
import logging
from collections import defaultdict
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Optional

from nlsched.core import Instance, read_instance
from nlsched.dominance import PenaltyFn, Prec, Rules, build_table
from nlsched.instgen import (MAIN_BETAS, MAIN_SIGMAS, gen_main_grid, gen_set_n, gen_set_T,
                             set_t_sigmas, write_set)
from nlsched.search import Direction, SolveConfig, Status, resolve_direction, solve

log = logging.getLogger(__name__)

DESK = dict(n=16, per_cell=5, sizes=range(1, 15), by_n_count=10, set_n_sizes=range(1, 21),
            set_t_sigmas=[round(0.1 + 0.05 * k, 3) for k in range(19)])
FULL = dict(n=20, per_cell=25, sizes=range(1, 31), by_n_count=100, set_n_sizes=range(1, 36),
            set_t_sigmas=set_t_sigmas())

EXPERIMENTS = ("solve-rate", "direction", "improvement", "nodes-by-n", "set-n", "set-T")


@dataclass
class ExperimentRecord:
    experiment: str
    beta: float
    sigma: Optional[float]
    n: int
    instance: str
    direction: str
    rules: str
    nodes_generated: int
    nodes_expanded: int
    status: str
    cost: Optional[float]
    wall_ms: Optional[float]

    @property
    def key(self) -> tuple:
        return (self.experiment, self.instance, repr(self.beta), self.direction, self.rules)

    @property
    def solved(self) -> bool:
        return self.status == Status.OPTIMAL.value

    def to_row(self) -> list:
        return [
            self.experiment, repr(self.beta), "" if self.sigma is None else repr(self.sigma),
            self.n, self.instance, self.direction, self.rules, self.nodes_generated,
            self.nodes_expanded, self.status, "" if self.cost is None else repr(self.cost),
            "" if self.wall_ms is None else f"{self.wall_ms:.3f}",
        ]

    @classmethod
    def from_row(cls, row: dict) -> "ExperimentRecord":
        return cls(
            row["experiment"], float(row["beta"]),
            float(row["sigma"]) if row["sigma"] else None, int(row["n"]), row["instance"],
            row["direction"], row["rules"], int(row["nodes_generated"]),
            int(row["nodes_expanded"]), row["status"],
            float(row["cost"]) if row["cost"] else None,
            float(row["wall_ms"]) if row["wall_ms"] else None,
        )


RECORD_COLUMNS = list(ExperimentRecord.__dataclass_fields__)


class RecordLog:
    """Append-only CSV of ExperimentRecords keyed by (experiment, instance, beta, direction, rules)."""

    def __init__(self, path: str | Path):
        self.path = Path(path)
        self.records: dict[tuple, ExperimentRecord] = {}
        if self.path.exists():
            with self.path.open(newline="") as fh:
                for row in csv.DictReader(fh):
                    rec = ExperimentRecord.from_row(row)
                    self.records[rec.key] = rec

    def __contains__(self, key) -> bool:
        return key in self.records

    def append(self, records: Iterable[ExperimentRecord]) -> None:
        records = [r for r in records if r.key not in self.records]
        if not records:
            return
        self.path.parent.mkdir(parents=True, exist_ok=True)
        new = not self.path.exists()
        with self.path.open("a", newline="") as fh:
            writer = csv.writer(fh)
            if new:
                writer.writerow(RECORD_COLUMNS)
            for rec in records:
                writer.writerow(rec.to_row())
                self.records[rec.key] = rec


def instance_sigma(instance: Instance) -> Optional[float]:
    raw = instance.meta.get("sigma")
    return float(raw) if raw else None


def _run_one(task) -> ExperimentRecord:
    experiment, instance, beta, direction, rules, node_cap, timing = task
    res = solve(instance, PenaltyFn(beta), SolveConfig(direction, rules, node_cap))
    return ExperimentRecord(
        experiment, beta, instance_sigma(instance), instance.n, instance.name,
        res.direction.value, rules.value, res.stats.nodes_generated, res.stats.nodes_expanded,
        res.status.value, res.cost, res.wall_ms if timing else None,
    )


def run_solves(experiment: str, instances: list[Instance], beta: float,
               configs: list[tuple[Direction, Rules]], node_cap: int = 1_000_000,
               log_file: Optional[RecordLog] = None, workers: int = 1,
               timing: bool = True) -> list[ExperimentRecord]:
    """Solve every instance under every (direction, rules) pair, reusing logged rows."""
    tasks, results = [], {}
    for inst in instances:
        for direction, rules in configs:
            d = resolve_direction(direction, rules, beta)
            key = (experiment, inst.name, repr(beta), d.value, rules.value)
            if log_file is not None and key in log_file:
                results[key] = log_file.records[key]
            else:
                tasks.append((experiment, inst, beta, d, rules, node_cap, timing))
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(workers) as pool:
            fresh = list(pool.map(_run_one, tasks, chunksize=4))
    else:
        fresh = [_run_one(t) for t in tasks]
    if log_file is not None:
        log_file.append(fresh)
    for rec in fresh:
        results[rec.key] = rec
    out = []
    for inst in instances:
        for direction, rules in configs:
            d = resolve_direction(direction, rules, beta)
            out.append(results[(experiment, inst.name, repr(beta), d.value, rules.value)])
    return out


def _by_sigma(records: Iterable[ExperimentRecord]) -> dict:
    cells = defaultdict(list)
    for rec in records:
        cells[rec.sigma].append(rec)
    return dict(sorted(cells.items(), key=lambda kv: (kv[0] is None, kv[0] or 0.0)))


# -- hardness --------------------------------------------------------------

def hardness(instance: Instance, fn: PenaltyFn, rules: Rules = Rules.NEW) -> float:
    """Fraction of job pairs ordered in some direction over [0, t1].

    ``t1`` is the total processing time without the pair. Pairs count when a
    full global order is known, or a head-interval order covers [0, t1].
    """
    n = instance.n
    if n < 2:
        raise ValueError("hardness needs at least two jobs")
    table = build_table(instance, fn, rules)
    total = instance.total_time
    count = 0
    for (i, j), rel in table.relations.items():
        if rel.full_global is not Prec.NONE:
            count += 1
        elif rel.head_interval is not None:
            t1 = total - instance.jobs[i].p - instance.jobs[j].p
            if rel.head_interval[1] >= t1:
                count += 1
    return count / (n * (n - 1) / 2)


def hardness_by_sigma(instances: list[Instance], fn: PenaltyFn,
                      rules: Rules = Rules.NEW) -> dict[float, float]:
    cells = defaultdict(list)
    for inst in instances:
        cells[instance_sigma(inst)].append(hardness(inst, fn, rules))
    return {s: sum(v) / len(v) for s, v in sorted(cells.items())}


# -- experiments over solve records ---------------------------------------

@dataclass
class CellValue:
    value: Optional[float]
    used: int
    excluded: int


def direction_compare(instances: list[Instance], fn: PenaltyFn, rules: Rules,
                      node_cap: int = 1_000_000, log_file: Optional[RecordLog] = None,
                      workers: int = 1) -> dict[float, CellValue]:
    """Per sigma, the fraction of instances where forward generated fewer nodes.

    Ties count as not fewer; instances where either variant hit the cap are skipped.
    """
    recs = run_solves("direction", instances, fn.beta,
                      [(Direction.FORWARD, rules), (Direction.BACKWARD, rules)],
                      node_cap, log_file, workers)
    out = {}
    pairs = list(zip(recs[0::2], recs[1::2]))
    cells = defaultdict(list)
    for fwd, bwd in pairs:
        cells[fwd.sigma].append((fwd, bwd))
    for sigma, items in sorted(cells.items()):
        ok = [(f, b) for f, b in items if f.solved and b.solved]
        wins = sum(f.nodes_generated < b.nodes_generated for f, b in ok)
        out[sigma] = CellValue(wins / len(ok) if ok else None, len(ok), len(items) - len(ok))
    return out


def solve_rate(instances: list[Instance], fn: PenaltyFn, config: SolveConfig,
               log_file: Optional[RecordLog] = None, workers: int = 1) -> dict[float, CellValue]:
    recs = run_solves("solve-rate", instances, fn.beta, [(config.direction, config.rules)],
                      config.node_cap, log_file, workers)
    out = {}
    for sigma, items in _by_sigma(recs).items():
        solved = sum(r.solved for r in items)
        out[sigma] = CellValue(solved / len(items), len(items), 0)
    return out


def baseline_rules(beta: float) -> Rules:
    """Rule set the new rules are compared against."""
    return Rules.MSHJ if beta == 2.0 else Rules.LOCAL


def improvement_factor(instances: list[Instance], fn: PenaltyFn, node_cap: int = 1_000_000,
                       log_file: Optional[RecordLog] = None, workers: int = 1,
                       experiment: str = "improvement",
                       group=instance_sigma) -> dict:
    """Per cell, mean generated nodes with all rules over mean with the baseline.

    Both runs use the direction chosen for the full rule set. Instances the
    baseline cannot finish within the cap are excluded; empty cells map to a
    CellValue whose value is None.
    """
    direction = resolve_direction(Direction.AUTO, Rules.ALL, fn.beta)
    base = baseline_rules(fn.beta)
    recs = run_solves(experiment, instances, fn.beta,
                      [(direction, Rules.ALL), (direction, base)], node_cap, log_file, workers)
    cells = defaultdict(list)
    for inst, (new, old) in zip(instances, zip(recs[0::2], recs[1::2])):
        cells[group(inst)].append((new, old))
    out = {}
    for key, items in sorted(cells.items()):
        ok = [(a, b) for a, b in items if b.solved and a.solved]
        if ok:
            num = sum(a.nodes_generated for a, _ in ok) / len(ok)
            den = sum(b.nodes_generated for _, b in ok) / len(ok)
            out[key] = CellValue(num / den, len(ok), len(items) - len(ok))
        else:
            out[key] = CellValue(None, 0, len(items))
    return out


def nodes_by_n(sizes: Iterable[int], sigma: float, fn: PenaltyFn, count: int, seed: int = 0,
               node_cap: int = 1_000_000, log_file: Optional[RecordLog] = None,
               workers: int = 1) -> dict[int, CellValue]:
    """Average generated nodes over solved instances, all rules, automatic direction."""
    out = {}
    for n in sizes:
        insts = gen_main_grid(seed, n=n, per_cell=count, betas=[fn.beta], sigmas=[sigma],
                              setname="by-n")
        recs = run_solves("nodes-by-n", insts, fn.beta, [(Direction.AUTO, Rules.ALL)],
                          node_cap, log_file, workers)
        ok = [r.nodes_generated for r in recs if r.solved]
        out[n] = CellValue(sum(ok) / len(ok) if ok else None, len(ok), len(recs) - len(ok))
    return out


# -- grid driver -----------------------------------------------------------

def load_or_generate(inst_dir: Path, make) -> list[Instance]:
    """Instances built by ``make``, written under ``inst_dir/sets`` if absent and read back."""
    wanted = make()
    missing = [i for i in wanted if not (inst_dir / "sets" / f"{i.name}.inst").exists()]
    if missing:
        write_set(missing, inst_dir)
    return [read_instance(inst_dir / "sets" / f"{i.name}.inst") for i in wanted]


def _write_plot(path: Path, rows: list[list]) -> None:
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["x", "y", "series", "used", "excluded"])
        writer.writerows(rows)


def _fmt(v: Optional[float]) -> str:
    return "" if v is None else repr(v)


def run_experiment(experiment: str, inst_dir: str | Path, out_dir: str | Path,
                   betas: Iterable[float] = MAIN_BETAS, full: bool = False,
                   plot_data: bool = False, seed: int = 0, workers: int = 1,
                   node_cap: int = 1_000_000) -> Path:
    if experiment not in EXPERIMENTS:
        raise ValueError(f"unknown experiment {experiment!r}")
    scale = FULL if full else DESK
    inst_dir, out_dir = Path(inst_dir), Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    records = RecordLog(out_dir / f"{experiment}.csv")
    plot = []
    betas = list(betas)

    def grid(beta):
        return load_or_generate(
            inst_dir,
            lambda: gen_main_grid(seed, scale["n"], scale["per_cell"], [beta], MAIN_SIGMAS))

    if experiment == "solve-rate":
        for beta in betas:
            fn = PenaltyFn(beta)
            insts = grid(beta)
            for rules in dict.fromkeys((Rules.ALL, baseline_rules(beta), Rules.NONE)):
                cells = solve_rate(insts, fn, SolveConfig(Direction.AUTO, rules, node_cap),
                                   records, workers)
                series = f"beta={beta:g},rules={rules.value}"
                plot += [[s, _fmt(c.value), series, c.used, c.excluded] for s, c in cells.items()]
    elif experiment == "direction":
        for beta in betas:
            fn = PenaltyFn(beta)
            insts = grid(beta)
            for rules in (Rules.NONE, Rules.ALL):
                cells = direction_compare(insts, fn, rules, node_cap, records, workers)
                series = f"beta={beta:g},rules={rules.value}"
                plot += [[s, _fmt(c.value), series, c.used, c.excluded] for s, c in cells.items()]
    elif experiment == "improvement":
        for beta in betas:
            fn = PenaltyFn(beta)
            cells = improvement_factor(grid(beta), fn, node_cap, records, workers)
            plot += [[s, _fmt(c.value), f"beta={beta:g}", c.used, c.excluded]
                     for s, c in cells.items()]
    elif experiment == "nodes-by-n":
        for beta in betas:
            fn = PenaltyFn(beta)
            for sigma in (0.1, 0.5):
                cells = nodes_by_n(scale["sizes"], sigma, fn, scale["by_n_count"], seed,
                                   node_cap, records, workers)
                series = f"beta={beta:g},sigma={sigma:g}"
                plot += [[n, _fmt(c.value), series, c.used, c.excluded] for n, c in cells.items()]
    elif experiment == "set-n":
        insts = load_or_generate(inst_dir, lambda: gen_set_n(seed, scale["set_n_sizes"]))
        cells = improvement_factor(insts, PenaltyFn(2.0), node_cap, records, workers,
                                   experiment, group=lambda i: i.n)
        plot += [[n, _fmt(c.value), "set-n", c.used, c.excluded] for n, c in cells.items()]
    elif experiment == "set-T":
        insts = load_or_generate(inst_dir, lambda: gen_set_T(seed, sigmas=scale["set_t_sigmas"]))
        cells = improvement_factor(insts, PenaltyFn(2.0), node_cap, records, workers,
                                   experiment)
        plot += [[s, _fmt(c.value), "set-T", c.used, c.excluded] for s, c in cells.items()]
    if plot_data:
        _write_plot(out_dir / f"plot_{experiment}.csv", plot)
    log.info("%s: %d records in %s", experiment, len(records.records), records.path)
    return records.path


def hardness_rows(paths: Iterable[Path], beta: float, rules: Rules = Rules.NEW) -> list[list]:
    fn = PenaltyFn(beta)
    rows = []
    for path in paths:
        inst = read_instance(path)
        sigma = instance_sigma(inst)
        rows.append([inst.name, inst.n, "" if sigma is None else repr(sigma), repr(beta),
                     repr(hardness(inst, fn, rules))])
    return rows


HARDNESS_COLUMNS = ["instance", "n", "sigma", "beta", "hardness"]
