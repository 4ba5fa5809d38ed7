"""Exact A* over the 2^n job-subset lattice, forward or backward, with pruning.

The hot loop lives in a compiled kernel (``_castar``) when it was built, and
in ``_pyastar`` otherwise. Set ``NLSCHED_PURE_PYTHON=1`` to force the
fallback.
"""

from __future__ import annotations

import enum
import math
import os
import time
from dataclasses import dataclass
from typing import Optional

from nlsched.core import Instance, Schedule, evaluate
from nlsched.dominance import MARGIN, DominanceTable, PenaltyFn, Rules, build_table
from nlsched.search import _pyastar

try:
    if os.environ.get("NLSCHED_PURE_PYTHON"):
        raise ImportError("pure Python requested")
    from nlsched.search import _castar
except ImportError:
    _castar = None

BACKEND = "cython" if _castar is not None else "python"
MAX_JOBS = 64
DEFAULT_NODE_CAP = 1_000_000


def _kernel(name: Optional[str]):
    name = name or BACKEND
    if name == "cython":
        if _castar is None:
            raise RuntimeError("compiled kernel not available; build the extension first")
        return _castar.astar
    if name == "python":
        return _pyastar.astar
    raise ValueError(f"unknown backend {name!r}")


def available_backends() -> list[str]:
    return ["cython", "python"] if _castar is not None else ["python"]


class Direction(enum.Enum):
    FORWARD = "forward"
    BACKWARD = "backward"
    AUTO = "auto"


class Status(enum.Enum):
    OPTIMAL = "Optimal"
    NODE_CAP = "NodeCapExceeded"


def resolve_direction(direction: Direction, rules: Rules, beta: float) -> Direction:
    """Pick the variant that tends to generate fewer nodes for this beta and rule set."""
    if direction is not Direction.AUTO:
        return direction
    if rules.use_new:
        forward = beta > 1.0
    else:
        forward = beta < 1.0 or beta == 2.0
    return Direction.FORWARD if forward else Direction.BACKWARD


@dataclass(frozen=True)
class SolveConfig:
    direction: Direction = Direction.AUTO
    rules: Rules = Rules.ALL
    node_cap: int = DEFAULT_NODE_CAP

    def __post_init__(self):
        if self.node_cap < 1:
            raise ValueError(f"node_cap must be positive, got {self.node_cap}")


@dataclass(frozen=True)
class SearchStats:
    nodes_generated: int
    nodes_expanded: int
    max_queue: int


@dataclass(frozen=True)
class SolveResult:
    schedule: Optional[Schedule]
    cost: Optional[float]
    stats: SearchStats
    status: Status
    direction: Direction
    rules: Rules
    wall_ms: float = 0.0


RESULT_COLUMNS = ["instance", "beta", "direction", "rules", "status", "cost",
                  "nodes_generated", "nodes_expanded", "max_queue", "wall_ms"]


def result_row(instance: Instance, beta: float, result: SolveResult, timing: bool = True) -> list:
    return [
        instance.name, repr(beta), result.direction.value, result.rules.value,
        result.status.value, "" if result.cost is None else repr(result.cost),
        result.stats.nodes_generated, result.stats.nodes_expanded, result.stats.max_queue,
        f"{result.wall_ms:.3f}" if timing else "",
    ]


def interval_tol(t: float) -> float:
    return 1e-9 + 1e-12 * abs(t)


def _kernel_inputs(table: DominanceTable):
    rules = table.rules
    head = table.head_times()
    tail = table.tail_times()
    # shift thresholds inward so bisection error can only cost pruning power
    head_eff = [[t - interval_tol(t) if math.isfinite(t) else t for t in row] for row in head]
    tail_eff = [[t + interval_tol(t) if math.isfinite(t) else t for t in row] for row in tail]
    return dict(
        use_local=rules.use_local,
        margin=MARGIN,
        before=table.before_masks(),
        after=table.after_masks(),
        head_eff=head_eff,
        tail_eff=tail_eff,
    )


def solve(instance: Instance, fn: PenaltyFn, config: SolveConfig = SolveConfig(),
          backend: Optional[str] = None, check_consistency: bool = False,
          table: Optional[DominanceTable] = None) -> SolveResult:
    """Optimal schedule by A*; stops with NODE_CAP status past ``config.node_cap`` nodes."""
    if instance.n > MAX_JOBS:
        raise ValueError(f"search supports at most {MAX_JOBS} jobs, got {instance.n}")
    direction = resolve_direction(config.direction, config.rules, fn.beta)
    start = time.perf_counter()
    if table is None:
        table = build_table(instance, fn, config.rules)
    elif table.rules is not config.rules:
        raise ValueError("dominance table was built for a different rule set")
    k = _kernel_inputs(table)
    order, _, generated, expanded, max_queue, capped = _kernel(backend)(
        instance.p, instance.w, fn.beta, direction is Direction.FORWARD,
        k["use_local"], k["margin"], k["before"], k["after"], k["head_eff"], k["tail_eff"],
        config.node_cap, check_consistency)
    wall_ms = (time.perf_counter() - start) * 1000.0
    stats = SearchStats(generated, expanded, max_queue)
    if capped:
        return SolveResult(None, None, stats, Status.NODE_CAP, direction, config.rules, wall_ms)
    schedule = Schedule.of(order, instance)
    return SolveResult(schedule, evaluate(schedule, instance, fn.beta), stats, Status.OPTIMAL,
                       direction, config.rules, wall_ms)


def lower_bound(subset: int, elapsed: float, direction: Direction, instance: Instance,
                fn: PenaltyFn) -> float:
    """Admissible bound on the cost still to pay from a lattice node.

    Backward: ``subset`` holds the unplaced jobs occupying [0, t1]; ``elapsed``
    is unused. Forward: ``subset`` is the placed prefix of length ``elapsed``
    and the bound covers the jobs outside it.
    """
    total = 0.0
    for k, job in enumerate(instance.jobs):
        inside = (subset >> k) & 1
        if direction is Direction.BACKWARD and inside:
            total += job.w * job.p ** fn.beta
        elif direction is Direction.FORWARD and not inside:
            total += job.w * (elapsed + job.p) ** fn.beta
    return total


def prune_backward(subset: int, label: Optional[int], i: int, t1: float,
                   table: DominanceTable) -> bool:
    """Whether the arc placing job ``i`` last in ``subset`` (just before ``label``) is cut."""
    if table.rules is Rules.NONE:
        return False
    k = _kernel_inputs(table)
    head_lists = [[(c, k["head_eff"][r][c]) for c in range(table.n)
                   if k["head_eff"][r][c] != -math.inf] for r in range(table.n)]
    p = [j.p for j in table.jobs]
    w = [j.w for j in table.jobs]
    return _pyastar.pruned_backward(subset, -1 if label is None else label, i, t1, p, w,
                                    table.fn.beta, k["use_local"], k["margin"],
                                    k["before"], head_lists)


def prune_forward(prefix: int, label: Optional[int], i: int, t: float,
                  table: DominanceTable) -> bool:
    """Whether the arc appending job ``i`` after ``prefix`` (ending with ``label``) is cut."""
    if table.rules is Rules.NONE:
        return False
    k = _kernel_inputs(table)
    tail_lists = [[(r, k["tail_eff"][r][c]) for r in range(table.n)
                   if k["tail_eff"][r][c] != math.inf] for c in range(table.n)]
    p = [j.p for j in table.jobs]
    w = [j.w for j in table.jobs]
    full = (1 << table.n) - 1
    return _pyastar.pruned_forward(prefix, -1 if label is None else label, i, t, full, p, w,
                                   table.fn.beta, k["use_local"], k["margin"],
                                   k["after"], tail_lists)


__all__ = [
    "BACKEND", "Direction", "SearchStats", "SolveConfig", "SolveResult", "Status",
    "available_backends", "lower_bound", "prune_backward", "prune_forward",
    "resolve_direction", "result_row", "solve", "RESULT_COLUMNS",
]
