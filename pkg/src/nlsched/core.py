"""Instances, schedules, cost evaluation and the exhaustive oracles.

The cost of a schedule is ``sum_j w_j * C_j**beta`` where ``C_j`` is the
completion time of job ``j`` on a single machine without idle time.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

HEADER = "# nlsched-instance v1"

BRUTE_FORCE_MAX_N = 10
DP_MAX_N = 24


class InstanceError(ValueError):
    """Malformed or invalid instance data."""


class ScheduleError(ValueError):
    """An order that is not a permutation of the instance's jobs."""


class SizeError(ValueError):
    """Instance too large for the requested exhaustive method."""


@dataclass(frozen=True)
class Job:
    id: int
    p: float
    w: float

    @property
    def ratio(self) -> float:
        return self.w / self.p


@dataclass(frozen=True)
class Instance:
    jobs: tuple[Job, ...]
    name: str = "instance"
    meta: dict = field(default_factory=dict, compare=False, hash=False)

    def __post_init__(self):
        if not self.jobs:
            raise InstanceError("instance needs at least one job")
        for k, job in enumerate(self.jobs):
            if job.id != k:
                raise InstanceError(f"job ids must be 0..n-1, got {job.id} at position {k}")
            if not (job.p > 0 and math.isfinite(job.p)):
                raise InstanceError(f"job {k}: processing time must be positive, got {job.p}")
            if not (job.w > 0 and math.isfinite(job.w)):
                raise InstanceError(f"job {k}: weight must be positive, got {job.w}")
        seen = {}
        for job in self.jobs:
            r = job.w / job.p
            if r in seen:
                raise InstanceError(
                    f"jobs {seen[r]} and {job.id} share the Smith ratio {r!r}")
            seen[r] = job.id

    @classmethod
    def from_pairs(cls, pairs: Iterable[tuple[float, float]], name: str = "instance",
                   meta: dict | None = None) -> "Instance":
        jobs = tuple(Job(k, float(p), float(w)) for k, (p, w) in enumerate(pairs))
        return cls(jobs, name, dict(meta or {}))

    @property
    def n(self) -> int:
        return len(self.jobs)

    @property
    def p(self) -> list[float]:
        return [j.p for j in self.jobs]

    @property
    def w(self) -> list[float]:
        return [j.w for j in self.jobs]

    @property
    def total_time(self) -> float:
        return math.fsum(self.p)

    def labels(self) -> list[str]:
        raw = self.meta.get("labels")
        if raw:
            names = raw.split()
            if len(names) == self.n:
                return names
        return [str(k) for k in range(self.n)]


@dataclass(frozen=True)
class Schedule:
    order: tuple[int, ...]
    completions: tuple[float, ...]

    @classmethod
    def of(cls, order: Sequence[int], instance: Instance) -> "Schedule":
        order = tuple(int(k) for k in order)
        if sorted(order) != list(range(instance.n)):
            raise ScheduleError(f"order {order} is not a permutation of 0..{instance.n - 1}")
        t = 0.0
        comps = [0.0] * instance.n
        for k in order:
            t += instance.jobs[k].p
            comps[k] = t
        return cls(order, tuple(comps))


def sequence_cost(order: Sequence[int], p: Sequence[float], w: Sequence[float],
                  beta: float) -> float:
    """Cost of processing jobs in ``order`` from raw arrays; zero weights are allowed."""
    t = 0.0
    cost = 0.0
    for k in order:
        t += p[k]
        cost += w[k] * t ** beta
    return cost


def evaluate(schedule: Schedule | Sequence[int], instance: Instance, beta: float) -> float:
    """Total weighted cost of ``schedule`` with penalty ``C**beta``."""
    if beta <= 0:
        raise ValueError(f"beta must be positive, got {beta}")
    order = schedule.order if isinstance(schedule, Schedule) else tuple(schedule)
    if sorted(order) != list(range(instance.n)):
        raise ScheduleError(f"order {tuple(order)} is not a permutation of 0..{instance.n - 1}")
    return sequence_cost(order, instance.p, instance.w, beta)


def smith_schedule(instance: Instance) -> Schedule:
    """Jobs sorted by decreasing w/p (optimal for beta = 1)."""
    ratios = [j.w / j.p for j in instance.jobs]
    if len(set(ratios)) != len(ratios):
        raise InstanceError("Smith ratios are not pairwise distinct")
    order = sorted(range(instance.n), key=lambda k: -ratios[k])
    return Schedule.of(order, instance)


@lru_cache(maxsize=4)
def _perm_table(m: int) -> np.ndarray:
    # lexicographic permutations of range(m)
    if m == 0:
        return np.zeros((1, 0), dtype=np.int8)
    return np.array(list(itertools.permutations(range(m))), dtype=np.int8)


def brute_force_opt(instance: Instance, beta: float) -> tuple[Schedule, float]:
    """Enumerate all n! orders; ties go to the lexicographically smallest order."""
    n = instance.n
    if n > BRUTE_FORCE_MAX_N:
        raise SizeError(f"brute force limited to n <= {BRUTE_FORCE_MAX_N}, got {n}")
    if beta <= 0:
        raise ValueError(f"beta must be positive, got {beta}")
    p = np.array(instance.p)
    w = np.array(instance.w)
    tail = _perm_table(n - 1)
    best_cost = math.inf
    best_order = None
    # chunk by first job so memory stays at (n-1)! rows
    for first in range(n):
        rest = np.array([k for k in range(n) if k != first], dtype=np.int64)
        perms = np.empty((tail.shape[0], n), dtype=np.int64)
        perms[:, 0] = first
        perms[:, 1:] = rest[tail]
        costs = (w[perms] * np.cumsum(p[perms], axis=1) ** beta).sum(axis=1)
        k = int(np.argmin(costs))
        if costs[k] < best_cost:
            best_cost = float(costs[k])
            best_order = perms[k].tolist()
    schedule = Schedule.of(best_order, instance)
    return schedule, evaluate(schedule, instance, beta)


def dp_opt(instance: Instance, beta: float) -> float:
    """Optimal cost by dynamic programming over all job subsets.

    ``OPT(S) = min_{j in S} OPT(S - j) + w_j * (sum_{i in S} p_i) ** beta``,
    i.e. job ``j`` is the last one among ``S``.
    """
    n = instance.n
    if n > DP_MAX_N:
        raise SizeError(f"subset DP limited to n <= {DP_MAX_N}, got {n}")
    if beta <= 0:
        raise ValueError(f"beta must be positive, got {beta}")
    size = 1 << n
    masks = np.arange(size, dtype=np.uint32)
    total = np.zeros(size)
    for j, job in enumerate(instance.jobs):
        total[(masks >> j) & 1 == 1] += job.p
    span_cost = total ** beta
    opt = np.full(size, np.inf)
    opt[0] = 0.0
    popcount = np.bitwise_count(masks)
    for k in range(1, n + 1):
        layer = masks[popcount == k]
        best = np.full(layer.shape[0], np.inf)
        for j, job in enumerate(instance.jobs):
            bit = np.uint32(1 << j)
            sel = (layer & bit) != 0
            sub = layer[sel]
            cand = opt[sub ^ bit] + job.w * span_cost[sub]
            best[sel] = np.minimum(best[sel], cand)
        opt[layer] = best
    return float(opt[size - 1])


# -- instance files --------------------------------------------------------

def format_instance(instance: Instance) -> str:
    lines = [HEADER, f"# name: {instance.name}"]
    for key in sorted(instance.meta):
        if key != "name":
            lines.append(f"# {key}: {instance.meta[key]}")
    for job in instance.jobs:
        lines.append(f"{job.id},{job.p!r},{job.w!r}")
    return "\n".join(lines) + "\n"


def parse_instance(text: str, name: str | None = None) -> Instance:
    lines = text.splitlines()
    if not lines or lines[0].strip() != HEADER:
        raise InstanceError(f"missing header line {HEADER!r}")
    meta = {}
    rows = []
    for lineno, line in enumerate(lines[1:], start=2):
        line = line.strip()
        if not line:
            continue
        if line.startswith("#"):
            body = line[1:].strip()
            if ":" in body:
                key, _, value = body.partition(":")
                meta[key.strip()] = value.strip()
            continue
        parts = line.split(",")
        if len(parts) != 3:
            raise InstanceError(f"line {lineno}: expected 'id,p,w', got {line!r}")
        try:
            rows.append((int(parts[0]), float(parts[1]), float(parts[2])))
        except ValueError as exc:
            raise InstanceError(f"line {lineno}: {exc}") from None
    rows.sort(key=lambda r: r[0])
    jobs = tuple(Job(i, p, w) for i, p, w in rows)
    inst_name = meta.pop("name", None) or name or "instance"
    return Instance(jobs, inst_name, meta)


def read_instance(path: str | Path) -> Instance:
    path = Path(path)
    return parse_instance(path.read_text(encoding="utf-8"), name=path.stem)


def write_instance(instance: Instance, path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(format_instance(instance), encoding="utf-8")
    return path
