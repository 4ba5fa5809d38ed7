"""Pairwise order relations between jobs for the penalty f(t) = t**beta.

Conventions used throughout: for jobs ``i`` and ``j`` and a prefix of total
length ``t`` placed before them,

    phi_ij(t) = (f(t+p_i+p_j) - f(t+p_j)) / (f(t+p_i+p_j) - f(t+p_i))

and the adjacent order ``i j`` is no worse than ``j i`` iff
``w_i / w_j >= phi_ij(t)``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from nlsched.core import Instance, Job

MARGIN = 1e-12
CROSSING_TOL = 1e-9
CROSSING_MAX_ITER = 200


class DominanceError(RuntimeError):
    """Contradictory or numerically inconsistent dominance conclusions."""


@dataclass(frozen=True)
class PenaltyFn:
    beta: float

    def __post_init__(self):
        if not (self.beta > 0 and math.isfinite(self.beta)):
            raise ValueError(f"beta must be a positive real, got {self.beta}")

    def __call__(self, t: float) -> float:
        return f_eval(t, self)

    def d1(self, t: float) -> float:
        return self.beta * t ** (self.beta - 1.0)

    def d2(self, t: float) -> float:
        return self.beta * (self.beta - 1.0) * t ** (self.beta - 2.0)

    def diff(self, lo: float, delta: float) -> float:
        """f(lo + delta) - f(lo), computed without cancellation."""
        return _fdiff(lo, delta, self.beta)


def _fdiff(lo: float, delta: float, beta: float) -> float:
    if lo == 0.0:
        return delta ** beta
    return lo ** beta * math.expm1(beta * math.log1p(delta / lo))


def f_eval(t: float, fn: PenaltyFn) -> float:
    if t < 0:
        raise ValueError(f"penalty undefined for negative time {t}")
    return t ** fn.beta


def phi(p_i: float, p_j: float, t: float, fn: PenaltyFn) -> float:
    if t < 0:
        raise ValueError(f"phi undefined for negative time {t}")
    if fn.beta == 1.0:
        return p_i / p_j
    return _fdiff(t + p_j, p_i, fn.beta) / _fdiff(t + p_i, p_j, fn.beta)


def local_at(i: Job, j: Job, t: float, fn: PenaltyFn, margin: float = 0.0) -> bool:
    """True iff ``i`` directly before ``j`` is no worse after a prefix of length t.

    A positive ``margin`` demands ``w_i/w_j`` beat ``phi_ij(t)`` by that relative
    amount, which turns the test into a strict preference safe for pruning.
    """
    return i.w / j.w >= phi(i.p, j.p, t, fn) * (1.0 + margin)


def phi_range(i: Job, j: Job, fn: PenaltyFn) -> tuple[float, float]:
    """(inf, sup) of phi_ij over t >= 0; phi is monotone between phi_ij(0) and p_i/p_j."""
    start = phi(i.p, j.p, 0.0, fn)
    limit = i.p / j.p
    return min(start, limit), max(start, limit)


def local_order(i: Job, j: Job, fn: PenaltyFn, margin: float = 0.0) -> bool:
    """Whether ``i j`` is preferred to ``j i`` at every prefix length."""
    if margin == 0.0:
        return classify_local(i, j, fn) is Prec.I_J
    return i.w / j.w >= phi_range(i, j, fn)[1] * (1.0 + margin)


class Prec(enum.Enum):
    I_J = "i<j"
    J_I = "j<i"
    CROSSING = "cross"
    NONE = "none"

    def flipped(self) -> "Prec":
        return {Prec.I_J: Prec.J_I, Prec.J_I: Prec.I_J}.get(self, self)


class Verdict(enum.Enum):
    HOLDS = "holds"
    UNKNOWN = "unknown"


def classify_local(i: Job, j: Job, fn: PenaltyFn) -> Prec:
    # one bracket for both directions, so CROSSING always means inf < w_i/w_j < sup;
    # evaluating in a canonical job order keeps the answer antisymmetric to the last ulp
    if (i.p, i.w) > (j.p, j.w):
        return classify_local(j, i, fn).flipped()
    inf, sup = phi_range(i, j, fn)
    target = i.w / j.w
    if target >= sup:
        return Prec.I_J
    if target <= inf:
        return Prec.J_I
    return Prec.CROSSING


def crossing_time(i: Job, j: Job, fn: PenaltyFn) -> Optional[float]:
    """Prefix length where the adjacent preference between i and j flips.

    Returns None when one job is locally ordered before the other at every
    prefix length.
    """
    if classify_local(i, j, fn) is not Prec.CROSSING:
        return None
    if (i.p, i.w) > (j.p, j.w):
        return crossing_time(j, i, fn)
    target = i.w / j.w
    inf, sup = phi_range(i, j, fn)
    if not inf < target < sup:
        raise DominanceError(
            f"ratio {target!r} outside the range of phi for jobs {i.id}, {j.id}")
    lo_val = phi(i.p, j.p, 0.0, fn) - target
    lo, hi = 0.0, i.p + j.p
    for _ in range(CROSSING_MAX_ITER):
        if (phi(i.p, j.p, hi, fn) - target > 0) != (lo_val > 0):
            break
        lo, hi = hi, 2.0 * hi
    else:
        raise DominanceError(f"no sign change of phi - w_i/w_j for jobs {i.id}, {j.id}")
    for _ in range(CROSSING_MAX_ITER):
        if hi - lo <= CROSSING_TOL:
            break
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        if (phi(i.p, j.p, mid, fn) - target > 0) == (lo_val > 0):
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def global_order(i: Job, j: Job, fn: PenaltyFn, margin: float = MARGIN) -> Verdict:
    """Whether the known sufficient conditions prove ``i`` precedes ``j`` in every optimum.

    UNKNOWN never means the converse holds.
    """
    if not local_order(i, j, fn, margin):
        return Verdict.UNKNOWN
    if fn.beta >= 1.0 or i.p <= j.p:
        return Verdict.HOLDS
    if i.w / j.w >= (i.p / j.p) ** (2.0 - fn.beta) * (1.0 + margin):
        return Verdict.HOLDS
    return Verdict.UNKNOWN


@dataclass(frozen=True)
class IntervalOrder:
    """``first`` precedes ``second`` in every optimum, restricted to a time window."""

    first: int
    second: int
    t: float


def head_interval(i: Job, j: Job, fn: PenaltyFn) -> Optional[float]:
    """t* with i before j globally whenever everything before j fits in [0, t*].

    Only licensed for 0 < beta < 1 with p_i <= p_j.
    """
    if not (fn.beta < 1.0 and i.p <= j.p):
        return None
    return crossing_time(i, j, fn)


def tail_interval(i: Job, j: Job, fn: PenaltyFn) -> Optional[IntervalOrder]:
    """For beta > 1, the shorter job of a crossing pair wins once the prefix reaches t*."""
    if not fn.beta > 1.0:
        return None
    t = crossing_time(i, j, fn)
    if t is None:
        return None
    short, long_ = (j, i) if i.p >= j.p else (i, j)
    return IntervalOrder(short.id, long_.id, t)


def mshj_rule(i: Job, j: Job, fn: PenaltyFn) -> bool:
    return fn.beta == 2.0 and i.w >= j.w and i.w / i.p > j.w / j.p


def q_ratio(t: float, p_i: float, p_j: float, fn: PenaltyFn) -> float:
    return fn.diff(t, p_j) / fn.diff(t, p_i)


def g_func(x: float, a: float, b: float, fn: PenaltyFn) -> float:
    return x * fn.diff(a + x, b - a) / fn.diff(b, x)


class Rules(enum.Enum):
    NONE = "none"
    LOCAL = "local"
    MSHJ = "mshj"
    NEW = "new"
    ALL = "all"

    @property
    def use_local(self) -> bool:
        return self is not Rules.NONE

    @property
    def use_mshj(self) -> bool:
        return self in (Rules.MSHJ, Rules.ALL)

    @property
    def use_new(self) -> bool:
        return self in (Rules.NEW, Rules.ALL)


@dataclass(frozen=True)
class PairRelation:
    local: Prec
    crossing_time: Optional[float] = None
    full_global: Prec = Prec.NONE
    head_interval: Optional[tuple[Prec, float]] = None
    tail_interval: Optional[tuple[Prec, float]] = None
    mshj: Prec = Prec.NONE

    def flipped(self) -> "PairRelation":
        def flip_iv(iv):
            return None if iv is None else (iv[0].flipped(), iv[1])
        return PairRelation(self.local.flipped(), self.crossing_time,
                            self.full_global.flipped(), flip_iv(self.head_interval),
                            flip_iv(self.tail_interval), self.mshj.flipped())


def pair_relation(i: Job, j: Job, fn: PenaltyFn, rules: Rules = Rules.ALL) -> PairRelation:
    local = classify_local(i, j, fn)
    t_cross = crossing_time(i, j, fn) if local is Prec.CROSSING else None
    full = Prec.NONE
    head = tail = None
    if rules.use_new:
        ij = global_order(i, j, fn) is Verdict.HOLDS
        ji = global_order(j, i, fn) is Verdict.HOLDS
        if ij and ji:
            raise DominanceError(f"jobs {i.id} and {j.id} globally ordered both ways")
        full = Prec.I_J if ij else Prec.J_I if ji else Prec.NONE
        if t_cross is not None:
            h = head_interval(i, j, fn)
            if h is not None:
                head = (Prec.I_J, h)
            else:
                h = head_interval(j, i, fn)
                if h is not None:
                    head = (Prec.J_I, h)
            iv = tail_interval(i, j, fn)
            if iv is not None:
                tail = (Prec.I_J if iv.first == i.id else Prec.J_I, iv.t)
    mshj = Prec.NONE
    if rules.use_mshj:
        if mshj_rule(i, j, fn):
            mshj = Prec.I_J
        elif mshj_rule(j, i, fn):
            mshj = Prec.J_I
    if Prec.NONE not in (full, mshj) and full is not mshj:
        raise DominanceError(f"rule families disagree on jobs {i.id} and {j.id}")
    return PairRelation(local, t_cross, full, head, tail, mshj)


@dataclass
class DominanceTable:
    jobs: tuple[Job, ...]
    fn: PenaltyFn
    rules: Rules
    relations: dict = field(default_factory=dict)  # (i, j) with i < j -> PairRelation

    @property
    def n(self) -> int:
        return len(self.jobs)

    def rel(self, i: int, j: int) -> PairRelation:
        if i < j:
            return self.relations[(i, j)]
        return self.relations[(j, i)].flipped()

    def before_masks(self) -> list[int]:
        """Bit k of entry i is set when i must precede k in every optimum."""
        before = [0] * self.n
        for (i, j), r in self.relations.items():
            for d in (r.full_global, r.mshj):
                if d is Prec.I_J:
                    before[i] |= 1 << j
                elif d is Prec.J_I:
                    before[j] |= 1 << i
        return before

    def after_masks(self) -> list[int]:
        """Bit k of entry i is set when k must precede i in every optimum."""
        after = [0] * self.n
        for i, m in enumerate(self.before_masks()):
            k = 0
            while m:
                if m & 1:
                    after[k] |= 1 << i
                m >>= 1
                k += 1
        return after

    def head_times(self) -> np.ndarray:
        """``[i, k]`` holds t* when i precedes k within [0, t*]; -inf otherwise."""
        out = np.full((self.n, self.n), -np.inf)
        for (i, j), r in self.relations.items():
            if r.head_interval is not None:
                d, t = r.head_interval
                a, b = (i, j) if d is Prec.I_J else (j, i)
                out[a, b] = t
        return out

    def tail_times(self) -> np.ndarray:
        """``[k, i]`` holds t* when k precedes i once the prefix is >= t*; +inf otherwise."""
        out = np.full((self.n, self.n), np.inf)
        for (i, j), r in self.relations.items():
            if r.tail_interval is not None:
                d, t = r.tail_interval
                a, b = (i, j) if d is Prec.I_J else (j, i)
                out[a, b] = t
        return out

    def csv_rows(self):
        for (i, j), r in sorted(self.relations.items()):
            yield [
                i, j, r.local.value,
                "" if r.crossing_time is None else repr(r.crossing_time),
                r.full_global.value,
                "" if r.head_interval is None else f"{r.head_interval[0].value}:{r.head_interval[1]!r}",
                "" if r.tail_interval is None else f"{r.tail_interval[0].value}:{r.tail_interval[1]!r}",
                r.mshj.value,
            ]


TABLE_COLUMNS = ["i", "j", "local", "crossing_time", "full_global", "head_t", "tail_t", "mshj"]


def build_table(instance: Instance, fn: PenaltyFn, rules: Rules = Rules.ALL) -> DominanceTable:
    jobs = instance.jobs
    table = DominanceTable(jobs, fn, rules)
    if rules is Rules.NONE:
        return table
    for a in range(instance.n):
        for b in range(a + 1, instance.n):
            table.relations[(a, b)] = pair_relation(jobs[a], jobs[b], fn, rules)
    return table
