"""Exact solving and dominance rules for single-machine scheduling with cost sum w_j C_j^beta."""

from nlsched.core import (
    Instance,
    InstanceError,
    Job,
    Schedule,
    ScheduleError,
    SizeError,
    brute_force_opt,
    dp_opt,
    evaluate,
    read_instance,
    smith_schedule,
    write_instance,
)
from nlsched.dominance import PenaltyFn, Rules, build_table
from nlsched.search import Direction, SolveConfig, SolveResult, Status, solve

__version__ = "0.1.0"
