import random
from pathlib import Path

import pytest

from nlsched.core import Instance, Job, read_instance

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"


def fixture(name: str) -> Instance:
    return read_instance(FIXTURES / f"{name}.inst")


def random_instance(rng: random.Random, n: int, spread: float = 1.0, name: str = "rand") -> Instance:
    """Integer p in 1..100 and w = p * 2**N(0, spread**2), distinct ratios."""
    while True:
        jobs = []
        for k in range(n):
            p = float(rng.randint(1, 100))
            jobs.append(Job(k, p, p * 2.0 ** rng.gauss(0.0, spread)))
        if len({j.w / j.p for j in jobs}) == n:
            return Instance(tuple(jobs), name)


def random_job(rng: random.Random, k: int, spread: float = 1.0) -> Job:
    p = float(rng.randint(1, 100))
    return Job(k, p, p * 2.0 ** rng.gauss(0.0, spread))


@pytest.fixture
def counterexample():
    return fixture("counterexample_interval")
