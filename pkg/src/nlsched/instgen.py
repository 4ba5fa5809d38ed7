"""Seeded random instances and the standard experiment sets.

Processing times are uniform integers in 1..100. The Smith ratio of each job
is ``2**X`` with ``X ~ Normal(0, v**2)`` where ``v = beta * sigma`` for
``beta >= 1`` and ``v = 2 * sigma`` below 1; the weight is ``ratio * p``.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable

import numpy as np

from nlsched.core import Instance, Job, write_instance

P_MAX = 100
MAIN_SIGMAS = tuple(round(0.1 * k, 1) for k in range(1, 11))
MAIN_BETAS = tuple(round(0.5 + 0.3 * k, 1) for k in range(10))

MANIFEST_COLUMNS = ["setname", "instance", "n", "beta_target", "sigma", "seed", "index"]


@dataclass(frozen=True)
class GenSpec:
    n: int
    beta: float
    sigma: float
    seed: int
    count: int = 1
    setname: str = "custom"

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"n must be at least 1, got {self.n}")
        if not self.sigma > 0:
            raise ValueError(f"sigma must be positive, got {self.sigma}")
        if not self.beta > 0:
            raise ValueError(f"beta must be positive, got {self.beta}")


def log2_ratio_sd(beta: float, sigma: float) -> float:
    return beta * sigma if beta >= 1.0 else 2.0 * sigma


def _rng(seed: int, *key: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=tuple(key)))


def sample_ratios(rng: np.random.Generator, size: int, beta: float, sigma: float) -> np.ndarray:
    return 2.0 ** rng.normal(0.0, log2_ratio_sd(beta, sigma), size)


def gen_instance(spec: GenSpec, index: int, name: str | None = None) -> Instance:
    rng = _rng(spec.seed, index)
    p = rng.integers(1, P_MAX + 1, spec.n).astype(float)
    ratios = sample_ratios(rng, spec.n, spec.beta, spec.sigma)
    while True:
        w = ratios * p
        smith = w / p
        _, first = np.unique(smith, return_index=True)
        if len(first) == spec.n:
            break
        dup = np.setdiff1d(np.arange(spec.n), first)
        ratios[dup] = sample_ratios(rng, len(dup), spec.beta, spec.sigma)
    jobs = tuple(Job(k, float(p[k]), float(w[k])) for k in range(spec.n))
    meta = {"sigma": repr(spec.sigma), "seed": str(spec.seed), "index": str(index),
            "beta_target": repr(spec.beta), "set": spec.setname}
    return Instance(jobs, name or f"{spec.setname}/n{spec.n}-{index}", meta)


def gen_set(spec: GenSpec) -> list[Instance]:
    return [gen_instance(spec, k) for k in range(spec.count)]


def _cell_seed(seed: int, *key: int) -> int:
    return int(np.random.SeedSequence(seed, spawn_key=key).generate_state(1, np.uint64)[0])


def gen_set_n(seed: int, sizes: Iterable[int] = range(1, 36), per_size: int = 10) -> list[Instance]:
    out = []
    for n in sizes:
        spec = GenSpec(n, 2.0, 0.5, _cell_seed(seed, 1, n), per_size, "set-n")
        out += [gen_instance(spec, k, f"set-n/n{n}-{k}") for k in range(per_size)]
    return out


def set_t_sigmas() -> list[float]:
    return [round(0.1 + 0.001 * k, 3) for k in range(901)]


def gen_set_T(seed: int, n: int = 25, per_sigma: int = 3,
              sigmas: Iterable[float] | None = None) -> list[Instance]:
    out = []
    for sigma in set_t_sigmas() if sigmas is None else sigmas:
        spec = GenSpec(n, 2.0, sigma, _cell_seed(seed, 2, n, round(sigma * 1000)), per_sigma,
                       "set-T")
        out += [gen_instance(spec, i, f"set-T/s{sigma:.3f}-{i}") for i in range(per_sigma)]
    return out


def gen_main_grid(seed: int, n: int = 20, per_cell: int = 25,
                  betas: Iterable[float] = MAIN_BETAS,
                  sigmas: Iterable[float] = MAIN_SIGMAS, setname: str = "main") -> list[Instance]:
    # cell seeds are keyed by parameter values so any sub-grid reproduces the same instances
    out = []
    sigmas = list(sigmas)
    for beta in betas:
        for sigma in sigmas:
            key = (3, n, round(beta * 1000), round(sigma * 1000))
            spec = GenSpec(n, beta, sigma, _cell_seed(seed, *key), per_cell, setname)
            out += [gen_instance(spec, k, f"{setname}/n{n}-b{beta:g}-s{sigma:g}-{k}")
                    for k in range(per_cell)]
    return out


def write_set(instances: list[Instance], out_dir: str | Path) -> Path:
    """Write ``sets/<name>.inst`` files under ``out_dir`` and append to the manifest."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    manifest = out_dir / "manifest.csv"
    new = not manifest.exists()
    with manifest.open("a", newline="") as fh:
        writer = csv.writer(fh)
        if new:
            writer.writerow(MANIFEST_COLUMNS)
        for inst in instances:
            write_instance(inst, out_dir / "sets" / f"{inst.name}.inst")
            m = inst.meta
            writer.writerow([m.get("set", inst.name.split("/")[0]), inst.name, inst.n,
                             m.get("beta_target", ""), m.get("sigma", ""),
                             m.get("seed", ""), m.get("index", "")])
    return manifest
