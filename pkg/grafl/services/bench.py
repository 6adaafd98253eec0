# grafl/services/bench.py
"""Timing runs of the learner on seeded Erdos-Renyi graphs."""
from __future__ import annotations

import time
from typing import Sequence

import structlog

from grafl.core.generators import erdos_renyi
from grafl.schemas.config import LearnConfig
from grafl.services.learner import PHASES, Learner

log = structlog.get_logger()

BENCH_COLUMNS = ("n", "m", "seconds", *PHASES, "workers")


def run_bench(
    sizes: Sequence[int],
    cfg: LearnConfig,
    avg_degree: float = 10.0,
    seed: int = 0,
    workers_list: Sequence[int] = (1,),
) -> list[dict]:
    """One row per (size, worker count); graph generation is not timed."""
    rows = []
    for n in sizes:
        g = erdos_renyi(int(n), avg_degree, seed=seed)
        for workers in workers_list:
            learner = Learner(cfg.model_copy(update={"workers": int(workers)}))
            start = time.perf_counter()
            learner.fit(g)
            seconds = time.perf_counter() - start
            row = {"n": g.n, "m": g.m, "seconds": seconds, **learner.timings, "workers": int(workers)}
            rows.append(row)
            log.info("bench_row", **{k: (round(v, 4) if isinstance(v, float) else v) for k, v in row.items()})
    return rows
