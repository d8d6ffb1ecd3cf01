"""Prefect flow that benchmarks several maps concurrently.

Each map is one task; records are gathered in map order afterwards, so the
output matches ``bench.run_bench`` row for row apart from timings.

NOTE: bench tasks do not persist or cache results. Timings are the output,
and a cached run would report the timings of an earlier one.
"""
from __future__ import annotations

import logging
from pathlib import Path
from typing import Sequence

from prefect import flow, task
from prefect.cache_policies import NO_CACHE
from prefect.task_runners import ThreadPoolTaskRunner

from src.planning.config import BENCH_TIME_BUDGET_S, CACHE_DIR

from .bench import BenchRecord, BenchReport, bench_map

logger = logging.getLogger(__name__)


@task(name="bench-map", cache_policy=NO_CACHE, persist_result=False)
def bench_map_task(
    map_path: Path,
    pairs: int,
    k_values: tuple[int, ...],
    seed: int,
    time_budget: float,
    cache_dir: Path,
) -> list[BenchRecord]:
    return bench_map(map_path, pairs, k_values, seed, time_budget=time_budget, cache_dir=cache_dir)


@flow(name="bench", log_prints=True)
def bench_flow(
    maps: list[Path],
    pairs: int,
    k_values: tuple[int, ...],
    seed: int,
    time_budget: float = BENCH_TIME_BUDGET_S,
    cache_dir: Path = CACHE_DIR,
) -> BenchReport:
    report = BenchReport()
    futures = []
    for map_path in maps:
        if not map_path.exists():
            logger.warning("Skipping missing map %s", map_path)
            report.skipped_maps.append(str(map_path))
            continue
        futures.append(bench_map_task.submit(map_path, pairs, k_values, seed, time_budget, cache_dir))
    for future in futures:
        report.records.extend(future.result())
    return report


def run_bench_concurrently(
    maps: Sequence[Path],
    pairs: int,
    k_values: Sequence[int],
    seed: int,
    *,
    workers: int,
    time_budget: float = BENCH_TIME_BUDGET_S,
    cache_dir: Path = CACHE_DIR,
) -> BenchReport:
    """Run ``bench_flow`` with ``workers`` task threads."""
    runner = bench_flow.with_options(task_runner=ThreadPoolTaskRunner(max_workers=workers))
    return runner([Path(m) for m in maps], pairs, tuple(k_values), seed, time_budget, cache_dir)
