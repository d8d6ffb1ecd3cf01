"""Benchmark protocol: seeded queries over maps and path counts, CSV rows and
per-(map, k) aggregates.

The aggregate JSON is always computed from the CSV as written, so the two
files cannot disagree.
"""
from __future__ import annotations

import json
import logging
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Sequence

import polars as pl

from src.planning.config import BENCH_TIME_BUDGET_S, CACHE_DIR
from src.planning.grid_core import GridMap, load_map
from src.planning.tangent_graph import (
    GraphFormatError,
    TangentGraph,
    build_tangent_graph,
    deserialize_graph,
    serialize_graph,
)
from src.planning.topo_search import SearchConfig, search_k_paths

from .manifest import build_graph_manifest, compute_sha256, manifest_path_for, write_manifest
from .sampling import sample_endpoints

logger = logging.getLogger(__name__)

BENCH_SCHEMA: dict[str, Any] = {
    "map": pl.Utf8,
    "start_x": pl.Int64,
    "start_y": pl.Int64,
    "goal_x": pl.Int64,
    "goal_y": pl.Int64,
    "k": pl.Int64,
    "elapsed_ms": pl.Float64,
    "paths_found": pl.Int64,
    "mean_path_ms": pl.Float64,
    "truncated": pl.Boolean,
    "stop_reason": pl.Utf8,
    "peak_primary": pl.Int64,
    "peak_secondary": pl.Int64,
}


@dataclass(frozen=True)
class BenchRecord:
    """One (map, start, goal, k) query. ``mean_path_ms`` is None when no
    path was found; ``stop_reason`` is None unless a search limit ended it."""

    map: str
    start_x: int
    start_y: int
    goal_x: int
    goal_y: int
    k: int
    elapsed_ms: float
    paths_found: int
    mean_path_ms: float | None
    truncated: bool
    stop_reason: str | None
    peak_primary: int
    peak_secondary: int


@dataclass
class BenchReport:
    records: list[BenchRecord] = field(default_factory=list)
    skipped_maps: list[str] = field(default_factory=list)


def load_or_build_graph(
    map_path: Path,
    grid: GridMap,
    *,
    cache_dir: Path = CACHE_DIR,
    strict_tangency: bool = True,
    workers: int = 1,
) -> TangentGraph:
    """Tangent graph for ``map_path`` from the cache, building it on a miss.

    Cache files are keyed on the map's sha256, so editing a map never reuses
    a stale graph. An unreadable cache entry is rebuilt.
    """
    digest = compute_sha256(map_path)[:16]
    suffix = "" if strict_tangency else "-either"
    graph_path = cache_dir / f"{map_path.stem}-{digest}{suffix}.tgrf"
    if graph_path.exists():
        try:
            graph = deserialize_graph(graph_path.read_bytes())
            logger.info("Loaded cached graph %s (%d nodes)", graph_path.name, graph.node_count)
            return graph
        except GraphFormatError as e:
            logger.warning("Rebuilding unreadable cached graph %s: %s", graph_path.name, e)

    t0 = time.perf_counter()
    graph = build_tangent_graph(grid, strict_tangency=strict_tangency, workers=workers)
    build_ms = (time.perf_counter() - t0) * 1000
    cache_dir.mkdir(parents=True, exist_ok=True)
    graph_path.write_bytes(serialize_graph(graph))
    write_manifest(
        build_graph_manifest(map_path, graph_path, graph, build_ms=build_ms,
                             strict_tangency=strict_tangency),
        manifest_path_for(graph_path),
    )
    return graph


def bench_map(
    map_path: Path,
    pairs: int,
    k_values: Sequence[int],
    seed: int,
    *,
    time_budget: float = BENCH_TIME_BUDGET_S,
    cache_dir: Path = CACHE_DIR,
) -> list[BenchRecord]:
    """All records for one map, in (pair, k) order."""
    grid = load_map(map_path)
    graph = load_or_build_graph(map_path, grid, cache_dir=cache_dir)
    endpoints = sample_endpoints(grid, pairs, seed)
    records: list[BenchRecord] = []
    for start, goal in endpoints:
        for k in k_values:
            result = search_k_paths(grid, graph, start, goal,
                                    SearchConfig(k=k, time_budget=time_budget))
            elapsed_ms = result.elapsed * 1000
            found = len(result.finished)
            records.append(BenchRecord(
                map=map_path.name,
                start_x=start.x,
                start_y=start.y,
                goal_x=goal.x,
                goal_y=goal.y,
                k=k,
                elapsed_ms=round(elapsed_ms, 3),
                paths_found=found,
                mean_path_ms=round(elapsed_ms / found, 3) if found else None,
                truncated=result.truncated,
                stop_reason=result.stop_reason,
                peak_primary=result.peak_primary,
                peak_secondary=result.peak_secondary,
            ))
    logger.info("Benchmarked %s: %d pairs x %d k values", map_path.name, len(endpoints), len(k_values))
    return records


def run_bench(
    maps: Sequence[Path],
    pairs: int,
    k_values: Sequence[int],
    seed: int,
    *,
    time_budget: float = BENCH_TIME_BUDGET_S,
    cache_dir: Path = CACHE_DIR,
) -> BenchReport:
    """Sequential benchmark over ``maps``; missing map files are skipped."""
    report = BenchReport()
    for map_path in maps:
        map_path = Path(map_path)
        if not map_path.exists():
            logger.warning("Skipping missing map %s", map_path)
            report.skipped_maps.append(str(map_path))
            continue
        report.records.extend(
            bench_map(map_path, pairs, k_values, seed, time_budget=time_budget, cache_dir=cache_dir)
        )
    return report


def records_frame(records: Sequence[BenchRecord]) -> pl.DataFrame:
    if not records:
        return pl.DataFrame(schema=BENCH_SCHEMA)
    return pl.DataFrame([asdict(r) for r in records], schema=BENCH_SCHEMA)


def read_bench_csv(csv_path: Path) -> pl.DataFrame:
    return pl.read_csv(csv_path, schema_overrides=BENCH_SCHEMA)


def aggregate_bench(df: pl.DataFrame) -> pl.DataFrame:
    """Per-(map, k) means and success rate.

    Success means the search did not run out of time. A query that hits the
    iteration cap or runs out of homotopy classes below k still counts as a
    success.
    """
    return (
        df.group_by(["map", "k"])
        .agg(
            runs=pl.len(),
            mean_elapsed_ms=pl.col("elapsed_ms").mean(),
            mean_path_ms=pl.col("mean_path_ms").mean(),
            success_rate=(pl.col("stop_reason").fill_null("") != "time_budget").cast(pl.Float64).mean(),
            mean_paths_found=pl.col("paths_found").cast(pl.Float64).mean(),
        )
        .sort(["map", "k"])
    )


def write_bench_outputs(
    report: BenchReport,
    csv_path: Path,
    json_path: Path | None,
    parameters: dict[str, Any],
) -> pl.DataFrame:
    """Write the CSV, then the aggregate JSON computed from that CSV.

    Returns the aggregate frame.
    """
    records_frame(report.records).write_csv(csv_path)
    aggregates = aggregate_bench(read_bench_csv(csv_path))
    if json_path is not None:
        payload = {
            "parameters": parameters,
            "skipped_maps": report.skipped_maps,
            "aggregates": aggregates.to_dicts(),
        }
        json_path.write_text(json.dumps(payload, indent=2, default=str))
    logger.info("Wrote %d bench rows to %s", len(report.records), csv_path)
    return aggregates
