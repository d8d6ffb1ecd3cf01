"""Priority-limitation gate: the per-level K cap must bound the BFS frontier.

Usage: python scripts/queue_gate.py [--map data/maps/Berlin_1_256.map]
           [--graph berlin.tgrf] [--start 59,72] [--goal 109,214] [-k 200]

Runs one query twice:
  1. With the priority limitation. Passes when the primary queue holds at most
     K paths at the start of every iteration.
  2. As a plain level-synchronous BFS, capped at --unlimited-levels levels.
     Passes when its peak primary queue is strictly larger than run 1's,
     which shows the cap is what keeps the queue bounded.
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

PROJECT_ROOT = Path(__file__).resolve().parents[1]
sys.path.insert(0, str(PROJECT_ROOT))

from src.planning.grid_core import GridCoord, GridMap, load_map  # noqa: E402
from src.planning.tangent_graph import (  # noqa: E402
    TangentGraph,
    build_tangent_graph,
    deserialize_graph,
)
from src.planning.topo_search import (  # noqa: E402
    SearchConfig,
    queue_bound_property,
    search_k_paths,
)

DEFAULT_MAP = PROJECT_ROOT / "data" / "maps" / "Berlin_1_256.map"


def check_query(
    grid: GridMap,
    graph: TangentGraph,
    start: GridCoord,
    goal: GridCoord,
    k: int,
    *,
    unlimited_levels: int = 8,
    time_budget: float = 10.0,
) -> list[str]:
    """Gate errors for one query; empty list means it passes."""
    errors: list[str] = []
    limited = search_k_paths(grid, graph, start, goal, SearchConfig(k=k, time_budget=time_budget))
    print(f"    limited: {len(limited.finished)} paths, {limited.iterations} iterations, "
          f"peak primary {limited.peak_primary}, peak secondary {limited.peak_secondary}")
    if not queue_bound_property(limited.queue_trace, k):
        errors.append(f"primary queue exceeded k={k} (peak {limited.peak_primary})")

    unlimited = search_k_paths(
        grid, graph, start, goal,
        SearchConfig(k=k, priority_limit=False, max_expansions=unlimited_levels,
                     time_budget=time_budget),
    )
    print(f"    unlimited: {len(unlimited.finished)} paths, {unlimited.iterations} iterations, "
          f"peak primary {unlimited.peak_primary}")
    if unlimited.peak_primary <= limited.peak_primary:
        errors.append(
            f"unlimited BFS peak {unlimited.peak_primary} is not larger than the "
            f"limited peak {limited.peak_primary}"
        )
    return errors


def _coord(text: str) -> GridCoord:
    x, y = text.split(",")
    return GridCoord(int(x), int(y))


def parse_args() -> argparse.Namespace:
    parser = argparse.ArgumentParser(description="Priority-limitation queue gate.")
    parser.add_argument("--map", type=Path, default=DEFAULT_MAP)
    parser.add_argument("--graph", type=Path, help="Prebuilt .tgrf file (built on the fly otherwise)")
    parser.add_argument("--start", type=_coord, default=GridCoord(59, 72))
    parser.add_argument("--goal", type=_coord, default=GridCoord(109, 214))
    parser.add_argument("-k", type=int, default=200)
    parser.add_argument("--unlimited-levels", type=int, default=8)
    parser.add_argument("--time-budget", type=float, default=10.0)
    return parser.parse_args()


def main() -> int:
    args = parse_args()
    if not args.map.exists():
        print(f"FAIL: map not found: {args.map}")
        return 1
    grid = load_map(args.map)
    graph = deserialize_graph(args.graph.read_bytes()) if args.graph else build_tangent_graph(grid)
    print(f"{args.map.name} {tuple(args.start)} -> {tuple(args.goal)}, k={args.k}")
    errors = check_query(grid, graph, args.start, args.goal, args.k,
                         unlimited_levels=args.unlimited_levels, time_budget=args.time_budget)
    if errors:
        for e in errors:
            print(f"  FAIL: {e}")
        return 1
    print("  OK")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
