#!/usr/bin/env python3
"""Command-line entry point for the tangent graph K-path planner.

Subcommands:
    build-graph  Build a tangent graph from a MovingAI map and write a .tgrf file
    find-paths   Find K topologically distinct paths between two cells
    bench        Run the benchmark protocol over one or more maps
    verify       Re-check a .tgrf file against its map

Usage:
    python run_planner.py build-graph --map data/maps/Berlin_1_256.map --out berlin.tgrf
    python run_planner.py find-paths --map data/maps/Berlin_1_256.map --graph berlin.tgrf \\
        --start 59,72 --goal 109,214 -k 200 --svg berlin.svg
    python run_planner.py bench --maps data/maps/*.map --pairs 100 --csv bench.csv --json bench.json
    python run_planner.py verify --map data/maps/Berlin_1_256.map --graph berlin.tgrf

Environment Variables:
    PLANNER_CACHE_DIR: graph cache used by bench (default .cache/graphs)
    RANDOM_SEED: default bench seed (default 42)
    BENCH_TIME_BUDGET_S: per-query wall-clock budget for bench (default 10)
    BENCH_K_VALUES: default bench k list (default 10,20,30,40,80,160,320)
    GRAPH_BUILD_WORKERS: default build-graph process count (default 1)

Exit status: 0 on success, 1 on input or file errors, 2 on internal errors.
"""
import argparse
import json
import logging
import os
import sys
import time
from pathlib import Path

try:
    from dotenv import load_dotenv
except ImportError:
    # Gracefully handle missing python-dotenv package
    def load_dotenv():
        pass

PROJECT_ROOT = Path(__file__).parent
sys.path.insert(0, str(PROJECT_ROOT))

# Load environment variables from .env file (must happen before local imports)
load_dotenv()

# Offline Prefect defaults MUST be set before prefect is imported (bench --workers).
os.environ.setdefault("PREFECT_HOME", str(PROJECT_ROOT / ".prefect"))
os.environ.setdefault("PREFECT_SERVER_ALLOW_EPHEMERAL_MODE", "true")
os.environ.setdefault("PREFECT_RESULTS_LOCAL_STORAGE_PATH", str(PROJECT_ROOT / ".prefect_cache"))
os.environ.pop("PREFECT_API_URL", None)

from src.harness.manifest import (  # noqa: E402
    build_graph_manifest,
    manifest_path_for,
    verify_graph_manifest,
    write_manifest,
)
from src.harness.render import render_svg  # noqa: E402
from src.planning.config import (  # noqa: E402
    BENCH_K_VALUES,
    BENCH_TIME_BUDGET_S,
    CACHE_DIR,
    GRAPH_BUILD_WORKERS,
    RANDOM_SEED,
)
from src.planning.grid_core import GridCoord, load_map  # noqa: E402
from src.planning.tangent_graph import (  # noqa: E402
    build_tangent_graph,
    deserialize_graph,
    graph_violations,
    serialize_graph,
)
from src.planning.topo_search import SearchConfig, search_k_paths  # noqa: E402

logging.basicConfig(
    level=logging.INFO,
    format='%(asctime)s - %(levelname)s - %(message)s',
    datefmt='%Y-%m-%d %H:%M:%S'
)
logger = logging.getLogger(__name__)
# Prefect's logging config resets the root logger to WARNING when a flow runs;
# pin this module's logger to INFO so bench summaries stay visible.
logger.setLevel(logging.INFO)


def parse_coord(text: str) -> GridCoord:
    """``"X,Y"`` -> GridCoord; ValueError on anything else."""
    parts = text.split(",")
    if len(parts) != 2 or not all(p.strip().lstrip("-").isdigit() for p in parts):
        raise ValueError(f"expected a coordinate like 12,34, got {text!r}")
    return GridCoord(int(parts[0]), int(parts[1]))


def parse_k_values(text: str) -> tuple[int, ...]:
    try:
        values = tuple(int(v) for v in text.split(","))
    except ValueError:
        raise ValueError(f"expected a comma-separated list of integers, got {text!r}") from None
    if not values or min(values) < 1:
        raise ValueError(f"k values must be >= 1, got {text!r}")
    return values


def cmd_build_graph(args: argparse.Namespace) -> int:
    map_path, out = Path(args.map), Path(args.out)
    grid = load_map(map_path)
    t0 = time.perf_counter()
    graph = build_tangent_graph(grid, strict_tangency=not args.either_end, workers=args.workers)
    build_ms = (time.perf_counter() - t0) * 1000
    out.write_bytes(serialize_graph(graph))
    write_manifest(
        build_graph_manifest(map_path, out, graph, build_ms=build_ms,
                             strict_tangency=not args.either_end),
        manifest_path_for(out),
    )
    print(f"nodes={graph.node_count} edges={graph.edge_count} build_ms={build_ms:.1f}")
    return 0


def cmd_find_paths(args: argparse.Namespace) -> int:
    start, goal = parse_coord(args.start), parse_coord(args.goal)
    grid = load_map(Path(args.map))
    graph = deserialize_graph(Path(args.graph).read_bytes())
    if (graph.width, graph.height) != (grid.width, grid.height):
        raise ValueError(
            f"graph was built for a {graph.width}x{graph.height} map, "
            f"map is {grid.width}x{grid.height}"
        )
    config = SearchConfig(
        k=args.k,
        max_expansions=args.max_expansions,
        strict_tangency=args.strict_tangency,
        priority_limit=not args.unlimited,
        time_budget=args.time_budget,
        workers=args.workers,
    )
    result = search_k_paths(grid, graph, start, goal, config)
    payload = json.dumps(result.to_dict(), indent=2)
    if args.json:
        Path(args.json).write_text(payload)
    else:
        print(payload)
    if args.svg:
        render_svg(grid, result.paths, Path(args.svg), start=start, goal=goal)
    return 0


def cmd_bench(args: argparse.Namespace) -> int:
    k_values = parse_k_values(args.k)
    maps = [Path(m) for m in args.maps]
    if args.workers > 1:
        from src.harness.flows import run_bench_concurrently

        report = run_bench_concurrently(maps, args.pairs, k_values, args.seed,
                                        workers=args.workers, time_budget=args.time_budget,
                                        cache_dir=CACHE_DIR)
    else:
        from src.harness.bench import run_bench

        report = run_bench(maps, args.pairs, k_values, args.seed,
                           time_budget=args.time_budget, cache_dir=CACHE_DIR)
    from src.harness.bench import write_bench_outputs

    parameters = {
        "maps": [str(m) for m in maps],
        "pairs": args.pairs,
        "seed": args.seed,
        "k_values": list(k_values),
        "time_budget_s": args.time_budget,
    }
    aggregates = write_bench_outputs(report, Path(args.csv),
                                     Path(args.json) if args.json else None, parameters)
    for row in aggregates.iter_rows(named=True):
        logger.info("%s k=%d: %.2f ms/query, %.3f ms/path, success %.0f%%",
                    row["map"], row["k"], row["mean_elapsed_ms"],
                    row["mean_path_ms"] or float("nan"), 100 * row["success_rate"])
    return 0


def cmd_verify(args: argparse.Namespace) -> int:
    map_path, graph_path = Path(args.map), Path(args.graph)
    grid = load_map(map_path)
    graph = deserialize_graph(graph_path.read_bytes())
    problems = graph_violations(grid, graph, strict_tangency=not args.either_end)
    manifest_path = manifest_path_for(graph_path)
    if manifest_path.exists():
        drift = verify_graph_manifest(map_path, graph_path, manifest_path)
        for line in drift:
            logger.warning("DRIFT %s", line)
        problems.extend(drift)
    if problems:
        for line in problems[:50]:
            logger.error("  %s", line)
        logger.error("FAIL %s: %d problems", graph_path.name, len(problems))
        return 1
    logger.info("OK %s: %d nodes, %d edges", graph_path.name, graph.node_count, graph.edge_count)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        description="Tangent graph planner for K topologically distinct paths",
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument("--verbose", action="store_true", help="Log at DEBUG level")
    sub = parser.add_subparsers(dest="command", required=True)

    build = sub.add_parser("build-graph", help="Build and write a tangent graph")
    build.add_argument("--map", required=True, help="MovingAI .map file")
    build.add_argument("--out", required=True, help="Output .tgrf file")
    build.add_argument("--either-end", action="store_true",
                       help="Keep edges passing the locally-collide condition at one end only")
    build.add_argument("--workers", type=int, default=GRAPH_BUILD_WORKERS,
                       help="Processes for visibility evaluation")
    build.set_defaults(handler=cmd_build_graph)

    find = sub.add_parser("find-paths", help="Search K distinct paths")
    find.add_argument("--map", required=True)
    find.add_argument("--graph", required=True)
    find.add_argument("--start", required=True, help="X,Y")
    find.add_argument("--goal", required=True, help="X,Y")
    find.add_argument("-k", type=int, required=True, help="Required path count")
    find.add_argument("--svg", help="Write an SVG rendering here")
    find.add_argument("--json", help="Write the JSON result here instead of stdout")
    find.add_argument("--strict-tangency", action="store_true",
                      help="Attach start and goal only through edges tangent at both ends")
    find.add_argument("--unlimited", action="store_true",
                      help="Disable the per-level K path limit (plain BFS)")
    find.add_argument("--max-expansions", type=int, default=None)
    find.add_argument("--time-budget", type=float, default=None, help="Seconds")
    find.add_argument("--workers", type=int, default=1, help="Threads per BFS level")
    find.set_defaults(handler=cmd_find_paths)

    bench = sub.add_parser("bench", help="Benchmark protocol")
    bench.add_argument("--maps", nargs="+", required=True)
    bench.add_argument("--pairs", type=int, default=100)
    bench.add_argument("--seed", type=int, default=RANDOM_SEED)
    bench.add_argument("-k", default=",".join(str(k) for k in BENCH_K_VALUES),
                       help="Comma-separated path counts")
    bench.add_argument("--csv", required=True)
    bench.add_argument("--json")
    bench.add_argument("--time-budget", type=float, default=BENCH_TIME_BUDGET_S)
    bench.add_argument("--workers", type=int, default=1, help="Maps benchmarked concurrently")
    bench.set_defaults(handler=cmd_bench)

    verify = sub.add_parser("verify", help="Re-check a graph file against its map")
    verify.add_argument("--map", required=True)
    verify.add_argument("--graph", required=True)
    verify.add_argument("--either-end", action="store_true",
                        help="Check a graph built with --either-end")
    verify.set_defaults(handler=cmd_verify)
    return parser


def cli_dispatch(argv: list[str] | None = None) -> int:
    """Parse ``argv`` and run one subcommand; returns the exit status."""
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as e:
        # argparse exits 2 on usage errors and 0 after --help.
        return 0 if e.code in (0, None) else 1
    if args.verbose:
        logging.getLogger().setLevel(logging.DEBUG)
        logger.setLevel(logging.DEBUG)
    try:
        return args.handler(args)
    except ValueError as e:
        logger.error("Input error: %s", e)
        return 1
    except (FileNotFoundError, IOError, OSError) as e:
        logger.error("File system error: %s: %s", type(e).__name__, e)
        return 1
    except Exception as e:
        logger.error("Unexpected error: %s: %s", type(e).__name__, e, exc_info=True)
        return 2


def main() -> int:
    return cli_dispatch()


if __name__ == "__main__":
    sys.exit(main())
