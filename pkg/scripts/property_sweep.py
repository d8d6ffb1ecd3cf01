"""Property sweep over seeded random block maps.

Usage: python scripts/property_sweep.py [--maps 50] [--pairs 2] [-k 16] [--seed 42]

For every map (64x64, 3-20 rectangular obstacles) and every sampled query:
  - all returned path pairs are checked with the winding-number oracle,
  - the shortest returned path is compared with an independent shortest
    taut path search over the same augmented graph,
  - every returned path is audited (line of sight, tautness, no loop).
Prints the rates and fails when a threshold is missed.
"""
from __future__ import annotations

import argparse
import itertools
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

PROJECT_ROOT = Path(__file__).resolve().parents[1]
sys.path.insert(0, str(PROJECT_ROOT))

from src.harness.oracle import (  # noqa: E402
    audit_path,
    homotopy_distinct,
    obstacle_components,
    shortest_taut_length,
)
from src.harness.sampling import SamplingError, random_block_map, sample_endpoints  # noqa: E402
from src.planning.tangent_graph import build_tangent_graph  # noqa: E402
from src.planning.topo_search import SearchConfig, search_k_paths  # noqa: E402

LENGTH_RTOL = 1e-6


@dataclass
class SweepTally:
    pairs_compared: int = 0
    pairs_distinct: int = 0
    pairs_inconclusive: int = 0
    queries: int = 0
    shortest_checked: int = 0
    shortest_agree: int = 0
    paths_audited: int = 0
    audit_failures: list[str] = field(default_factory=list)

    @property
    def distinct_rate(self) -> float:
        return (self.pairs_distinct + self.pairs_inconclusive) / self.pairs_compared if self.pairs_compared else 1.0

    @property
    def inconclusive_rate(self) -> float:
        return self.pairs_inconclusive / self.pairs_compared if self.pairs_compared else 0.0

    @property
    def agreement_rate(self) -> float:
        return self.shortest_agree / self.shortest_checked if self.shortest_checked else 1.0


def sweep(n_maps: int, pairs: int, k: int, seed: int, *, size: int = 64) -> SweepTally:
    tally = SweepTally()
    rng = np.random.default_rng(seed)
    for map_idx in range(n_maps):
        n_blocks = int(rng.integers(3, 21))
        grid = random_block_map(size, size, n_blocks, seed + map_idx)
        graph = build_tangent_graph(grid)
        components = obstacle_components(grid)
        try:
            endpoints = sample_endpoints(grid, pairs, seed + map_idx)
        except SamplingError as e:
            print(f"    map {map_idx}: {e}")
            continue
        for start, goal in endpoints:
            result = search_k_paths(grid, graph, start, goal, SearchConfig(k=k))
            tally.queries += 1
            for path in result.paths:
                tally.paths_audited += 1
                problems = audit_path(grid, path)
                if problems:
                    tally.audit_failures.append(f"map {map_idx} {tuple(start)}->{tuple(goal)}: {problems[0]}")
            for p1, p2 in itertools.combinations(result.paths, 2):
                tally.pairs_compared += 1
                verdict = homotopy_distinct(grid, p1, p2, components)
                if verdict is None:
                    tally.pairs_inconclusive += 1
                elif verdict:
                    tally.pairs_distinct += 1
            reference = shortest_taut_length(grid, graph, start, goal)
            if reference is not None and result.finished:
                tally.shortest_checked += 1
                best = result.finished[0].length
                if abs(best - reference) <= LENGTH_RTOL * reference:
                    tally.shortest_agree += 1
    return tally


def parse_args() -> argparse.Namespace:
    parser = argparse.ArgumentParser(description="Random-map property sweep.")
    parser.add_argument("--maps", type=int, default=50)
    parser.add_argument("--pairs", type=int, default=2, help="Queries per map")
    parser.add_argument("-k", type=int, default=16)
    parser.add_argument("--seed", type=int, default=42)
    parser.add_argument("--min-distinct-rate", type=float, default=1.0)
    parser.add_argument("--max-inconclusive-rate", type=float, default=0.01)
    parser.add_argument("--min-agreement-rate", type=float, default=1.0)
    return parser.parse_args()


def main() -> int:
    args = parse_args()
    tally = sweep(args.maps, args.pairs, args.k, args.seed)
    print(f"queries: {tally.queries}, paths audited: {tally.paths_audited}")
    print(f"distinct pairs: {tally.pairs_distinct}/{tally.pairs_compared} "
          f"(inconclusive {tally.pairs_inconclusive}) rate={tally.distinct_rate:.4f}")
    print(f"shortest-path agreement: {tally.shortest_agree}/{tally.shortest_checked} "
          f"rate={tally.agreement_rate:.4f}")
    print(f"audit failures: {len(tally.audit_failures)}")

    errors: list[str] = []
    if tally.distinct_rate < args.min_distinct_rate:
        errors.append(f"distinct rate {tally.distinct_rate:.4f} < {args.min_distinct_rate}")
    if tally.inconclusive_rate >= args.max_inconclusive_rate and tally.pairs_inconclusive:
        errors.append(f"inconclusive rate {tally.inconclusive_rate:.4f} >= {args.max_inconclusive_rate}")
    if tally.agreement_rate < args.min_agreement_rate:
        errors.append(f"agreement rate {tally.agreement_rate:.4f} < {args.min_agreement_rate}")
    errors.extend(tally.audit_failures[:20])
    if errors:
        for e in errors:
            print(f"  FAIL: {e}")
        return 1
    print("  OK")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
