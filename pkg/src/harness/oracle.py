"""Independent checks on search output.

The homotopy oracle closes two paths into a loop and reads its winding
number around a representative point of every obstacle component. Paths
with equal endpoints are homotopic exactly when every winding number is
zero. The module also carries a post-hoc path audit and a shortest taut
path search that share no code with the K-path search loop.
"""
from __future__ import annotations

import heapq
import logging
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import ndimage

from src.planning.grid_core import GridCoord, GridMap, distance, line_of_sight
from src.planning.tangent_graph import TangentGraph
from src.planning.topo_search import (
    create_initial_paths,
    taut_transfer,
    no_loop_check,
)

logger = logging.getLogger(__name__)

FOUR_CONNECTED = np.array([[0, 1, 0], [1, 1, 1], [0, 1, 0]], dtype=bool)

WINDING_TOLERANCE = 1e-6
PERTURBATION = 1e-3


@dataclass(frozen=True)
class ObstacleComponent:
    """4-connected unpassable region that does not touch the map border.

    ``representative`` is the centre of the member cell nearest the
    centroid, so it always lies inside the component.
    """

    id: int
    cells: frozenset[GridCoord]
    representative: tuple[float, float]
    centroid: tuple[float, float]


@dataclass(frozen=True)
class WindingSignature:
    values: tuple[int, ...]

    @property
    def is_zero(self) -> bool:
        return not any(self.values)


def obstacle_components(grid: GridMap) -> list[ObstacleComponent]:
    """Interior obstacle components, ordered by their first cell in row-major order."""
    labels, count = ndimage.label(grid.occupancy, structure=FOUR_CONNECTED)
    if count == 0:
        return []
    border = set(np.unique(np.concatenate(
        [labels[0, :], labels[-1, :], labels[:, 0], labels[:, -1]]
    )).tolist())

    components: list[ObstacleComponent] = []
    for label in range(1, count + 1):
        if label in border:
            continue
        ys, xs = np.nonzero(labels == label)
        cx, cy = float(xs.mean()), float(ys.mean())
        nearest = int(np.argmin((xs - cx) ** 2 + (ys - cy) ** 2))
        components.append(ObstacleComponent(
            id=len(components),
            cells=frozenset(GridCoord(int(x), int(y)) for x, y in zip(xs, ys)),
            representative=(float(xs[nearest]), float(ys[nearest])),
            centroid=(cx, cy),
        ))
    logger.debug("%d interior obstacle components (%d touch the border)",
                 len(components), len(border - {0}))
    return components


def _winding_turns(loop: Sequence[tuple[float, float]], point: tuple[float, float]) -> float | None:
    """Signed angle swept around ``point`` by the closed polyline, in turns.

    None when ``point`` lies on one of the loop's segments.
    """
    px, py = point
    total = 0.0
    for (ax, ay), (bx, by) in zip(loop, loop[1:]):
        ux, uy = ax - px, ay - py
        vx, vy = bx - px, by - py
        cross = ux * vy - uy * vx
        dot = ux * vx + uy * vy
        if abs(cross) < 1e-12 and dot <= 0:
            return None
        total += math.atan2(cross, dot)
    return total / (2 * math.pi)


def _winding_number(loop: Sequence[tuple[float, float]], component: ObstacleComponent) -> int | None:
    turns = _winding_turns(loop, component.representative)
    if turns is None:
        rx, ry = component.representative
        cx, cy = component.centroid
        norm = math.hypot(cx - rx, cy - ry)
        if norm == 0.0:
            return None
        nudged = (rx + PERTURBATION * (cx - rx) / norm, ry + PERTURBATION * (cy - ry) / norm)
        turns = _winding_turns(loop, nudged)
        if turns is None:
            return None
    rounded = round(turns)
    if abs(turns - rounded) * 2 * math.pi > WINDING_TOLERANCE:
        return None
    return int(rounded)


def winding_signature(
    components: Sequence[ObstacleComponent], loop: Sequence[tuple[int, int]]
) -> WindingSignature | None:
    """Winding numbers of a closed loop around every component, or None if
    any of them is inconclusive."""
    points = [(float(x), float(y)) for x, y in loop]
    if points and points[0] != points[-1]:
        points.append(points[0])
    values = []
    for component in components:
        w = _winding_number(points, component)
        if w is None:
            return None
        values.append(w)
    return WindingSignature(tuple(values))


def homotopy_distinct(
    grid: GridMap,
    p1: Sequence[tuple[int, int]],
    p2: Sequence[tuple[int, int]],
    components: Sequence[ObstacleComponent] | None = None,
) -> bool | None:
    """True if the two paths belong to different homotopy classes.

    Returns None when the oracle is inconclusive (a representative sits on
    the loop even after perturbation). Pass precomputed ``components`` when
    comparing many pairs on one map.

    Raises
    ------
    ValueError
        If the paths do not share both endpoints.
    """
    if not p1 or not p2 or tuple(p1[0]) != tuple(p2[0]) or tuple(p1[-1]) != tuple(p2[-1]):
        raise ValueError("homotopy_distinct needs two paths with the same start and goal")
    if components is None:
        components = obstacle_components(grid)
    loop = [tuple(w) for w in p1] + [tuple(w) for w in reversed(p2)][1:]
    signature = winding_signature(components, loop)
    if signature is None:
        return None
    return not signature.is_zero


def audit_path(grid: GridMap, waypoints: Sequence[tuple[int, int]]) -> list[str]:
    """Post-hoc checks on one returned path.

    Returns violation messages for segments without line of sight, slack
    interior waypoints and self-contact; an empty list means the path passes.
    """
    violations: list[str] = []
    points = [GridCoord(*w) for w in waypoints]
    for a, b in zip(points, points[1:]):
        if not line_of_sight(grid, a, b):
            violations.append(f"segment {tuple(a)}-{tuple(b)} is blocked")
    for prev, cur, nxt in zip(points, points[1:], points[2:]):
        if prev == cur or nxt == cur or not taut_transfer(grid, prev, cur, nxt):
            violations.append(f"waypoint {tuple(cur)} is not taut")
    for i in range(1, len(points)):
        if not no_loop_check(points[:i], points[i]):
            violations.append(f"waypoint {tuple(points[i])} closes a loop")
    return violations


def shortest_taut_length(
    grid: GridMap,
    graph: TangentGraph,
    start: tuple[int, int],
    goal: tuple[int, int],
    *,
    strict_tangency: bool = False,
) -> float | None:
    """Length of the shortest start-goal path over the augmented graph whose
    interior waypoints all pass the edge-transfer check.

    Dijkstra over directed edges ``(previous, current)``, since the check
    depends on the incoming direction. None when the goal is unreachable.
    """
    aug, _ = create_initial_paths(grid, graph, start, goal, strict_tangency=strict_tangency)
    if aug.direct:
        return distance(aug.start, aug.goal)

    goal_id = aug.goal_id
    heap: list[tuple[float, int, int]] = []
    for v in aug.start_links:
        heapq.heappush(heap, (distance(aug.start, aug.coord(v)), aug.start_id, v))
    settled: set[tuple[int, int]] = set()
    while heap:
        cost, prev, cur = heapq.heappop(heap)
        if cur == goal_id:
            return cost
        if (prev, cur) in settled:
            continue
        settled.add((prev, cur))
        here = aug.coord(cur)
        p = aug.coord(prev)
        if cur in aug.goal_links and taut_transfer(grid, p, here, aug.goal):
            heapq.heappush(heap, (cost + distance(here, aug.goal), cur, goal_id))
        for v in aug.neighbours(cur):
            if v == prev or (cur, v) in settled:
                continue
            nxt = aug.coord(v)
            if taut_transfer(grid, p, here, nxt):
                heapq.heappush(heap, (cost + distance(here, nxt), cur, v))
    return None
