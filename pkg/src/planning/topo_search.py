"""Single-search extraction of K topologically distinct, locally shortest paths.

A query attaches start and goal to the tangent graph through a per-query
overlay, then runs a level-synchronous breadth-first search over partial
paths. Each level keeps only the K best paths by A*-style priority; the rest
wait in a secondary heap that refills the level when it runs short.

Two constraints prune extensions:

- the edge-transfer constraint: a waypoint must turn, and the turn must
  wrap an obstacle cell next to it (``taut_transfer``, a tightening of
  ``gets_closer_to_obstacle``),
- the iteration constraint: no repeated waypoint and no self-contact
  (``no_loop_check``).

Every partial path carries a homotopy class key (see ``homotopy``). Finished
paths are kept one per class, and a partial path is dropped when another
one with the same last two waypoints and class is at least as short.
"""
from __future__ import annotations

import heapq
import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Literal, NamedTuple, Sequence

import numpy as np

from .config import MAX_EXPANSIONS_FACTOR
from .grid_core import (
    FRONTIER_OFFSETS,
    GridCoord,
    GridMap,
    angle,
    distance,
    frontier,
    line_of_sight,
    vector_angle,
)
from .homotopy import KEY_MODULUS, ObstacleAnchors, obstacle_anchors
from .tangent_graph import TangentGraph, attachment_mask

logger = logging.getLogger(__name__)

# Below this norm the cone bisector is treated as vanished (straight-through turn).
_BISECTOR_EPS = 1e-9

StopReason = Literal["max_expansions", "time_budget"]


class EndpointError(ValueError):
    """Start or goal is out of bounds, unpassable, or start equals goal."""


@dataclass(frozen=True)
class PartialPath:
    """A waypoint polyline from the start, possibly ending at the goal.

    ``priority`` is ``length`` plus the straight-line distance from the last
    waypoint to the goal. ``node_ids`` mirrors ``waypoints`` in the augmented
    index space (graph nodes, then start, then goal). ``class_key`` is the
    homotopy class key of the polyline.
    """

    waypoints: tuple[GridCoord, ...]
    length: float
    priority: float
    finished: bool = False
    node_ids: tuple[int, ...] = field(default=(), compare=False, repr=False)
    class_key: int = field(default=0, compare=False, repr=False)

    @property
    def last(self) -> GridCoord:
        return self.waypoints[-1]

    def sort_key(self) -> tuple[float, float, tuple[GridCoord, ...]]:
        return (self.priority, self.length, self.waypoints)

    def extend(
        self, coord: GridCoord, node_id: int, goal: GridCoord, crossing: int = 0
    ) -> PartialPath:
        length = self.length + distance(self.last, coord)
        return PartialPath(
            waypoints=self.waypoints + (coord,),
            length=length,
            priority=length + distance(coord, goal),
            finished=coord == goal,
            node_ids=self.node_ids + (node_id,),
            class_key=(self.class_key + crossing) % KEY_MODULUS,
        )


@dataclass(frozen=True)
class SearchConfig:
    """Search parameters.

    Attributes
    ----------
    k : int
        Required number of finished paths.
    max_expansions : int | None
        Cap on BFS iterations; None means ``10 * k * (1 + node count)``.
    strict_tangency : bool
        Require the locally-collide condition at both ends when attaching
        start and goal.
    priority_limit : bool
        Keep at most ``k`` paths per level. False runs the plain BFS.
    time_budget : float | None
        Wall-clock limit in seconds; exceeding it truncates the search.
    workers : int
        Threads used to expand one level. Results do not depend on it.
    """

    k: int
    max_expansions: int | None = None
    strict_tangency: bool = False
    priority_limit: bool = True
    time_budget: float | None = None
    workers: int = 1

    def __post_init__(self) -> None:
        if self.k < 1:
            raise ValueError(f"k must be >= 1, got {self.k}")
        if self.max_expansions is not None and self.max_expansions < 1:
            raise ValueError(f"max_expansions must be >= 1, got {self.max_expansions}")
        if self.time_budget is not None and self.time_budget <= 0:
            raise ValueError(f"time_budget must be positive, got {self.time_budget}")
        if self.workers < 1:
            raise ValueError(f"workers must be >= 1, got {self.workers}")

    def expansion_limit(self, node_count: int) -> int:
        if self.max_expansions is not None:
            return self.max_expansions
        return MAX_EXPANSIONS_FACTOR * self.k * (1 + node_count)


class QueueSnapshot(NamedTuple):
    """Queue sizes at the start of one BFS iteration."""

    primary: int
    secondary: int


@dataclass
class SearchResult:
    """Finished paths, one per homotopy class, plus search telemetry.

    ``stop_reason`` names the limit that ended the search early, or is None
    when it ended because ``k`` classes were found or the queues ran dry.
    """

    finished: list[PartialPath]
    queue_trace: list[QueueSnapshot]
    elapsed: float
    iterations: int
    stop_reason: StopReason | None
    k: int
    etc_checks: int = 0
    loop_checks: int = 0
    loop_seconds: float = 0.0
    pruned: int = 0

    @property
    def truncated(self) -> bool:
        return self.stop_reason is not None

    @property
    def peak_primary(self) -> int:
        return max((s.primary for s in self.queue_trace), default=0)

    @property
    def peak_secondary(self) -> int:
        return max((s.secondary for s in self.queue_trace), default=0)

    @property
    def paths(self) -> list[list[GridCoord]]:
        return [list(p.waypoints) for p in self.finished]

    def to_dict(self, *, include_timing: bool = True) -> dict[str, Any]:
        """Stable JSON layout: ``{"paths": [...], "telemetry": {...}}``.

        ``include_timing=False`` drops the wall-clock fields so two runs of
        the same query compare equal.
        """
        telemetry: dict[str, Any] = {
            "elapsed_ms": round(self.elapsed * 1000, 3),
            "iterations": self.iterations,
            "peak_queue": self.peak_primary,
            "peak_secondary": self.peak_secondary,
            "truncated": self.truncated,
            "stop_reason": self.stop_reason,
            "constraint_checks": {
                "edge_transfer": self.etc_checks,
                "no_loop": self.loop_checks,
                "no_loop_ms": round(self.loop_seconds * 1000, 3),
                "dominated": self.pruned,
            },
        }
        if not include_timing:
            del telemetry["elapsed_ms"]
            del telemetry["constraint_checks"]["no_loop_ms"]
        return {
            "paths": [
                {"length": p.length, "waypoints": [[w.x, w.y] for w in p.waypoints]}
                for p in self.finished
            ],
            "telemetry": telemetry,
        }


@dataclass(frozen=True)
class AugmentedGraph:
    """Per-query view of a tangent graph with start and goal attached.

    Start gets index ``n`` and goal ``n + 1``; the base graph is untouched.
    Graph nodes sitting on the start or goal cell are ``excluded`` and never
    appear as intermediate waypoints.
    """

    graph: TangentGraph
    start: GridCoord
    goal: GridCoord
    start_links: tuple[int, ...]
    goal_links: frozenset[int]
    direct: bool
    excluded: frozenset[int] = frozenset()

    @property
    def start_id(self) -> int:
        return self.graph.node_count

    @property
    def goal_id(self) -> int:
        return self.graph.node_count + 1

    def coord(self, node_id: int) -> GridCoord:
        if node_id == self.start_id:
            return self.start
        if node_id == self.goal_id:
            return self.goal
        return self.graph.nodes[node_id]

    def neighbours(self, node_id: int) -> tuple[int, ...]:
        """Outgoing overlay edges: start links from the start, base adjacency
        (minus excluded nodes) from graph nodes. Goal links are handled by
        the caller since reaching the goal finishes a path."""
        if node_id == self.start_id:
            return self.start_links
        if node_id == self.goal_id:
            return ()
        adjacency = self.graph.adjacency[node_id]
        if not self.excluded:
            return adjacency
        return tuple(v for v in adjacency if v not in self.excluded)




def _cross(o: tuple[int, int], a: tuple[int, int], b: tuple[int, int]) -> int:
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def _on_segment(p: tuple[int, int], a: tuple[int, int], b: tuple[int, int]) -> bool:
    """``p`` is collinear with a-b; is it inside their bounding box?"""
    return min(a[0], b[0]) <= p[0] <= max(a[0], b[0]) and min(a[1], b[1]) <= p[1] <= max(a[1], b[1])


def segments_touch(
    p1: tuple[int, int], p2: tuple[int, int], q1: tuple[int, int], q2: tuple[int, int]
) -> bool:
    """Closed-segment intersection test in exact integer arithmetic."""
    d1 = _cross(q1, q2, p1)
    d2 = _cross(q1, q2, p2)
    d3 = _cross(p1, p2, q1)
    d4 = _cross(p1, p2, q2)
    if ((d1 > 0 and d2 < 0) or (d1 < 0 and d2 > 0)) and ((d3 > 0 and d4 < 0) or (d3 < 0 and d4 > 0)):
        return True
    return (
        (d1 == 0 and _on_segment(p1, q1, q2))
        or (d2 == 0 and _on_segment(p2, q1, q2))
        or (d3 == 0 and _on_segment(q1, p1, p2))
        or (d4 == 0 and _on_segment(q2, p1, p2))
    )


def no_loop_check(path: PartialPath | Sequence[tuple[int, int]], next_: tuple[int, int]) -> bool:
    """True iff appending ``next_`` keeps the polyline loop-free.

    Rejects a repeated waypoint, any contact between the new segment and an
    earlier non-adjacent segment, and a fold back along the previous segment.
    """
    waypoints = path.waypoints if isinstance(path, PartialPath) else tuple(path)
    next_ = tuple(next_)
    if any(tuple(w) == next_ for w in waypoints):
        return False
    if len(waypoints) < 2:
        return True
    last = waypoints[-1]
    before = waypoints[-2]
    if _cross(last, before, next_) == 0:
        # Collinear with the previous segment: reject unless it continues forward.
        dot = (before[0] - last[0]) * (next_[0] - last[0]) + (before[1] - last[1]) * (next_[1] - last[1])
        if dot > 0:
            return False
    for i in range(len(waypoints) - 2):
        if segments_touch(last, next_, waypoints[i], waypoints[i + 1]):
            return False
    return True


def gets_closer_to_obstacle(
    grid: GridMap, g1: tuple[int, int], g2: tuple[int, int], g3: tuple[int, int]
) -> bool:
    """Whether the turn g1 -> g2 -> g3 wraps an obstacle cell next to g2.

    The turning cone has apex ``g2`` and half-angle ``angle(g1, g2, g3) / 2``
    around the bisector of the unit rays towards g1 and g3. The turn is taut
    when an unpassable frontier cell of g2 lies strictly inside that cone.
    For a straight-through transfer the bisector vanishes and any unpassable
    frontier cell counts.

    Raises
    ------
    ValueError
        If g1 or g3 coincides with g2.
    """
    half = angle(g1, g2, g3) / 2.0
    ux, uy = g1[0] - g2[0], g1[1] - g2[1]
    vx, vy = g3[0] - g2[0], g3[1] - g2[1]
    nu, nv = math.hypot(ux, uy), math.hypot(vx, vy)
    bx, by = ux / nu + vx / nv, uy / nu + vy / nv
    blocked = [c for c in frontier(g2) if not grid.is_passable(c.x, c.y)]
    if math.hypot(bx, by) < _BISECTOR_EPS:
        return bool(blocked)
    return any(
        vector_angle((bx, by), (c.x - g2[0], c.y - g2[1])) < half for c in blocked
    )


def _square_meets_triangle(
    c: tuple[int, int], g1: tuple[int, int], g2: tuple[int, int], g3: tuple[int, int]
) -> bool:
    """Whether the closed unit square of cell ``c`` meets the closed triangle
    g1 g2 g3.

    Separating-axis test in doubled integer coordinates, so square corners
    stay on the lattice.
    """
    tri = ((2 * g1[0], 2 * g1[1]), (2 * g2[0], 2 * g2[1]), (2 * g3[0], 2 * g3[1]))
    cx, cy = 2 * c[0], 2 * c[1]
    square = ((cx - 1, cy - 1), (cx + 1, cy - 1), (cx - 1, cy + 1), (cx + 1, cy + 1))
    axes = [(1, 0), (0, 1)]
    for (px, py), (qx, qy) in zip(tri, tri[1:] + tri[:1]):
        axes.append((py - qy, qx - px))
    for ax, ay in axes:
        s = [ax * x + ay * y for x, y in square]
        t = [ax * x + ay * y for x, y in tri]
        if max(s) < min(t) or max(t) < min(s):
            return False
    return True


def taut_transfer(
    grid: GridMap, g1: tuple[int, int], g2: tuple[int, int], g3: tuple[int, int]
) -> bool:
    """Edge-transfer check used by the search: is g2 a taut bend of g1 -> g2 -> g3?

    The path must actually turn at g2 (collinear transfers fail), and some
    unpassable frontier cell of g2 must lie strictly inside the turning
    cone with its square meeting the triangle g1 g2 g3, so that the
    shortcut g1 -> g3 would have to cross it. Whenever this holds,
    ``gets_closer_to_obstacle`` holds too. Exact integer arithmetic.
    """
    x, y = g2
    ax, ay = g1[0] - x, g1[1] - y
    bx, by = g3[0] - x, g3[1] - y
    turn = ax * by - ay * bx
    if turn == 0:
        return False
    for dx, dy in FRONTIER_OFFSETS:
        if grid.is_passable(x + dx, y + dy):
            continue
        left = ax * dy - ay * dx
        right = dx * by - dy * bx
        if turn > 0:
            if left <= 0 or right <= 0:
                continue
        elif left >= 0 or right >= 0:
            continue
        if _square_meets_triangle((x + dx, y + dy), g1, g2, g3):
            return True
    return False


def validate_endpoints(grid: GridMap, start: tuple[int, int], goal: tuple[int, int]) -> None:
    for label, g in (("start", start), ("goal", goal)):
        if not grid.in_bounds(g[0], g[1]):
            raise EndpointError(f"{label} {tuple(g)} is outside the {grid.width}x{grid.height} map")
        if not grid.is_passable(g[0], g[1]):
            raise EndpointError(f"{label} {tuple(g)} is on an unpassable cell")
    if tuple(start) == tuple(goal):
        raise EndpointError(f"start and goal are the same cell {tuple(start)}")


def create_initial_paths(
    grid: GridMap,
    graph: TangentGraph,
    start: tuple[int, int],
    goal: tuple[int, int],
    *,
    strict_tangency: bool = False,
) -> tuple[AugmentedGraph, list[PartialPath]]:
    """Attach start and goal to ``graph`` and emit the initial paths.

    Start links to every visible node passing the locally-collide check, and
    each link yields an initial path ``[start, v]``. Goal links are the
    nodes ``v`` with line of sight to the goal and a passing check on
    ``(v, goal)``. When start sees goal, the direct finished path is
    appended too. An empty list means the query has no solution.

    Raises
    ------
    EndpointError
        Start or goal outside the map, unpassable, or equal.
    """
    validate_endpoints(grid, start, goal)
    start, goal = GridCoord(*start), GridCoord(*goal)
    n = graph.node_count
    excluded = frozenset(
        i for i in (graph.index_of.get(start), graph.index_of.get(goal)) if i is not None
    )

    coords = graph.coord_array
    start_ok = attachment_mask(grid, start, coords, strict=strict_tangency)
    goal_ok = attachment_mask(grid, goal, coords, strict=strict_tangency)
    for i in excluded:
        start_ok[i] = goal_ok[i] = False
    start_links = np.flatnonzero(start_ok).tolist()
    goal_links = frozenset(np.flatnonzero(goal_ok).tolist())

    direct = line_of_sight(grid, start, goal)
    aug = AugmentedGraph(
        graph=graph,
        start=start,
        goal=goal,
        start_links=tuple(start_links),
        goal_links=goal_links,
        direct=direct,
        excluded=excluded,
    )
    anchors = obstacle_anchors(grid)
    origin = PartialPath(waypoints=(start,), length=0.0, priority=distance(start, goal), node_ids=(n,))
    paths = [
        origin.extend(graph.nodes[i], i, goal, anchors.segment_key(start, graph.nodes[i]))
        for i in start_links
    ]
    if direct:
        paths.append(origin.extend(goal, aug.goal_id, goal, anchors.segment_key(start, goal)))
    logger.debug(
        "Query %s -> %s: %d start links, %d goal links, direct=%s",
        tuple(start), tuple(goal), len(start_links), len(goal_links), direct,
    )
    return aug, paths


class _Expander:
    """Applies the transfer constraints for one query.

    Edge-transfer results depend only on the three node ids involved and
    segment crossing keys only on the two end ids; both are cached across
    the whole search.
    """

    def __init__(self, grid: GridMap, aug: AugmentedGraph, anchors: ObstacleAnchors) -> None:
        self.grid = grid
        self.aug = aug
        self.anchors = anchors
        self._etc_cache: dict[tuple[int, int, int], bool] = {}
        self._crossing_cache: dict[tuple[int, int], int] = {}

    def transfer_ok(self, a: int, b: int, c: int) -> bool:
        key = (a, b, c)
        cached = self._etc_cache.get(key)
        if cached is None:
            aug = self.aug
            cached = taut_transfer(self.grid, aug.coord(a), aug.coord(b), aug.coord(c))
            self._etc_cache[key] = cached
        return cached

    def crossing(self, a: int, b: int) -> int:
        key = (a, b)
        cached = self._crossing_cache.get(key)
        if cached is None:
            cached = self.anchors.segment_key(self.aug.coord(a), self.aug.coord(b))
            self._crossing_cache[key] = cached
        return cached

    def finisher(self, path: PartialPath) -> tuple[PartialPath | None, int, int, float]:
        """The path closed at the goal, if its last waypoint links to the goal
        with a taut turn and without a loop."""
        aug = self.aug
        last = path.node_ids[-1]
        if last not in aug.goal_links:
            return None, 0, 0, 0.0
        if not self.transfer_ok(path.node_ids[-2], last, aug.goal_id):
            return None, 1, 0, 0.0
        t0 = time.perf_counter()
        ok = no_loop_check(path, aug.goal)
        loop_seconds = time.perf_counter() - t0
        closed = None
        if ok:
            closed = path.extend(aug.goal, aug.goal_id, aug.goal, self.crossing(last, aug.goal_id))
        return closed, 1, 1, loop_seconds

    def expand(self, path: PartialPath) -> tuple[list[PartialPath], list[PartialPath], int, int, float]:
        """Extensions of one path by a single edge, the finished paths they
        spawn, and constraint counters."""
        aug = self.aug
        prev, last = path.node_ids[-2], path.node_ids[-1]
        extensions: list[PartialPath] = []
        finishers: list[PartialPath] = []
        etc_checks = loop_checks = 0
        loop_seconds = 0.0

        for v in aug.neighbours(last):
            if v == prev:
                continue
            etc_checks += 1
            if not self.transfer_ok(prev, last, v):
                continue
            coord = aug.coord(v)
            loop_checks += 1
            t0 = time.perf_counter()
            ok = no_loop_check(path, coord)
            loop_seconds += time.perf_counter() - t0
            if not ok:
                continue
            extended = path.extend(coord, v, aug.goal, self.crossing(last, v))
            extensions.append(extended)
            closed, etc, loops, loop_s = self.finisher(extended)
            etc_checks += etc
            loop_checks += loops
            loop_seconds += loop_s
            if closed is not None:
                finishers.append(closed)
        return extensions, finishers, etc_checks, loop_checks, loop_seconds


def _expand_level(
    expander: _Expander, primary: list[PartialPath], workers: int
) -> list[tuple[list[PartialPath], list[PartialPath], int, int, float]]:
    if workers > 1 and len(primary) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(expander.expand, primary))
    return [expander.expand(p) for p in primary]


class _ClassTable:
    """Best finished path per homotopy class, and the shortest length seen
    per (previous node, last node, class) state of the partial paths."""

    def __init__(self) -> None:
        self.best: dict[int, PartialPath] = {}
        self._frontier: dict[tuple[int, int, int], float] = {}

    def __len__(self) -> int:
        return len(self.best)

    def offer(self, path: PartialPath) -> None:
        held = self.best.get(path.class_key)
        if held is None or (path.length, path.waypoints) < (held.length, held.waypoints):
            self.best[path.class_key] = path

    def dominated(self, path: PartialPath) -> bool:
        state = (path.node_ids[-2], path.node_ids[-1], path.class_key)
        held = self._frontier.get(state)
        if held is not None and held <= path.length:
            return True
        self._frontier[state] = path.length
        return False


def search_k_paths(
    grid: GridMap,
    graph: TangentGraph,
    start: tuple[int, int],
    goal: tuple[int, int],
    config: SearchConfig,
) -> SearchResult:
    """Find up to ``config.k`` topologically distinct, locally shortest paths.

    Every iteration expands the whole primary queue by one graph edge. A new
    waypoint linked to the goal also spawns a finished path when the turn
    into the goal is taut. Staged extensions are ordered by
    ``(priority, length, waypoints)``, dominated ones are dropped, the best
    ``k`` form the next primary queue and the rest go to the secondary heap,
    which tops the primary queue back up to ``k`` when it runs short.

    Finished paths are kept one per homotopy class, the shortest found. The
    search ends once ``k`` classes are finished, both queues are empty, the
    iteration cap is reached or the time budget is spent; the last two set
    ``stop_reason``. All classes finished in the terminal iteration are
    kept, so more than ``k`` paths may come back. Output is sorted by length.
    """
    t0 = time.perf_counter()
    k = config.k
    aug, initial = create_initial_paths(
        grid, graph, start, goal, strict_tangency=config.strict_tangency
    )
    expander = _Expander(grid, aug, obstacle_anchors(grid))
    limit = config.expansion_limit(graph.node_count)
    table = _ClassTable()

    for p in initial:
        if p.finished:
            table.offer(p)
    primary = sorted((p for p in initial if not p.finished), key=PartialPath.sort_key)
    etc_checks = loop_checks = 0
    loop_seconds = 0.0
    for p in primary:
        table.dominated(p)
        closed, etc, loops, loop_s = expander.finisher(p)
        etc_checks += etc
        loop_checks += loops
        loop_seconds += loop_s
        if closed is not None:
            table.offer(closed)

    secondary: list[tuple[tuple[float, float, tuple[GridCoord, ...]], PartialPath]] = []
    if config.priority_limit:
        for p in primary[k:]:
            heapq.heappush(secondary, (p.sort_key(), p))
        primary = primary[:k]

    trace: list[QueueSnapshot] = []
    iterations = 0
    pruned = 0
    stop_reason: StopReason | None = None
    while len(table) < k:
        if config.priority_limit:
            while len(primary) < k and secondary:
                primary.append(heapq.heappop(secondary)[1])
        if not primary:
            break
        if iterations >= limit:
            stop_reason = "max_expansions"
            break
        if config.time_budget is not None and time.perf_counter() - t0 > config.time_budget:
            stop_reason = "time_budget"
            break

        trace.append(QueueSnapshot(len(primary), len(secondary)))
        logger.debug("iteration %d: primary=%d secondary=%d classes=%d",
                     iterations, len(primary), len(secondary), len(table))
        iterations += 1

        staged: list[PartialPath] = []
        for extensions, finishers, etc, loops, loop_s in _expand_level(expander, primary, config.workers):
            staged.extend(extensions)
            for closed in finishers:
                table.offer(closed)
            etc_checks += etc
            loop_checks += loops
            loop_seconds += loop_s

        staged.sort(key=PartialPath.sort_key)
        kept = [p for p in staged if not table.dominated(p)]
        pruned += len(staged) - len(kept)
        if config.priority_limit:
            primary = kept[:k]
            for p in kept[k:]:
                heapq.heappush(secondary, (p.sort_key(), p))
        else:
            primary = kept

    finished = sorted(table.best.values(), key=lambda p: (p.length, p.waypoints))
    result = SearchResult(
        finished=finished,
        queue_trace=trace,
        elapsed=time.perf_counter() - t0,
        iterations=iterations,
        stop_reason=stop_reason,
        k=k,
        etc_checks=etc_checks,
        loop_checks=loop_checks,
        loop_seconds=loop_seconds,
        pruned=pruned,
    )
    if stop_reason is not None:
        logger.warning(
            "Search %s -> %s stopped by %s after %d iterations with %d/%d paths",
            tuple(start), tuple(goal), stop_reason, iterations, len(finished), k,
        )
    logger.info(
        "Found %d/%d paths in %d iterations (peak primary %d, secondary %d) in %.1f ms",
        len(finished), k, iterations, result.peak_primary, result.peak_secondary,
        result.elapsed * 1000,
    )
    return result


def queue_bound_property(trace: Sequence[QueueSnapshot], k: int) -> bool:
    """True iff the primary queue held at most ``k`` paths at every iteration start."""
    return all(snapshot.primary <= k for snapshot in trace)
