"""Tangent graph construction and the ``.tgrf`` binary format.

Node candidates are the corner cells of a map: passable cells touching a
convex obstacle corner, the only places a taut path can bend. A candidate
pair becomes an edge when the two cells see each other and the segment
between them passes the locally-collide check, i.e. it grazes an obstacle
at its ends. By default both ends must graze, since every graph edge joins
two interior waypoints of a path; ``strict_tangency=False`` keeps an edge
when either end does.

Construction evaluates visibility between all candidates once, as a
boolean matrix, using a lock-step numpy version of the supercover walk in
``grid_core``. The locally-collide test reads that matrix for ring cells
that are candidates and walks the few remaining surface ring cells in one
batch per ring offset.
"""
from __future__ import annotations

import logging
import struct
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Iterable, Iterator

import numpy as np

from .config import GRAPH_MAGIC, GRAPH_VERSION
from .grid_core import (
    FRONTIER_OFFSETS,
    GridCoord,
    GridMap,
    corner_mask,
    distance,
    frontier,
    line_of_sight,
    squared_distance,
    surface_mask,
)

logger = logging.getLogger(__name__)

_HEADER = struct.Struct("<4sHIII")
HEADER_SIZE = _HEADER.size  # 18

# Upper bound on candidate pairs evaluated per visibility chunk.
_PAIR_CHUNK = 1 << 20


class GraphFormatError(ValueError):
    """A ``.tgrf`` byte sequence failed validation at byte ``offset``."""

    def __init__(self, offset: int, message: str) -> None:
        super().__init__(f"graph format error at byte {offset}: {message}")
        self.offset = offset


@dataclass(frozen=True)
class TangentGraph:
    """Immutable undirected tangent graph.

    ``nodes`` are ordered row-major by ``(y, x)``; ``adjacency[i]`` is the
    ascending tuple of neighbour indices of node ``i``. ``width`` and
    ``height`` are the dimensions of the map the graph was built from.
    """

    nodes: tuple[GridCoord, ...]
    adjacency: tuple[tuple[int, ...], ...]
    width: int
    height: int

    @property
    def node_count(self) -> int:
        return len(self.nodes)

    @property
    def edge_count(self) -> int:
        return sum(len(a) for a in self.adjacency) // 2

    @cached_property
    def index_of(self) -> dict[GridCoord, int]:
        return {node: i for i, node in enumerate(self.nodes)}

    @cached_property
    def coord_array(self) -> np.ndarray:
        """Node coordinates as an ``(n, 2)`` int64 array of ``(x, y)``."""
        return np.asarray(self.nodes, dtype=np.int64).reshape(-1, 2)

    def edges(self) -> Iterator[tuple[int, int]]:
        """Each undirected edge once, as ``(i, j)`` with ``i < j``."""
        for i, neighbours in enumerate(self.adjacency):
            for j in neighbours:
                if j > i:
                    yield i, j

    def edge_length(self, i: int, j: int) -> float:
        return distance(self.nodes[i], self.nodes[j])

    @classmethod
    def empty(cls, width: int, height: int) -> TangentGraph:
        return cls(nodes=(), adjacency=(), width=width, height=height)


def locally_collide_check(
    grid: GridMap, g1: tuple[int, int], g2: tuple[int, int], *, strict: bool = False
) -> bool:
    """Local collide condition of the segment g1-g2.

    For each ordering (origin, far end) of the two cells, look at the surface
    cells in the far end's frontier: D_O is the longest connection from the
    origin that is blocked, D_F the shortest that is free. The direction
    qualifies when D_O > D_F, and a far end with no unpassable neighbour never
    qualifies. By default either direction suffices; ``strict`` requires both.

    Distances are compared squared, in integers.
    """
    results = []
    for origin, far in ((g1, g2), (g2, g1)):
        ring = frontier(far)
        if all(grid.is_passable(c.x, c.y) for c in ring):
            results.append(False)
            continue
        d_o = 0
        d_f: int | None = None
        for c in ring:
            if not grid.is_surface(c.x, c.y):
                continue
            d2 = squared_distance(origin, c)
            if line_of_sight(grid, origin, c):
                d_f = d2 if d_f is None else min(d_f, d2)
            else:
                d_o = max(d_o, d2)
        results.append(d_f is not None and d_o > d_f)
    return all(results) if strict else any(results)


def visible_set(
    grid: GridMap, g: tuple[int, int], candidates: Iterable[tuple[int, int]]
) -> set[GridCoord]:
    """Candidates other than ``g`` with line of sight to ``g``."""
    g = GridCoord(*g)
    return {
        GridCoord(*c) for c in candidates if tuple(c) != g and line_of_sight(grid, g, c)
    }


def batch_line_of_sight(
    occupancy: np.ndarray, a: np.ndarray, b: np.ndarray
) -> np.ndarray:
    """Vectorized ``line_of_sight`` for many segments at once.

    Parameters
    ----------
    occupancy : np.ndarray
        ``(height, width)`` boolean raster, True = unpassable.
    a, b : np.ndarray
        ``(m, 2)`` integer arrays of in-bounds segment endpoints ``(x, y)``.

    Returns
    -------
    np.ndarray
        ``(m,)`` boolean; True where no touched cell is unpassable.

    All segments advance together one supercover step per loop iteration.
    Segments drop out of the active set as soon as they finish or hit an
    unpassable cell.
    """
    a = np.asarray(a, dtype=np.int64).reshape(-1, 2)
    b = np.asarray(b, dtype=np.int64).reshape(-1, 2)
    x, y = a[:, 0].copy(), a[:, 1].copy()
    nx = np.abs(b[:, 0] - a[:, 0])
    ny = np.abs(b[:, 1] - a[:, 1])
    sx = np.where(b[:, 0] > a[:, 0], 1, -1)
    sy = np.where(b[:, 1] > a[:, 1], 1, -1)
    ix = np.zeros_like(nx)
    iy = np.zeros_like(ny)

    visible = ~occupancy[y, x]
    active = np.flatnonzero(visible)
    while active.size:
        active = active[(ix[active] < nx[active]) | (iy[active] < ny[active])]
        if not active.size:
            break
        decision = (1 + 2 * ix[active]) * ny[active] - (1 + 2 * iy[active]) * nx[active]
        corner = decision == 0
        if corner.any():
            c = active[corner]
            side_hit = occupancy[y[c], x[c] + sx[c]] | occupancy[y[c] + sy[c], x[c]]
            visible[c[side_hit]] = False
        step_x = decision <= 0
        step_y = decision >= 0
        x[active] += np.where(step_x, sx[active], 0)
        ix[active] += step_x
        y[active] += np.where(step_y, sy[active], 0)
        iy[active] += step_y
        hit = occupancy[y[active], x[active]]
        visible[active[hit]] = False
        active = active[visible[active]]
    return visible


def _row_block_pairs(n: int, row_start: int, row_stop: int) -> tuple[np.ndarray, np.ndarray]:
    """Upper-triangle index pairs ``(i, j)``, ``i < j``, for rows in the block."""
    rows = np.arange(row_start, row_stop)
    counts = n - 1 - rows
    total = int(counts.sum())
    ii = np.repeat(rows, counts)
    starts = np.cumsum(counts) - counts
    jj = np.arange(total) - np.repeat(starts, counts) + np.repeat(rows + 1, counts)
    return ii, jj


def _row_blocks(n: int) -> list[tuple[int, int]]:
    blocks = []
    start = 0
    pairs = 0
    for row in range(n):
        pairs += n - 1 - row
        if pairs >= _PAIR_CHUNK:
            blocks.append((start, row + 1))
            start = row + 1
            pairs = 0
    if start < n:
        blocks.append((start, n))
    return blocks


def _visibility_block(
    occupancy: np.ndarray, coords: np.ndarray, row_start: int, row_stop: int
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    ii, jj = _row_block_pairs(len(coords), row_start, row_stop)
    return ii, jj, batch_line_of_sight(occupancy, coords[ii], coords[jj])


def visibility_matrix(
    grid: GridMap, coords: np.ndarray, *, workers: int = 1
) -> np.ndarray:
    """Symmetric ``(n, n)`` line-of-sight matrix between the given cells.

    ``workers > 1`` spreads row blocks over a process pool; the matrix is
    the same either way.
    """
    n = len(coords)
    vis = np.eye(n, dtype=bool)
    blocks = _row_blocks(n)
    occupancy = np.ascontiguousarray(grid.occupancy)
    if workers > 1 and len(blocks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [
                pool.submit(_visibility_block, occupancy, coords, start, stop)
                for start, stop in blocks
            ]
            results = [f.result() for f in futures]
    else:
        results = [_visibility_block(occupancy, coords, start, stop) for start, stop in blocks]
    for ii, jj, ok in results:
        vis[ii[ok], jj[ok]] = True
    vis |= vis.T
    return vis


def _one_way_collide(
    surface_padded: np.ndarray,
    origin_xy: np.ndarray,
    far_xy: np.ndarray,
    sight: Callable[[np.ndarray, np.ndarray, np.ndarray], np.ndarray],
) -> np.ndarray:
    """Vectorized one-direction locally-collide test for ``m`` pairs.

    ``surface_padded`` is the surface raster padded by one cell on each
    side. ``sight(rows, cx, cy)`` answers line of sight from the origins of
    the given pair rows to the cells ``(cx, cy)``; a ring cell equal to the
    origin must come back visible. Callers make sure every far end has an
    unpassable ring cell.
    """
    m = len(far_xy)
    d_o = np.zeros(m, dtype=np.int64)
    d_f = np.full(m, np.iinfo(np.int64).max, dtype=np.int64)
    for dx, dy in FRONTIER_OFFSETS:
        cx = far_xy[:, 0] + dx
        cy = far_xy[:, 1] + dy
        rows = np.flatnonzero(surface_padded[cy + 1, cx + 1])
        if not rows.size:
            continue
        cx, cy = cx[rows], cy[rows]
        seen = sight(rows, cx, cy)
        d2 = (cx - origin_xy[rows, 0]) ** 2 + (cy - origin_xy[rows, 1]) ** 2
        free, blocked = rows[seen], rows[~seen]
        d_f[free] = np.minimum(d_f[free], d2[seen])
        d_o[blocked] = np.maximum(d_o[blocked], d2[~seen])
    return d_o > d_f


def _ring_has_blocked(grid: GridMap, xy: np.ndarray) -> np.ndarray:
    padded = np.pad(grid.occupancy, 1, constant_values=True)
    out = np.zeros(len(xy), dtype=bool)
    for dx, dy in FRONTIER_OFFSETS:
        out |= padded[xy[:, 1] + dy + 1, xy[:, 0] + dx + 1]
    return out


def attachment_mask(
    grid: GridMap, g: tuple[int, int], targets: np.ndarray, *, strict: bool = False
) -> np.ndarray:
    """Which ``targets`` see ``g`` and pass ``locally_collide_check(g, target)``.

    Vectorized over an ``(m, 2)`` array of cells; used to link a query's
    start and goal to the graph nodes. Matches the scalar check exactly.
    """
    targets = np.asarray(targets, dtype=np.int64).reshape(-1, 2)
    m = len(targets)
    if not m:
        return np.zeros(0, dtype=bool)
    occupancy = grid.occupancy
    here = np.broadcast_to(np.asarray(g, dtype=np.int64), (m, 2))
    visible = batch_line_of_sight(occupancy, here, targets)
    rows = np.flatnonzero(visible)
    result = np.zeros(m, dtype=bool)
    if not rows.size:
        return result
    far, origin = targets[rows], here[rows]
    surface_padded = np.pad(surface_mask(grid), 1, constant_values=False)

    def from_origin(sel: np.ndarray, cx: np.ndarray, cy: np.ndarray) -> np.ndarray:
        return batch_line_of_sight(occupancy, origin[sel], np.column_stack([cx, cy]))

    def from_far(sel: np.ndarray, cx: np.ndarray, cy: np.ndarray) -> np.ndarray:
        return batch_line_of_sight(occupancy, far[sel], np.column_stack([cx, cy]))

    forward = _ring_has_blocked(grid, far) & _one_way_collide(surface_padded, origin, far, from_origin)
    if _ring_has_blocked(grid, origin[:1])[0]:
        backward = _one_way_collide(surface_padded, far, origin, from_far)
    else:
        backward = np.zeros(len(rows), dtype=bool)
    result[rows] = (forward & backward) if strict else (forward | backward)
    return result


def build_tangent_graph(
    grid: GridMap, *, strict_tangency: bool = True, workers: int = 1
) -> TangentGraph:
    """Build the tangent graph of ``grid``.

    Parameters
    ----------
    grid : GridMap
        Source map.
    strict_tangency : bool
        Require the locally-collide condition at both ends of an edge.
        False keeps an edge when either end passes.
    workers : int
        Processes used for the visibility matrix. 1 keeps everything
        in-process; results are identical for any value.

    Returns
    -------
    TangentGraph
        Graph with row-major node order; candidates without edges are dropped.
    """
    t0 = time.perf_counter()
    ys, xs = np.nonzero(corner_mask(grid))
    coords = np.column_stack([xs, ys]).astype(np.int64)
    n = len(coords)
    if n < 2:
        logger.info("Tangent graph: %d corner candidates, no edges possible", n)
        return TangentGraph.empty(grid.width, grid.height)

    vis = visibility_matrix(grid, coords, workers=workers)
    index_raster = np.full((grid.height + 2, grid.width + 2), -1, dtype=np.int64)
    index_raster[ys + 1, xs + 1] = np.arange(n)
    surface_padded = np.pad(surface_mask(grid), 1, constant_values=False)
    occupancy = grid.occupancy

    ii, jj = np.nonzero(np.triu(vis, k=1))

    def sight_from(origin: np.ndarray) -> Callable[[np.ndarray, np.ndarray, np.ndarray], np.ndarray]:
        def sight(rows: np.ndarray, cx: np.ndarray, cy: np.ndarray) -> np.ndarray:
            src = origin[rows]
            ring_idx = index_raster[cy + 1, cx + 1]
            out = np.zeros(len(rows), dtype=bool)
            known = ring_idx >= 0
            out[known] = vis[src[known], ring_idx[known]]
            walk = ~known
            if walk.any():
                out[walk] = batch_line_of_sight(
                    occupancy, coords[src[walk]], np.column_stack([cx[walk], cy[walk]])
                )
            return out
        return sight

    # Every far end is a corner cell, so its ring holds an unpassable cell.
    forward = _one_way_collide(surface_padded, coords[ii], coords[jj], sight_from(ii))
    # The second direction only matters where the first has not decided.
    pending = np.flatnonzero(forward if strict_tangency else ~forward)
    bi, bj = ii[pending], jj[pending]
    backward = _one_way_collide(surface_padded, coords[bj], coords[bi], sight_from(bj))
    keep = forward.copy()
    keep[pending] = backward
    ei, ej = ii[keep], jj[keep]

    used = np.zeros(n, dtype=bool)
    used[ei] = True
    used[ej] = True
    new_index = np.cumsum(used) - 1
    nodes = tuple(GridCoord(int(x), int(y)) for x, y in coords[used])
    neighbours: list[list[int]] = [[] for _ in nodes]
    for a, b in zip(new_index[ei].tolist(), new_index[ej].tolist()):
        neighbours[a].append(b)
        neighbours[b].append(a)
    graph = TangentGraph(
        nodes=nodes,
        adjacency=tuple(tuple(sorted(adj)) for adj in neighbours),
        width=grid.width,
        height=grid.height,
    )
    logger.info(
        "Tangent graph: %d candidates, %d visible pairs -> %d nodes, %d edges in %.1f ms",
        n, len(ii), graph.node_count, graph.edge_count, (time.perf_counter() - t0) * 1000,
    )
    return graph


def graph_violations(
    grid: GridMap, graph: TangentGraph, *, strict_tangency: bool = True
) -> list[str]:
    """Re-check every graph invariant against ``grid``.

    Returns a list of human-readable problems; empty means the graph is valid.
    """
    errors: list[str] = []
    if (graph.width, graph.height) != (grid.width, grid.height):
        errors.append(
            f"graph dims {graph.width}x{graph.height} differ from map dims "
            f"{grid.width}x{grid.height}"
        )
        return errors
    corners = corner_mask(grid)
    for i, node in enumerate(graph.nodes):
        if not corners[node.y, node.x]:
            errors.append(f"node {i} {tuple(node)} is not a corner cell")
        if not graph.adjacency[i]:
            errors.append(f"node {i} {tuple(node)} has no edges")
    for i, neighbours in enumerate(graph.adjacency):
        for j in neighbours:
            if j == i:
                errors.append(f"self-loop at node {i}")
            elif i not in graph.adjacency[j]:
                errors.append(f"asymmetric edge {i}->{j}")
    for i, j in graph.edges():
        a, b = graph.nodes[i], graph.nodes[j]
        if not line_of_sight(grid, a, b):
            errors.append(f"edge {tuple(a)}-{tuple(b)} has no line of sight")
        elif not locally_collide_check(grid, a, b, strict=strict_tangency):
            errors.append(f"edge {tuple(a)}-{tuple(b)} fails the locally-collide check")
    return errors


def serialize_graph(graph: TangentGraph) -> bytes:
    """Little-endian ``.tgrf`` encoding; deterministic for a given graph."""
    header = _HEADER.pack(GRAPH_MAGIC, GRAPH_VERSION, graph.width, graph.height, graph.node_count)
    coords = np.asarray(graph.nodes, dtype="<u4").reshape(-1, 2).tobytes()
    words: list[int] = []
    for neighbours in graph.adjacency:
        words.append(len(neighbours))
        words.extend(neighbours)
    return header + coords + np.asarray(words, dtype="<u4").tobytes()


def deserialize_graph(data: bytes) -> TangentGraph:
    """Decode and validate a ``.tgrf`` byte sequence.

    Raises
    ------
    GraphFormatError
        Bad magic or version, truncation, trailing bytes, coordinates outside
        the stored dimensions, duplicate nodes, out-of-range neighbours,
        self-loops, unsorted or duplicate adjacency entries, or asymmetric
        adjacency. The error carries the offending byte offset.
    """
    data = bytes(data)
    if len(data) < HEADER_SIZE:
        raise GraphFormatError(len(data), f"truncated header ({len(data)} of {HEADER_SIZE} bytes)")
    magic, version, width, height, n = _HEADER.unpack_from(data, 0)
    if magic != GRAPH_MAGIC:
        raise GraphFormatError(0, f"bad magic {magic!r}, expected {GRAPH_MAGIC!r}")
    if version != GRAPH_VERSION:
        raise GraphFormatError(4, f"unsupported version {version}, expected {GRAPH_VERSION}")

    payload = data[HEADER_SIZE : HEADER_SIZE + 4 * ((len(data) - HEADER_SIZE) // 4)]
    words = np.frombuffer(payload, dtype="<u4") if payload else np.zeros(0, dtype="<u4")
    total_words = len(words)

    def offset_of(word: int) -> int:
        return HEADER_SIZE + 4 * word

    if total_words < 2 * n:
        raise GraphFormatError(len(data), f"truncated node table: {n} nodes need {8 * n} bytes")
    coord_words = words[: 2 * n].astype(np.int64).reshape(n, 2)
    for i, (x, y) in enumerate(coord_words.tolist()):
        if x >= width:
            raise GraphFormatError(offset_of(2 * i), f"node {i} x={x} outside width {width}")
        if y >= height:
            raise GraphFormatError(offset_of(2 * i + 1), f"node {i} y={y} outside height {height}")
    nodes = tuple(GridCoord(int(x), int(y)) for x, y in coord_words.tolist())
    if len(set(nodes)) != n:
        seen: set[GridCoord] = set()
        for i, node in enumerate(nodes):
            if node in seen:
                raise GraphFormatError(offset_of(2 * i), f"duplicate node {tuple(node)}")
            seen.add(node)

    adjacency: list[tuple[int, ...]] = []
    list_start: list[int] = []
    pos = 2 * n
    flat = words.tolist()
    for i in range(n):
        if pos >= total_words:
            raise GraphFormatError(len(data), f"truncated adjacency at node {i}")
        degree = flat[pos]
        list_start.append(pos + 1)
        if pos + 1 + degree > total_words:
            raise GraphFormatError(len(data), f"truncated adjacency list of node {i}")
        neighbours = flat[pos + 1 : pos + 1 + degree]
        for k, j in enumerate(neighbours):
            where = offset_of(pos + 1 + k)
            if j >= n:
                raise GraphFormatError(where, f"neighbour index {j} >= node count {n}")
            if j == i:
                raise GraphFormatError(where, f"self-loop at node {i}")
            if k and j <= neighbours[k - 1]:
                raise GraphFormatError(where, f"adjacency of node {i} not strictly ascending")
        adjacency.append(tuple(neighbours))
        pos += 1 + degree

    consumed = offset_of(pos)
    if consumed != len(data):
        raise GraphFormatError(consumed, f"{len(data) - consumed} trailing bytes")

    neighbour_sets = [set(adj) for adj in adjacency]
    for i, adj in enumerate(adjacency):
        for k, j in enumerate(adj):
            if i not in neighbour_sets[j]:
                raise GraphFormatError(
                    offset_of(list_start[i] + k), f"asymmetric edge {i}->{j}"
                )
    return TangentGraph(nodes=nodes, adjacency=tuple(adjacency), width=width, height=height)
