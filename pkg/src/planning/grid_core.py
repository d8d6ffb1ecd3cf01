"""Grid-space primitives: MovingAI map parsing, occupancy queries, and the
geometric predicates (supercover trace, line of sight, distance, angle) that
the tangent graph and the path search are built on.

Coordinates are ``(x, y)`` = (column, row) and a cell's centre sits at its
integer coordinate. Every cell outside the map counts as unpassable.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import Iterable, Iterator, NamedTuple

import numpy as np
from scipy import ndimage

from .config import KNOWN_TERRAIN, PASSABLE_TERRAIN

logger = logging.getLogger(__name__)


class GridCoord(NamedTuple):
    """Integer cell coordinate: ``x`` is the column, ``y`` the row."""

    x: int
    y: int


# Moore ring around a cell, row-major, centre excluded.
FRONTIER_OFFSETS: tuple[tuple[int, int], ...] = tuple(
    (dx, dy) for dy in (-1, 0, 1) for dx in (-1, 0, 1) if (dx, dy) != (0, 0)
)

_RING_KERNEL = np.array([[1, 1, 1], [1, 0, 1], [1, 1, 1]], dtype=np.int16)


class MapFormatError(ValueError):
    """MovingAI map text could not be parsed; ``line`` is 1-based."""

    def __init__(self, line: int, message: str) -> None:
        super().__init__(f"map parse error at line {line}: {message}")
        self.line = line


@dataclass(frozen=True, eq=False)
class GridMap:
    """Read-only occupancy raster.

    Attributes
    ----------
    width, height : int
        Map dimensions in cells.
    occupancy : np.ndarray
        Boolean array of shape ``(height, width)``; True marks an unpassable
        cell. Stored as a non-writeable copy so a map can be shared freely.
    """

    width: int
    height: int
    occupancy: np.ndarray

    def __post_init__(self) -> None:
        if self.width <= 0 or self.height <= 0:
            raise ValueError(f"map dimensions must be positive, got {self.width}x{self.height}")
        occ = np.array(self.occupancy, dtype=bool)
        if occ.shape != (self.height, self.width):
            raise ValueError(
                f"occupancy shape {occ.shape} does not match height x width "
                f"({self.height}, {self.width})"
            )
        occ.flags.writeable = False
        object.__setattr__(self, "occupancy", occ)

    @classmethod
    def from_rows(cls, rows: Iterable[str]) -> GridMap:
        """Build a map from terrain rows (row 0 first), MovingAI characters."""
        rows = list(rows)
        if not rows:
            raise ValueError("from_rows needs at least one row")
        width = len(rows[0])
        if any(len(r) != width for r in rows):
            raise ValueError("from_rows: all rows must have the same length")
        occ = [[ch not in PASSABLE_TERRAIN for ch in r] for r in rows]
        return cls(width=width, height=len(rows), occupancy=np.array(occ, dtype=bool))

    @cached_property
    def blocked_rows(self) -> list[list[bool]]:
        """Occupancy as nested Python lists; scalar lookups on it are much
        cheaper than indexing the numpy array one cell at a time."""
        return self.occupancy.tolist()

    @cached_property
    def surface_rows(self) -> list[list[bool]]:
        return surface_mask(self).tolist()

    def is_surface(self, x: int, y: int) -> bool:
        if not (0 <= x < self.width and 0 <= y < self.height):
            return False
        return self.surface_rows[y][x]

    @cached_property
    def passable_count(self) -> int:
        return int(self.occupancy.size - np.count_nonzero(self.occupancy))

    def in_bounds(self, x: int, y: int) -> bool:
        return 0 <= x < self.width and 0 <= y < self.height

    def is_passable(self, x: int, y: int) -> bool:
        if not (0 <= x < self.width and 0 <= y < self.height):
            return False
        return not self.blocked_rows[y][x]


class Segment(NamedTuple):
    """Continuous segment between two cell centres and the cells it touches."""

    a: GridCoord
    b: GridCoord
    cells: tuple[GridCoord, ...]


def parse_movingai_map(text: str | Iterable[str]) -> GridMap:
    """Parse a MovingAI ``.map`` document.

    The header is ``type <name>``, ``height H``, ``width W`` (either order),
    then the literal line ``map`` followed by H rows of W terrain characters.
    '.', 'G' and 'S' are passable; '@', 'O', 'T' and 'W' are not.

    Raises
    ------
    MapFormatError
        Malformed header, wrong row count or length, or an unknown terrain
        character. The message names the offending 1-based line.
    """
    lines = text.splitlines() if isinstance(text, str) else [ln.rstrip("\r\n") for ln in text]

    def header_field(idx: int) -> tuple[str, str]:
        if idx >= len(lines):
            raise MapFormatError(idx + 1, "unexpected end of header")
        parts = lines[idx].split()
        if len(parts) != 2:
            raise MapFormatError(idx + 1, f"expected '<key> <value>', got {lines[idx]!r}")
        return parts[0].lower(), parts[1]

    key, map_type = header_field(0)
    if key != "type":
        raise MapFormatError(1, f"expected 'type', got {key!r}")
    if map_type != "octile":
        logger.warning("map type %r is not 'octile'; parsing as a plain occupancy grid", map_type)

    dims: dict[str, int] = {}
    for idx in (1, 2):
        key, value = header_field(idx)
        if key not in ("height", "width") or key in dims:
            raise MapFormatError(idx + 1, f"expected 'height' and 'width' fields, got {key!r}")
        if not value.isdigit() or int(value) <= 0:
            raise MapFormatError(idx + 1, f"{key} must be a positive integer, got {value!r}")
        dims[key] = int(value)
    height, width = dims["height"], dims["width"]

    if len(lines) < 4 or lines[3].strip().lower() != "map":
        raise MapFormatError(4, "expected the line 'map'")

    body = lines[4:]
    while body and not body[-1].strip():
        body.pop()
    if len(body) != height:
        raise MapFormatError(
            4 + min(len(body), height) + 1,
            f"expected {height} rows, found {len(body)}",
        )

    occupancy = np.empty((height, width), dtype=bool)
    for row_idx, row in enumerate(body):
        line_no = row_idx + 5
        if len(row) != width:
            raise MapFormatError(line_no, f"expected {width} characters, found {len(row)}")
        unknown = set(row) - KNOWN_TERRAIN
        if unknown:
            col = min(row.index(ch) for ch in unknown)
            raise MapFormatError(
                line_no, f"unknown terrain character {row[col]!r} at column {col}"
            )
        occupancy[row_idx] = [ch not in PASSABLE_TERRAIN for ch in row]

    return GridMap(width=width, height=height, occupancy=occupancy)


def load_map(path: Path | str) -> GridMap:
    """Read and parse a MovingAI map file."""
    path = Path(path)
    grid = parse_movingai_map(path.read_text())
    logger.debug("loaded %s: %dx%d, %d passable", path.name, grid.width, grid.height,
                 grid.passable_count)
    return grid


def is_passable(grid: GridMap, g: tuple[int, int]) -> bool:
    """False outside the map, otherwise the negated occupancy of ``g``."""
    return grid.is_passable(g[0], g[1])


def frontier(g: tuple[int, int]) -> list[GridCoord]:
    """The 8 cells of the Moore ring around ``g``, possibly out of bounds."""
    x, y = g
    return [GridCoord(x + dx, y + dy) for dx, dy in FRONTIER_OFFSETS]


def _ring_counts(raster: np.ndarray) -> np.ndarray:
    """Per cell, how many in-map frontier cells are True in ``raster``."""
    return ndimage.convolve(raster.astype(np.int16), _RING_KERNEL, mode="constant", cval=0)


def surface_mask(grid: GridMap) -> np.ndarray:
    """Boolean raster of surface grids: passable cells whose frontier holds
    both a passable and an unpassable cell of the map.

    Only in-map cells are counted here, so the map border alone does not
    turn a cell into a surface grid.
    """
    blocked = _ring_counts(grid.occupancy)
    free = _ring_counts(~grid.occupancy)
    return ~grid.occupancy & (blocked > 0) & (free > 0)


def surface_grids(grid: GridMap) -> set[GridCoord]:
    ys, xs = np.nonzero(surface_mask(grid))
    return {GridCoord(int(x), int(y)) for x, y in zip(xs, ys)}


def corner_mask(grid: GridMap) -> np.ndarray:
    """Boolean raster of corner cells: passable cells touching a convex
    obstacle corner.

    A lattice corner is convex when exactly one of the four cells meeting
    there is unpassable, cells outside the map counting as unpassable. A
    taut path can only bend next to such a corner, so these cells are the
    tangent graph's node candidates. Every corner cell is a surface grid.
    """
    padded = np.pad(grid.occupancy, 1, constant_values=True).astype(np.int8)
    # Corner (r, c) sits between padded rows r, r+1 and columns c, c+1.
    count = padded[:-1, :-1] + padded[1:, :-1] + padded[:-1, 1:] + padded[1:, 1:]
    convex = count == 1
    touches = convex[:-1, :-1] | convex[:-1, 1:] | convex[1:, :-1] | convex[1:, 1:]
    return ~grid.occupancy & touches


def corner_cells(grid: GridMap) -> set[GridCoord]:
    ys, xs = np.nonzero(corner_mask(grid))
    return {GridCoord(int(x), int(y)) for x, y in zip(xs, ys)}


def supercover(ax: int, ay: int, bx: int, by: int) -> Iterator[tuple[int, int]]:
    """Yield every cell whose closed square the centre-to-centre segment
    touches, starting at ``a`` and ending at ``b``.

    The next crossing is picked by comparing, in exact integer arithmetic,
    where the segment meets the next vertical and horizontal cell boundary.
    A tie means the segment runs through a lattice corner; the two side cells
    are emitted before the diagonal one.
    """
    nx, ny = abs(bx - ax), abs(by - ay)
    sx = 1 if bx > ax else -1
    sy = 1 if by > ay else -1
    x, y = ax, ay
    ix = iy = 0
    yield x, y
    while ix < nx or iy < ny:
        decision = (1 + 2 * ix) * ny - (1 + 2 * iy) * nx
        if decision == 0:
            yield x + sx, y
            yield x, y + sy
            x += sx
            y += sy
            ix += 1
            iy += 1
        elif decision < 0:
            x += sx
            ix += 1
        else:
            y += sy
            iy += 1
        yield x, y


def trace_segment(a: tuple[int, int], b: tuple[int, int]) -> Segment:
    cells = tuple(GridCoord(x, y) for x, y in supercover(a[0], a[1], b[0], b[1]))
    return Segment(a=GridCoord(*a), b=GridCoord(*b), cells=cells)


def line_of_sight(grid: GridMap, a: tuple[int, int], b: tuple[int, int]) -> bool:
    """True iff no cell touched by the segment a->b is unpassable."""
    width, height = grid.width, grid.height
    rows = grid.blocked_rows
    for x, y in supercover(a[0], a[1], b[0], b[1]):
        if not (0 <= x < width and 0 <= y < height) or rows[y][x]:
            return False
    return True


def squared_distance(a: tuple[int, int], b: tuple[int, int]) -> int:
    dx, dy = a[0] - b[0], a[1] - b[1]
    return dx * dx + dy * dy


def distance(a: tuple[int, int], b: tuple[int, int]) -> float:
    """Euclidean distance between cell centres, in cell units."""
    return math.hypot(a[0] - b[0], a[1] - b[1])


def vector_angle(u: tuple[float, float], v: tuple[float, float]) -> float:
    """Unsigned angle between two non-zero vectors, in [0, pi]."""
    nu = math.hypot(u[0], u[1])
    nv = math.hypot(v[0], v[1])
    if nu == 0.0 or nv == 0.0:
        raise ValueError(f"angle undefined for zero-length vector ({u}, {v})")
    cos = (u[0] * v[0] + u[1] * v[1]) / (nu * nv)
    return math.acos(min(1.0, max(-1.0, cos)))


def angle(g1: tuple[int, int], g2: tuple[int, int], g3: tuple[int, int]) -> float:
    """Angle at ``g2`` between the rays g2->g1 and g2->g3, in radians.

    Raises
    ------
    ValueError
        If ``g1`` or ``g3`` coincides with ``g2``.
    """
    if tuple(g1) == tuple(g2) or tuple(g3) == tuple(g2):
        raise ValueError(f"angle undefined: zero-length ray at {tuple(g2)}")
    return vector_angle((g1[0] - g2[0], g1[1] - g2[1]), (g3[0] - g2[0], g3[1] - g2[1]))
