"""Shared test fixtures for tangent-topo-planner."""
from __future__ import annotations

import matplotlib

matplotlib.use("Agg")  # headless backend; render only needs the colormaps

from pathlib import Path
from typing import Callable

import pytest

from src.planning.config import MAPS_DIR
from src.planning.grid_core import GridMap

BERLIN_MAP = MAPS_DIR / "Berlin_1_256.map"


def rows_with_blocks(width: int, height: int, cells: set[tuple[int, int]]) -> list[str]:
    """Terrain rows with '@' at the given (x, y) cells and '.' elsewhere."""
    return ["".join("@" if (x, y) in cells else "." for x in range(width)) for y in range(height)]


def movingai_text(rows: list[str]) -> str:
    return (
        f"type octile\nheight {len(rows)}\nwidth {len(rows[0])}\nmap\n" + "\n".join(rows) + "\n"
    )


@pytest.fixture
def open_map() -> GridMap:
    return GridMap.from_rows(["." * 8] * 8)


@pytest.fixture
def single_cell_map() -> GridMap:
    """8x8 with one unpassable cell at (4, 4)."""
    return GridMap.from_rows(rows_with_blocks(8, 8, {(4, 4)}))


@pytest.fixture
def block_map() -> GridMap:
    """8x8 with a 2x2 obstacle covering (3,3)-(4,4)."""
    return GridMap.from_rows(rows_with_blocks(8, 8, {(3, 3), (4, 3), (3, 4), (4, 4)}))


@pytest.fixture
def two_block_map() -> GridMap:
    """16x8 with 2x2 obstacles at (4,3)-(5,4) and (10,3)-(11,4)."""
    cells = {(x, y) for x in (4, 5, 10, 11) for y in (3, 4)}
    return GridMap.from_rows(rows_with_blocks(16, 8, cells))


@pytest.fixture
def chamber_map() -> GridMap:
    """10x10 with a closed wall ring on the square (2,2)-(6,6); interior (3..5, 3..5)."""
    walls = {(x, y) for x in range(2, 7) for y in range(2, 7) if x in (2, 6) or y in (2, 6)}
    return GridMap.from_rows(rows_with_blocks(10, 10, walls))


@pytest.fixture
def map_file(tmp_path: Path) -> Callable[..., Path]:
    """Factory writing MovingAI text for the given rows to ``tmp_path``."""

    def _write(rows: list[str], name: str = "fixture.map") -> Path:
        path = tmp_path / name
        path.write_text(movingai_text(rows))
        return path

    return _write


requires_berlin = pytest.mark.skipif(
    not BERLIN_MAP.exists(), reason=f"MovingAI map not found at {BERLIN_MAP}"
)
