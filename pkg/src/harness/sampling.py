"""Seeded query endpoints and random block maps."""
from __future__ import annotations

import logging

import numpy as np
from scipy import ndimage

from src.planning.grid_core import GridCoord, GridMap

from .oracle import FOUR_CONNECTED

logger = logging.getLogger(__name__)

ATTEMPTS_PER_PAIR = 100


class SamplingError(ValueError):
    """Not enough connected endpoint pairs were found."""


def sample_endpoints(grid: GridMap, n: int, seed: int) -> list[tuple[GridCoord, GridCoord]]:
    """Draw ``n`` connected (start, goal) pairs of distinct passable cells.

    Cells are drawn uniformly from a ``numpy`` generator seeded with
    ``seed``. A pair is kept only when both cells lie in the same
    4-connected passable region, and at most ``100 * n`` pairs are tried.

    Raises
    ------
    SamplingError
        Fewer than two passable cells, or fewer than ``n`` pairs found within
        the attempt budget.
    """
    if n < 0:
        raise ValueError(f"n must be non-negative, got {n}")
    if n == 0:
        return []
    free = np.flatnonzero(~grid.occupancy.ravel())
    if len(free) < 2:
        raise SamplingError(f"map has {len(free)} passable cells; need at least 2")
    labels, _ = ndimage.label(~grid.occupancy, structure=FOUR_CONNECTED)
    flat_labels = labels.ravel()

    rng = np.random.default_rng(seed)
    pairs: list[tuple[GridCoord, GridCoord]] = []
    attempts = 0
    budget = ATTEMPTS_PER_PAIR * n
    while len(pairs) < n and attempts < budget:
        attempts += 1
        a, b = free[rng.integers(len(free), size=2)]
        if a == b or flat_labels[a] != flat_labels[b]:
            continue
        pairs.append((
            GridCoord(int(a % grid.width), int(a // grid.width)),
            GridCoord(int(b % grid.width), int(b // grid.width)),
        ))
    if len(pairs) < n:
        raise SamplingError(
            f"found only {len(pairs)} of {n} connected pairs in {attempts} attempts"
        )
    logger.debug("sampled %d endpoint pairs in %d attempts (seed %d)", n, attempts, seed)
    return pairs


def random_block_map(
    width: int,
    height: int,
    n_blocks: int,
    seed: int,
    *,
    min_side: int = 2,
    max_side: int = 8,
) -> GridMap:
    """Map with up to ``n_blocks`` separated rectangular obstacles.

    Blocks keep a gap of at least two cells to the border and to each other, so each one
    is its own interior obstacle component. Placement gives up on a block
    after a bounded number of tries, which can leave fewer blocks on small
    maps.
    """
    rng = np.random.default_rng(seed)
    occupancy = np.zeros((height, width), dtype=bool)
    # Cells that may not receive a new block: existing blocks grown by one.
    forbidden = np.zeros_like(occupancy)
    placed = 0
    for _ in range(n_blocks * 50):
        if placed == n_blocks:
            break
        w = int(rng.integers(min_side, max_side + 1))
        h = int(rng.integers(min_side, max_side + 1))
        if w > width - 4 or h > height - 4:
            continue
        x0 = int(rng.integers(2, width - w - 1))
        y0 = int(rng.integers(2, height - h - 1))
        if forbidden[y0:y0 + h, x0:x0 + w].any():
            continue
        occupancy[y0:y0 + h, x0:x0 + w] = True
        forbidden[y0 - 2:y0 + h + 2, x0 - 2:x0 + w + 2] = True
        placed += 1
    return GridMap(width=width, height=height, occupancy=occupancy)
