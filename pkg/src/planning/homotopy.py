"""Homotopy class keys for polylines through free space.

Every obstacle component that does not touch the map border gets an anchor
point inside one of its cells and an upward ray from that anchor. A path's
key sums, over its segments, the signed number of rays each segment
crosses, weighted per component and reduced modulo a large prime.

For two paths with the same endpoints the per-component difference of
crossing counts is the winding number of the loop they form, so two paths
share a key exactly when they are homotopic (up to hash collisions between
different winding vectors). Keys are additive along a path, which lets the
search carry them incrementally.
"""
from __future__ import annotations

import logging
from bisect import bisect_left
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import ndimage

from .grid_core import GridMap

logger = logging.getLogger(__name__)

KEY_MODULUS = (1 << 61) - 1

# Anchor offset from the cell centre. Off-lattice, so no vertical segment
# between cell centres runs along a ray.
ANCHOR_OFFSET = (0.3, 0.1)

EIGHT_CONNECTED = np.ones((3, 3), dtype=bool)


def _component_weight(index: int) -> int:
    """Deterministic pseudo-random weight in ``[1, KEY_MODULUS)`` (splitmix64)."""
    z = (index + 1) * 0x9E3779B97F4A7C15 & 0xFFFFFFFFFFFFFFFF
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9 & 0xFFFFFFFFFFFFFFFF
    z = (z ^ (z >> 27)) * 0x94D049BB133111EB & 0xFFFFFFFFFFFFFFFF
    z ^= z >> 31
    return z % (KEY_MODULUS - 1) + 1


@dataclass(frozen=True)
class ObstacleAnchors:
    """Anchor points of the interior obstacle components, sorted by x."""

    xs: tuple[float, ...]
    ys: tuple[float, ...]
    weights: tuple[int, ...]

    def __len__(self) -> int:
        return len(self.xs)

    def segment_key(self, a: tuple[int, int], b: tuple[int, int]) -> int:
        """Weighted signed ray crossings of the segment a->b.

        A segment crosses a ray when it passes the anchor's x strictly above
        the anchor. Free segments stay more than 0.4 away from every anchor
        vertically, so float rounding cannot flip the comparison.
        """
        ax, ay = a
        bx, by = b
        if ax == bx:
            return 0
        lo, hi = (ax, bx) if ax < bx else (bx, ax)
        xs = self.xs
        first = bisect_left(xs, lo)
        last = bisect_left(xs, hi, lo=first)
        if first == last:
            return 0
        slope = (by - ay) / (bx - ax)
        total = 0
        for i in range(first, last):
            if ay + slope * (xs[i] - ax) < self.ys[i]:
                total += self.weights[i]
        if bx < ax:
            total = -total
        return total % KEY_MODULUS

    def path_key(self, waypoints) -> int:
        key = 0
        for a, b in zip(waypoints, waypoints[1:]):
            key += self.segment_key(a, b)
        return key % KEY_MODULUS


@lru_cache(maxsize=16)
def obstacle_anchors(grid: GridMap) -> ObstacleAnchors:
    """Anchors of the 8-connected obstacle components of ``grid`` that do
    not touch the map border, one per component at its first cell in
    row-major order.

    Components touching the border are skipped: paths stay inside the map,
    so they never wind around them.
    """
    labels, count = ndimage.label(grid.occupancy, structure=EIGHT_CONNECTED)
    if count == 0:
        return ObstacleAnchors(xs=(), ys=(), weights=())
    border = set(np.unique(np.concatenate(
        [labels[0, :], labels[-1, :], labels[:, 0], labels[:, -1]]
    )).tolist())
    flat = labels.ravel()
    found, first = np.unique(flat, return_index=True)
    anchors = []
    for label, pos in zip(found.tolist(), first.tolist()):
        if label == 0 or label in border:
            continue
        y, x = divmod(pos, grid.width)
        anchors.append((x + ANCHOR_OFFSET[0], y + ANCHOR_OFFSET[1], _component_weight(label)))
    anchors.sort()
    logger.debug("%d interior obstacle anchors (%d components in total)", len(anchors), count)
    return ObstacleAnchors(
        xs=tuple(a[0] for a in anchors),
        ys=tuple(a[1] for a in anchors),
        weights=tuple(a[2] for a in anchors),
    )
