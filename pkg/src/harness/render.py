"""SVG rendering of a map with a set of paths drawn over it."""
from __future__ import annotations

import logging
import xml.etree.ElementTree as ET
from pathlib import Path
from typing import Sequence

import numpy as np
from matplotlib import colormaps
from matplotlib.colors import to_hex

from src.planning.config import SVG_PALETTE_SIZE
from src.planning.grid_core import GridMap

logger = logging.getLogger(__name__)

SVG_NS = "http://www.w3.org/2000/svg"
OBSTACLE_FILL = "#3a3a3a"


def svg_palette(size: int = SVG_PALETTE_SIZE) -> list[str]:
    """First ``size`` colours of matplotlib's tab20, as hex strings."""
    colours = colormaps["tab20"].colors
    return [to_hex(colours[i % len(colours)]) for i in range(size)]


def render_svg(
    grid: GridMap,
    paths: Sequence[Sequence[tuple[int, int]]],
    out: Path | str,
    *,
    start: tuple[int, int] | None = None,
    goal: tuple[int, int] | None = None,
) -> None:
    """Write ``grid`` and ``paths`` to an SVG file.

    The canvas is ``width x height`` user units, one per cell. Path
    waypoints are cell centres. Start and goal default to the first and last
    waypoint of the first path; with no paths and no explicit endpoints
    only the map is drawn.

    Raises
    ------
    OSError
        If ``out`` cannot be written.
    """
    ET.register_namespace("", SVG_NS)
    svg = ET.Element(f"{{{SVG_NS}}}svg", {
        "width": str(grid.width),
        "height": str(grid.height),
        "viewBox": f"0 0 {grid.width} {grid.height}",
    })
    ET.SubElement(svg, f"{{{SVG_NS}}}rect", {
        "x": "0", "y": "0", "width": str(grid.width), "height": str(grid.height), "fill": "#ffffff",
    })
    obstacles = ET.SubElement(svg, f"{{{SVG_NS}}}g", {"fill": OBSTACLE_FILL})
    ys, xs = np.nonzero(grid.occupancy)
    for x, y in zip(xs.tolist(), ys.tolist()):
        ET.SubElement(obstacles, f"{{{SVG_NS}}}rect",
                      {"x": str(x), "y": str(y), "width": "1", "height": "1"})

    palette = svg_palette()
    for i, path in enumerate(paths):
        points = " ".join(f"{x + 0.5:g},{y + 0.5:g}" for x, y in path)
        ET.SubElement(svg, f"{{{SVG_NS}}}polyline", {
            "points": points,
            "fill": "none",
            "stroke": palette[i % len(palette)],
            "stroke-width": "0.3",
            "stroke-linejoin": "round",
        })

    if paths:
        start = start if start is not None else tuple(paths[0][0])
        goal = goal if goal is not None else tuple(paths[0][-1])
    if start is not None:
        ET.SubElement(svg, f"{{{SVG_NS}}}circle", {
            "cx": f"{start[0] + 0.5:g}", "cy": f"{start[1] + 0.5:g}", "r": "0.6", "fill": "#d62728",
        })
    if goal is not None:
        ET.SubElement(svg, f"{{{SVG_NS}}}rect", {
            "x": f"{goal[0] - 0.1:g}", "y": f"{goal[1] - 0.1:g}",
            "width": "1.2", "height": "1.2", "fill": "#2ca02c",
        })

    ET.ElementTree(svg).write(str(out), encoding="utf-8", xml_declaration=True)
    logger.info("Wrote %s (%d paths)", out, len(paths))
