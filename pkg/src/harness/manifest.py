"""Provenance manifest for tangent graph files: sha256 of map and graph + build facts."""
from __future__ import annotations

import hashlib
import json
import subprocess
from datetime import datetime, timezone
from pathlib import Path
from typing import Any

from src.planning.config import GRAPH_VERSION
from src.planning.tangent_graph import TangentGraph


def compute_sha256(path: Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(65536), b""):
            h.update(chunk)
    return h.hexdigest()


def get_git_commit() -> str:
    try:
        return subprocess.run(
            ["git", "rev-parse", "HEAD"], capture_output=True, text=True, check=True
        ).stdout.strip()
    except (subprocess.CalledProcessError, FileNotFoundError):
        return "unknown"


def manifest_path_for(graph_path: Path) -> Path:
    """``g.tgrf`` -> ``g.tgrf.manifest.json``."""
    return graph_path.with_name(graph_path.name + ".manifest.json")


def build_graph_manifest(
    map_path: Path,
    graph_path: Path,
    graph: TangentGraph,
    *,
    build_ms: float,
    strict_tangency: bool,
    git_commit: str | None = None,
    timestamp_utc: str | None = None,
) -> dict[str, Any]:
    """Manifest for a freshly written ``.tgrf`` file.

    ``git_commit`` and ``timestamp_utc`` default to the current checkout and
    clock; tests pass fixed values.
    """
    return {
        "map_file": map_path.name,
        "map_sha256": compute_sha256(map_path),
        "graph_file": graph_path.name,
        "graph_sha256": compute_sha256(graph_path),
        "format_version": GRAPH_VERSION,
        "width": graph.width,
        "height": graph.height,
        "node_count": graph.node_count,
        "edge_count": graph.edge_count,
        "build_ms": round(build_ms, 3),
        "strict_tangency": strict_tangency,
        "git_commit": git_commit if git_commit is not None else get_git_commit(),
        "run_timestamp_utc": timestamp_utc or datetime.now(timezone.utc).isoformat(),
    }


def write_manifest(manifest: dict[str, Any], out_path: Path) -> None:
    out_path.write_text(json.dumps(manifest, indent=2, default=str))


def verify_graph_manifest(map_path: Path, graph_path: Path, manifest_path: Path) -> list[str]:
    """Compare the files on disk with a manifest; empty list means no drift."""
    drift: list[str] = []
    manifest = json.loads(manifest_path.read_text())
    for label, path, key in (
        ("map", map_path, "map_sha256"),
        ("graph", graph_path, "graph_sha256"),
    ):
        if not path.exists():
            drift.append(f"missing {label}: {path}")
            continue
        actual = compute_sha256(path)
        recorded = manifest.get(key)
        if actual != recorded:
            # A manifest without the key still reports drift instead of failing on None.
            drift.append(
                f"{label} sha256 drift: manifest={(recorded or '')[:12]}… actual={actual[:12]}…"
            )
    if manifest.get("format_version") != GRAPH_VERSION:
        drift.append(
            f"format_version drift: manifest={manifest.get('format_version')} actual={GRAPH_VERSION}"
        )
    return drift
