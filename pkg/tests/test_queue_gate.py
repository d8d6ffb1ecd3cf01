"""Tests for the gate scripts (loaded via importlib; scripts/ is not a package)."""
from __future__ import annotations

import importlib.util
import sys
from pathlib import Path

import pytest

from src.planning.grid_core import GridCoord, GridMap, load_map
from src.planning.tangent_graph import build_tangent_graph
from tests.conftest import BERLIN_MAP, requires_berlin

_SCRIPTS = Path(__file__).resolve().parents[1] / "scripts"


def _load(name: str):
    spec = importlib.util.spec_from_file_location(name, _SCRIPTS / f"{name}.py")
    module = importlib.util.module_from_spec(spec)
    sys.modules[name] = module
    spec.loader.exec_module(module)
    return module


queue_gate = _load("queue_gate")
property_sweep = _load("property_sweep")


def test_queue_gate_passes_around_block(block_map: GridMap) -> None:
    graph = build_tangent_graph(block_map)
    errors = queue_gate.check_query(
        block_map, graph, GridCoord(1, 3), GridCoord(6, 4), 1, unlimited_levels=4
    )
    assert errors == []


def test_queue_gate_flags_unbounded_queue(block_map: GridMap, monkeypatch) -> None:
    graph = build_tangent_graph(block_map)
    monkeypatch.setattr(queue_gate, "queue_bound_property", lambda trace, k: False)
    errors = queue_gate.check_query(
        block_map, graph, GridCoord(1, 3), GridCoord(6, 4), 1, unlimited_levels=4
    )
    assert any("exceeded k=1" in e for e in errors)


def test_property_sweep_small_run() -> None:
    tally = property_sweep.sweep(n_maps=2, pairs=2, k=4, seed=1, size=32)
    assert tally.queries == 4
    assert tally.paths_audited > 0
    assert tally.audit_failures == []
    assert tally.inconclusive_rate == 0.0
    assert tally.pairs_compared > 0
    assert tally.pairs_distinct == tally.pairs_compared
    assert tally.distinct_rate == 1.0


def test_sweep_tally_rates_default_to_pass() -> None:
    tally = property_sweep.SweepTally()
    assert tally.distinct_rate == 1.0
    assert tally.inconclusive_rate == 0.0
    assert tally.agreement_rate == 1.0


@pytest.mark.slow
@pytest.mark.dataset
@requires_berlin
def test_berlin_queue_bound() -> None:
    grid = load_map(BERLIN_MAP)
    graph = build_tangent_graph(grid)
    errors = queue_gate.check_query(grid, graph, GridCoord(59, 72), GridCoord(109, 214), 200)
    assert errors == []
