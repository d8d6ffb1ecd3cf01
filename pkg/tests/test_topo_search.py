"""Tests for the K-path search in src/planning/topo_search.py."""
from __future__ import annotations

import itertools
import json
import math

import pytest

from src.harness.oracle import homotopy_distinct, obstacle_components
from src.harness.sampling import random_block_map, sample_endpoints
from src.planning.grid_core import GridCoord, GridMap
from src.planning.homotopy import obstacle_anchors
from src.planning.tangent_graph import TangentGraph, build_tangent_graph
from src.planning.topo_search import (
    EndpointError,
    PartialPath,
    QueueSnapshot,
    SearchConfig,
    create_initial_paths,
    gets_closer_to_obstacle,
    no_loop_check,
    queue_bound_property,
    search_k_paths,
    segments_touch,
    taut_transfer,
    validate_endpoints,
)
from tests.conftest import rows_with_blocks

START, GOAL = (1, 3), (6, 4)
SHORTEST = 2 + 2 * math.sqrt(5)
ABOVE = [(1, 3), (3, 2), (5, 2), (6, 4)]
BELOW = [(1, 3), (2, 5), (4, 5), (6, 4)]


@pytest.fixture
def block_graph(block_map: GridMap) -> TangentGraph:
    return build_tangent_graph(block_map)


@pytest.fixture
def notch_map() -> GridMap:
    """5x5 with a single unpassable cell at (2, 1)."""
    return GridMap.from_rows(rows_with_blocks(5, 5, {(2, 1)}))


# --- edge-transfer constraint ------------------------------------------------


def test_straight_transfer_next_to_obstacle_is_taut(notch_map: GridMap) -> None:
    assert gets_closer_to_obstacle(notch_map, (0, 2), (2, 2), (4, 2))


def test_straight_transfer_in_open_space_is_slack(open_map: GridMap) -> None:
    assert not gets_closer_to_obstacle(open_map, (0, 2), (2, 2), (4, 2))


def test_turn_away_from_obstacle_is_slack(notch_map: GridMap) -> None:
    # The right-angle cone opens towards (1, 3); the blocked cell is behind the apex.
    assert not gets_closer_to_obstacle(notch_map, (0, 2), (2, 2), (2, 4))


def test_turn_around_obstacle_is_taut(notch_map: GridMap) -> None:
    assert gets_closer_to_obstacle(notch_map, (0, 2), (2, 2), (4, 0))


def test_transfer_rejects_degenerate_turn(notch_map: GridMap) -> None:
    with pytest.raises(ValueError, match="zero-length"):
        gets_closer_to_obstacle(notch_map, (2, 2), (2, 2), (4, 0))


def test_taut_transfer_rejects_collinear_continuation(block_map: GridMap, notch_map: GridMap) -> None:
    assert not taut_transfer(block_map, (3, 2), (4, 2), (5, 2))
    # Still straight even though gets_closer_to_obstacle accepts it.
    assert gets_closer_to_obstacle(notch_map, (0, 2), (2, 2), (4, 2))
    assert not taut_transfer(notch_map, (0, 2), (2, 2), (4, 2))


def test_taut_transfer_accepts_turn_around_obstacle(notch_map: GridMap) -> None:
    assert taut_transfer(notch_map, (0, 2), (2, 2), (4, 0))
    assert taut_transfer(notch_map, (4, 0), (2, 2), (0, 2))


def test_taut_transfer_rejects_turn_away_from_obstacle(notch_map: GridMap) -> None:
    assert not taut_transfer(notch_map, (0, 2), (2, 2), (2, 4))


def test_taut_transfer_rejects_shallow_bend_that_clears_the_corner() -> None:
    # The blocked cell sits inside the turning cone but below the shortcut
    # (0, 2) -> (12, 1), so the bend at (4, 2) is slack.
    grid = GridMap.from_rows(rows_with_blocks(13, 4, {(4, 1)}))
    assert gets_closer_to_obstacle(grid, (0, 2), (4, 2), (12, 1))
    assert not taut_transfer(grid, (0, 2), (4, 2), (12, 1))


def test_taut_transfer_implies_gets_closer(block_map: GridMap) -> None:
    cells = [(x, y) for x in range(8) for y in range(8) if block_map.is_passable(x, y)]
    apexes = [(2, 2), (3, 2), (5, 2), (2, 5), (5, 5)]
    for g2 in apexes:
        for g1, g3 in itertools.combinations(cells[::3], 2):
            if g2 in (g1, g3):
                continue
            if taut_transfer(block_map, g1, g2, g3):
                assert gets_closer_to_obstacle(block_map, g1, g2, g3)


# --- iteration constraint ----------------------------------------------------


def test_no_loop_rejects_crossing_earlier_segment() -> None:
    assert not no_loop_check([(0, 0), (4, 0), (4, 4), (0, 4)], (2, -1))


def test_no_loop_rejects_touching_earlier_segment() -> None:
    assert not no_loop_check([(0, 0), (4, 0), (4, 4)], (2, 0))


def test_no_loop_rejects_repeated_waypoint() -> None:
    assert not no_loop_check([(0, 0), (2, 0), (2, 2)], (0, 0))


def test_no_loop_rejects_fold_back() -> None:
    assert not no_loop_check([(0, 0), (4, 0)], (2, 0))
    assert no_loop_check([(0, 0), (4, 0)], (6, 0))


def test_no_loop_accepts_simple_extension() -> None:
    assert no_loop_check([(0, 0), (4, 0), (4, 4)], (8, 4))
    assert no_loop_check([(0, 0)], (3, 3))


def test_no_loop_accepts_partial_path() -> None:
    path = PartialPath(waypoints=(GridCoord(0, 0), GridCoord(4, 0)), length=4.0, priority=4.0)
    assert not no_loop_check(path, (0, 0))
    assert no_loop_check(path, (4, 4))


@pytest.mark.parametrize(
    ("p", "q", "expected"),
    [
        (((0, 0), (4, 4)), ((0, 4), (4, 0)), True),
        (((0, 0), (4, 0)), ((0, 1), (4, 1)), False),
        (((0, 0), (4, 0)), ((4, 0), (6, 2)), True),
        (((0, 0), (4, 0)), ((2, 0), (6, 0)), True),
        (((0, 0), (4, 0)), ((5, 0), (6, 0)), False),
        (((0, 0), (2, 2)), ((3, 0), (3, 5)), False),
    ],
)
def test_segments_touch(p, q, expected: bool) -> None:
    assert segments_touch(*p, *q) is expected
    assert segments_touch(*q, *p) is expected


# --- endpoints and initial paths -----------------------------------------------


@pytest.mark.parametrize(
    ("start", "goal", "pattern"),
    [
        ((-1, 0), (1, 1), r"start \(-1, 0\) is outside the 8x8 map"),
        ((0, 0), (8, 2), r"goal \(8, 2\) is outside"),
        ((3, 3), (0, 0), r"start \(3, 3\) is on an unpassable cell"),
        ((1, 1), (1, 1), "same cell"),
    ],
)
def test_validate_endpoints(block_map: GridMap, start, goal, pattern: str) -> None:
    with pytest.raises(EndpointError, match=pattern):
        validate_endpoints(block_map, start, goal)


def test_endpoint_error_is_value_error(block_map: GridMap, block_graph: TangentGraph) -> None:
    with pytest.raises(ValueError):
        search_k_paths(block_map, block_graph, (3, 3), GOAL, SearchConfig(k=1))


def test_initial_paths_without_direct_line(block_map: GridMap, block_graph: TangentGraph) -> None:
    aug, paths = create_initial_paths(block_map, block_graph, START, GOAL)
    assert not aug.direct
    assert paths
    assert all(len(p.waypoints) == 2 and not p.finished for p in paths)
    assert all(p.waypoints[0] == START for p in paths)
    firsts = {p.last for p in paths}
    assert GridCoord(3, 2) in firsts
    assert GridCoord(2, 2) not in firsts
    assert block_graph.index_of[GridCoord(5, 2)] in aug.goal_links
    assert (aug.start_id, aug.goal_id) == (block_graph.node_count, block_graph.node_count + 1)


def test_initial_paths_priority(block_map: GridMap, block_graph: TangentGraph) -> None:
    _, paths = create_initial_paths(block_map, block_graph, START, GOAL)
    for p in paths:
        assert p.length == pytest.approx(math.dist(START, p.last))
        assert p.priority == pytest.approx(p.length + math.dist(p.last, GOAL))


def test_initial_paths_direct_line(open_map: GridMap) -> None:
    graph = build_tangent_graph(open_map)
    aug, paths = create_initial_paths(open_map, graph, (0, 0), (7, 7))
    assert aug.direct
    assert len(paths) == 1
    assert paths[0].finished
    assert paths[0].waypoints == ((0, 0), (7, 7))


def test_graph_is_not_modified_by_a_query(block_map: GridMap, block_graph: TangentGraph) -> None:
    before = (block_graph.nodes, block_graph.adjacency)
    search_k_paths(block_map, block_graph, START, GOAL, SearchConfig(k=5))
    assert (block_graph.nodes, block_graph.adjacency) == before


# --- search -------------------------------------------------------------------


def test_open_map_returns_the_straight_line(open_map: GridMap) -> None:
    result = search_k_paths(open_map, build_tangent_graph(open_map), (0, 0), (7, 7), SearchConfig(k=3))
    assert result.paths == [[(0, 0), (7, 7)]]
    assert not result.truncated
    assert result.iterations == 0


def test_search_finds_shortest_path_around_block(block_map: GridMap, block_graph: TangentGraph) -> None:
    result = search_k_paths(block_map, block_graph, START, GOAL, SearchConfig(k=500))
    assert not result.truncated
    # One block, so exactly one path on each side of it.
    assert len(result.finished) == 2
    assert result.finished[0].length == pytest.approx(SHORTEST)
    assert result.finished[1].length == pytest.approx(SHORTEST)
    assert sorted(result.paths) == sorted([ABOVE, BELOW])


def test_search_results_are_valid_and_sorted(block_map: GridMap, block_graph: TangentGraph) -> None:
    result = search_k_paths(block_map, block_graph, START, GOAL, SearchConfig(k=500))
    lengths = [p.length for p in result.finished]
    assert lengths == sorted(lengths)
    for p in result.finished:
        assert p.finished
        assert p.waypoints[0] == START and p.waypoints[-1] == GOAL
        assert len(set(p.waypoints)) == len(p.waypoints)
        assert p.length == pytest.approx(
            sum(math.dist(a, b) for a, b in zip(p.waypoints, p.waypoints[1:]))
        )
        for w in p.waypoints[1:-1]:
            assert w in block_graph.index_of


def test_priority_limit_finds_the_same_paths_as_plain_bfs(
    block_map: GridMap, block_graph: TangentGraph
) -> None:
    limited = search_k_paths(block_map, block_graph, START, GOAL, SearchConfig(k=500))
    plain = search_k_paths(
        block_map, block_graph, START, GOAL, SearchConfig(k=500, priority_limit=False)
    )
    assert not limited.truncated and not plain.truncated
    assert sorted(limited.paths) == sorted(plain.paths)


@pytest.mark.parametrize("k", [1, 2, 3])
def test_queue_bound_holds(block_map: GridMap, block_graph: TangentGraph, k: int) -> None:
    result = search_k_paths(block_map, block_graph, START, GOAL, SearchConfig(k=k))
    assert result.finished
    assert queue_bound_property(result.queue_trace, k)
    assert result.peak_primary <= k


def test_queue_bound_property() -> None:
    assert queue_bound_property([QueueSnapshot(2, 9), QueueSnapshot(3, 0)], 3)
    assert not queue_bound_property([QueueSnapshot(4, 0)], 3)
    assert queue_bound_property([], 1)


def test_expansion_limit_truncates(block_map: GridMap, block_graph: TangentGraph, caplog) -> None:
    with caplog.at_level("WARNING"):
        result = search_k_paths(
            block_map, block_graph, START, GOAL, SearchConfig(k=500, max_expansions=1)
        )
    assert result.truncated
    assert result.stop_reason == "max_expansions"
    assert result.iterations == 1
    assert "stopped by max_expansions" in caplog.text
    assert result.to_dict()["telemetry"]["stop_reason"] == "max_expansions"


def test_time_budget_truncates(block_map: GridMap, block_graph: TangentGraph) -> None:
    result = search_k_paths(
        block_map, block_graph, START, GOAL, SearchConfig(k=500, time_budget=1e-9)
    )
    assert result.truncated
    assert result.stop_reason == "time_budget"
    assert result.iterations == 0


def test_enclosed_start_has_no_solution(chamber_map: GridMap) -> None:
    graph = build_tangent_graph(chamber_map)
    result = search_k_paths(chamber_map, graph, (4, 4), (8, 8), SearchConfig(k=5))
    assert result.finished == []
    assert result.stop_reason is None


def test_endpoint_on_graph_node_is_not_reused(block_map: GridMap, block_graph: TangentGraph) -> None:
    start = GridCoord(3, 2)
    assert start in block_graph.index_of
    result = search_k_paths(block_map, block_graph, start, GOAL, SearchConfig(k=20))
    assert result.finished
    for path in result.paths:
        assert start not in path[1:]


def test_threaded_expansion_matches_serial(block_map: GridMap, block_graph: TangentGraph) -> None:
    serial = search_k_paths(block_map, block_graph, START, GOAL, SearchConfig(k=10))
    threaded = search_k_paths(block_map, block_graph, START, GOAL, SearchConfig(k=10, workers=4))
    assert serial.to_dict(include_timing=False) == threaded.to_dict(include_timing=False)


def test_search_is_deterministic(two_block_map: GridMap) -> None:
    graph = build_tangent_graph(two_block_map)
    runs = [
        search_k_paths(two_block_map, graph, (1, 4), (14, 3), SearchConfig(k=8)).to_dict(
            include_timing=False
        )
        for _ in range(2)
    ]
    assert runs[0] == runs[1]


def test_result_to_dict(block_map: GridMap, block_graph: TangentGraph) -> None:
    result = search_k_paths(block_map, block_graph, START, GOAL, SearchConfig(k=3))
    payload = result.to_dict()
    json.dumps(payload)
    assert set(payload) == {"paths", "telemetry"}
    assert payload["paths"][0]["waypoints"][0] == [1, 3]
    telemetry = payload["telemetry"]
    assert telemetry["iterations"] == result.iterations
    assert telemetry["constraint_checks"]["edge_transfer"] > 0
    assert telemetry["constraint_checks"]["no_loop"] > 0
    assert "elapsed_ms" in telemetry

    stable = result.to_dict(include_timing=False)
    assert "elapsed_ms" not in stable["telemetry"]
    assert "no_loop_ms" not in stable["telemetry"]["constraint_checks"]


@pytest.mark.parametrize(
    "kwargs",
    [{"k": 0}, {"k": 1, "max_expansions": 0}, {"k": 1, "time_budget": 0.0}, {"k": 1, "workers": 0}],
)
def test_search_config_rejects_bad_values(kwargs) -> None:
    with pytest.raises(ValueError):
        SearchConfig(**kwargs)


def test_expansion_limit_default() -> None:
    assert SearchConfig(k=3).expansion_limit(9) == 10 * 3 * 10
    assert SearchConfig(k=3, max_expansions=7).expansion_limit(9) == 7


# --- homotopy classes ----------------------------------------------------------


def test_finished_paths_carry_their_class_key(two_block_map: GridMap) -> None:
    graph = build_tangent_graph(two_block_map)
    result = search_k_paths(two_block_map, graph, (1, 4), (14, 3), SearchConfig(k=6))
    anchors = obstacle_anchors(two_block_map)
    keys = [p.class_key for p in result.finished]
    assert len(set(keys)) == len(keys)
    for p in result.finished:
        assert p.class_key == anchors.path_key(p.waypoints)


def test_two_blocks_give_four_classes(two_block_map: GridMap) -> None:
    graph = build_tangent_graph(two_block_map)
    result = search_k_paths(two_block_map, graph, (1, 4), (14, 3), SearchConfig(k=4))
    assert len(result.finished) >= 4
    components = obstacle_components(two_block_map)
    for p, q in itertools.combinations(result.paths, 2):
        assert homotopy_distinct(two_block_map, p, q, components) is True


def test_dominated_partial_paths_are_reported(two_block_map: GridMap) -> None:
    graph = build_tangent_graph(two_block_map)
    result = search_k_paths(
        two_block_map, graph, (1, 4), (14, 3), SearchConfig(k=50, priority_limit=False)
    )
    assert result.pruned == result.to_dict()["telemetry"]["constraint_checks"]["dominated"]


@pytest.mark.parametrize("seed", [3, 11])
def test_random_map_results_are_pairwise_distinct(seed: int) -> None:
    grid = random_block_map(32, 32, 6, seed)
    graph = build_tangent_graph(grid)
    components = obstacle_components(grid)
    for start, goal in sample_endpoints(grid, 2, seed):
        result = search_k_paths(grid, graph, start, goal, SearchConfig(k=8))
        for p, q in itertools.combinations(result.paths, 2):
            assert homotopy_distinct(grid, p, q, components) is True
