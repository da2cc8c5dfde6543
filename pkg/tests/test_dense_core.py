"""
Unit tests for the minimum-degree-three reduction and the dense-set search
"""

from __future__ import annotations

from fractions import Fraction

import pytest
from hypothesis import given

from dense_core import (
    expand_witness,
    find_any_dense_set,
    find_dense_set,
    reduce_to_min_degree_three,
    replay,
    size_bound_holds,
)
from graph_core import degrees
from models import (
    ContractPath,
    Multigraph,
    PreconditionError,
    RemoveDegreeOne,
    RemoveLoopOnly,
    RemoveLongPath,
    WitnessMismatchError,
)
from oracle import brute_force_best_gap, verify_witness
from tests.strategies import dense_instances, multigraphs


def test_theta_graph_witness(theta: Multigraph):
    """
    Test 1: Theta graph at eps = 1/5 gives the whole graph

    Requirement: m >= s(1+eps) yields S spanning at least |S|+1 edges
    Verifies: Short chains are contracted, then expanded back
    """
    # Act
    witness = find_dense_set(theta, Fraction(1, 5))

    # Assert
    assert witness.vertices == (0, 1, 2, 3, 4)
    assert witness.spanned == (0, 1, 2, 3, 4, 5)
    assert witness.gap == 1
    assert verify_witness(theta, witness).valid


def test_theta_reduction_contracts_chains(theta: Multigraph):
    """
    Test 2: Each length-two chain becomes one new edge

    Requirement: Chains with r*eps < 1 are contracted, not removed
    Verifies: Three ContractPath steps; the reduced graph is a triple edge
    """
    reduced, log = reduce_to_min_degree_three(theta, Fraction(1, 5))

    assert [type(step) for step in log.steps] == [ContractPath] * 3
    assert [step.new_edge for step in log.steps if isinstance(step, ContractPath)] == [6, 7, 8]
    assert reduced == Multigraph(s=2, edges=((0, 1), (0, 1), (0, 1)))
    assert log.vertex_map == (0, 1) and log.edge_map == (6, 7, 8)


def test_removal_priority():
    """
    Test 3: Degree-one vertices go before degree-two chains

    Requirement: Removal order isolated, degree one, loop only, long path
    Verifies: Pendant vertex first, then the triangle as a whole cycle
    """
    graph = Multigraph(s=4, edges=((0, 1), (1, 2), (0, 2), (2, 3)))

    reduced, log = reduce_to_min_degree_three(graph, Fraction(1))

    assert log.steps[0] == RemoveDegreeOne(vertex=3, edge=3)
    assert isinstance(log.steps[1], RemoveLongPath)
    assert set(log.steps[1].internal) == {0, 1, 2}
    assert reduced.s == 0


def test_loop_only_vertex_removed():
    _, log = reduce_to_min_degree_three(Multigraph(s=1, edges=((0, 0),)), Fraction(1, 2))
    assert log.steps == (RemoveLoopOnly(vertex=0, loop=0),)


def test_replay_reaches_reduced_graph(theta: Multigraph):
    """
    Test 4: The log replays step by step

    Requirement: ContractionLog is replayable on its source graph
    Verifies: One state per step plus the start; last state is the reduced graph
    """
    reduced, log = reduce_to_min_degree_three(theta, Fraction(1, 5))

    states = replay(theta, log)

    assert len(states) == len(log.steps) + 1
    assert states[0] == theta
    assert states[-1] == reduced


def test_replay_rejects_other_graph(theta: Multigraph, k4: Multigraph):
    _, log = reduce_to_min_degree_three(theta, Fraction(1, 5))
    with pytest.raises(WitnessMismatchError):
        _ = replay(k4, log)


def test_expand_witness_checks_its_input(theta: Multigraph):
    """
    Test 5: Expansion validates the reduced-graph set

    Requirement: Bad references are mismatches; too few edges is a precondition
    Verifies: Unknown vertex, unspanned edge and short edge list
    """
    _, log = reduce_to_min_degree_three(theta, Fraction(1, 5))

    with pytest.raises(WitnessMismatchError):
        _ = expand_witness(log, [0, 2], [0, 1, 2])
    with pytest.raises(WitnessMismatchError):
        _ = expand_witness(log, [0, 1], [0, 1, 3])
    with pytest.raises(PreconditionError):
        _ = expand_witness(log, [0, 1], [0, 1])

    witness = expand_witness(log, [0, 1], [0, 1, 2])
    assert witness.size == 5 and witness.gap == 1


@pytest.mark.parametrize(
    ("graph", "epsilon"),
    [
        (Multigraph(s=1, edges=((0, 0), (0, 0))), Fraction(1)),
        (Multigraph(s=5, edges=((0, 1),) * 6), Fraction(1)),
        (Multigraph(s=2, edges=((0, 1),) * 4), Fraction(0)),
        (Multigraph(s=2, edges=((0, 1),) * 4), Fraction(3, 2)),
    ],
)
def test_find_dense_set_preconditions(graph: Multigraph, epsilon: Fraction):
    with pytest.raises(PreconditionError):
        _ = find_dense_set(graph, epsilon)


def test_find_any_dense_set(theta: Multigraph, triangle: Multigraph, path4: Multigraph):
    """
    Test 6: Witness existence without a density margin

    Requirement: None exactly when every component has at most one cycle
    Verifies: Triangle and path have none; theta has one
    """
    assert find_any_dense_set(triangle) is None
    assert find_any_dense_set(path4) is None
    witness = find_any_dense_set(theta)
    assert witness is not None and verify_witness(theta, witness).valid


def test_size_bound_is_exact():
    assert size_bound_holds(2, 8, Fraction(1))
    assert not size_bound_holds(2, 9, Fraction(1))
    assert size_bound_holds(4, 48, Fraction(1, 3)), "8 * 2 * 3 = 48"
    assert not size_bound_holds(4, 49, Fraction(1, 3))


@given(dense_instances())
def test_dense_set_on_random_graphs(instance: tuple[Multigraph, Fraction]):
    """
    Test 7: Random multigraphs above the density threshold

    Requirement: gap >= 1 and |S| <= 8*log2(s)*ceil(1/eps)
    Verifies: Witness recount and agreement with exhaustive search
    """
    graph, epsilon = instance

    witness = find_dense_set(graph, epsilon)

    assert verify_witness(graph, witness).valid
    assert witness.gap >= 1
    assert size_bound_holds(graph.s, witness.size, epsilon)
    _, best_gap = brute_force_best_gap(graph, graph.s)
    assert best_gap >= witness.gap, "Exhaustive search finds at least as large a gap"


@given(multigraphs())
def test_reduction_leaves_min_degree_three(graph: Multigraph):
    """
    Test 8: Reduced graphs have minimum degree three

    Requirement: Every remaining vertex has degree at least three
    Verifies: Reduction and replay agree on random graphs
    """
    reduced, log = reduce_to_min_degree_three(graph, Fraction(1, 2))

    assert all(d >= 3 for d in degrees(reduced))
    assert replay(graph, log)[-1] == reduced


@given(multigraphs(max_s=7))
def test_any_dense_set_matches_exhaustive_search(graph: Multigraph):
    """
    Test 9: find_any_dense_set is exact for existence

    Requirement: A witness exists iff some set spans more edges than vertices
    Verifies: Agreement with the brute-force best gap
    """
    _, best_gap = brute_force_best_gap(graph, graph.s)

    witness = find_any_dense_set(graph)

    assert (witness is not None) == (best_gap >= 1)
    if witness is not None:
        assert verify_witness(graph, witness).valid
