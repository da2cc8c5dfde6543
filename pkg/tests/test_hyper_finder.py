"""
Unit tests for hypergraph peeling and the hypergraph dense-set search
"""

from __future__ import annotations

from fractions import Fraction

import pytest
from hypothesis import given

from bounds import log2_cmp
from hyper_finder import find_hyper_dense, pad_to_uniform, peel, select_heavy_set
from models import (
    DenseWitness,
    NoWitness,
    PreconditionError,
    SearchMode,
    THypergraph,
)
from oracle import brute_force_best_gap, verify_witness
from tests.strategies import hypergraphs
from tightness_lab import sample_uniform_hypergraph


@pytest.fixture
def triples() -> THypergraph:
    """Every triple of {0,1,2,3}, with {0,1,2} twice: 5 edges on 4 vertices."""
    return THypergraph(
        s=4, t=3, edges=((0, 1, 2), (0, 1, 2), (0, 1, 3), (0, 2, 3), (1, 2, 3))
    )


def test_pad_to_uniform_uses_lowest_ids():
    graph = THypergraph(s=5, t=3, edges=((4,), (1, 3), (0, 2, 4)))

    padded = pad_to_uniform(graph)

    assert padded.edges == ((0, 1, 4), (0, 1, 3), (0, 2, 4))
    assert padded.is_uniform


def test_select_heavy_set_takes_top_degrees():
    """
    Test 1: Heavy set is the ell highest-degree vertices

    Requirement: Edges touching L number at least |L|*m/s
    Verifies: Ties broken toward lower ids; touched edges listed
    """
    graph = THypergraph(s=5, t=3, edges=((0, 1, 2), (2, 3, 4), (1, 3, 4)))

    heavy = select_heavy_set(graph, 2)

    assert heavy.vertices == (1, 2)
    assert heavy.touched == (0, 1, 2)
    assert heavy.ell == 2


def test_peel_drops_lowest_heavy_vertex():
    """
    Test 2: Peeling lowers the arity by one

    Requirement: v_e is the lowest vertex of e in L; only touched edges survive
    Verifies: Peeled edges and the PeelMap back to original edges
    """
    graph = THypergraph(s=5, t=3, edges=((0, 1, 2), (2, 3, 4), (1, 3, 4), (0, 3, 4)))
    heavy = select_heavy_set(graph, 2)

    peeled, mapping = peel(graph, heavy)

    assert heavy.vertices == (3, 4)
    assert peeled.t == 2
    assert peeled.edges == ((2, 4), (1, 4), (0, 4))
    assert mapping.origin(0) == 1 and mapping.removed_vertex(0) == 3
    assert [mapping.origin(i) for i in range(peeled.m)] == [1, 2, 3]


def test_peel_needs_arity_three():
    graph = THypergraph(s=3, t=2, edges=((0, 1), (1, 2)))
    with pytest.raises(PreconditionError):
        _ = peel(graph, select_heavy_set(graph, 1))


def test_best_effort_finds_witness(triples: THypergraph):
    """
    Test 3: Best-effort search below the density threshold

    Requirement: Best effort returns a witness when one turns up
    Verifies: All four vertices spanning five triples
    """
    found = find_hyper_dense(triples, 4, SearchMode.BEST_EFFORT)

    assert isinstance(found, DenseWitness)
    assert found.vertices == (0, 1, 2, 3)
    assert found.gap == 1
    assert verify_witness(triples, found).valid


def test_best_effort_reports_no_witness():
    """
    Test 4: Nothing dense in a single triple

    Requirement: Best effort returns NoWitness instead of raising
    Verifies: Sparse input and degenerate parameters
    """
    sparse = THypergraph(s=4, t=3, edges=((0, 1, 2),))

    assert isinstance(find_hyper_dense(sparse, 4, SearchMode.BEST_EFFORT), NoWitness)
    assert isinstance(find_hyper_dense(sparse, 0, SearchMode.BEST_EFFORT), NoWitness)
    tiny = THypergraph(s=2, t=3, edges=((0, 1),))
    assert isinstance(find_hyper_dense(tiny, 2, SearchMode.BEST_EFFORT), NoWitness)


def test_base_case_reads_singletons_as_self_loops():
    """
    Test 4b: Arity-two search shares the multigraph conversion

    Requirement: Singleton edges of a 2-hypergraph count as self-loops
    Verifies: Two singletons on vertex 0 give the witness {0} with gap 1
    """
    # Arrange
    graph = THypergraph(s=3, t=2, edges=((0,), (0,)))

    # Act
    found = find_hyper_dense(graph, 3, SearchMode.BEST_EFFORT)

    # Assert
    assert isinstance(found, DenseWitness), f"Expected a witness, got {found}"
    assert found.vertices == (0,), f"Expected {{0}}, got {found.vertices}"
    assert found.gap == 1, f"Expected gap 1, got {found.gap}"
    assert verify_witness(graph, found).valid, "Witness must recount"


def test_strict_mode_rejects_small_instances(triples: THypergraph):
    with pytest.raises(PreconditionError) as excinfo:
        _ = find_hyper_dense(triples, 4)
    assert "2^(t+2)*log2(s) <= k" in str(excinfo.value)


def test_strict_mode_at_arity_two():
    """
    Test 5: Strict search on a random 2-hypergraph meeting every condition

    Requirement: |S| <= k and gap >= k/(2^(t+1)*log2 s)
    Verifies: s=128, k=112 = 16*log2(s), m = 3s
    """
    graph = sample_uniform_hypergraph(128, 384, 2, seed=1)

    found = find_hyper_dense(graph, 112)

    assert isinstance(found, DenseWitness)
    assert verify_witness(graph, found).valid
    assert found.size <= 112
    assert found.gap >= 2 and log2_cmp(128, Fraction(112, found.gap * 8)) >= 0


@given(hypergraphs(max_s=7))
def test_best_effort_witnesses_are_valid(graph: THypergraph):
    """
    Test 6: Best-effort output is never wrong

    Requirement: Any returned witness recounts with gap >= 1
    Verifies: Agreement with exhaustive search on small hypergraphs
    """
    found = find_hyper_dense(graph, graph.s, SearchMode.BEST_EFFORT)

    if isinstance(found, DenseWitness):
        assert verify_witness(graph, found).valid
        assert found.gap >= 1
        _, best_gap = brute_force_best_gap(graph, graph.s)
        assert best_gap >= found.gap
