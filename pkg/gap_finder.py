"""
Sets with a prescribed gap between spanned edges and vertices, grown one
dense set at a time by contracting what has been found so far.
"""

from __future__ import annotations

import logging
from fractions import Fraction

from bounds import log2_cmp
from dense_core import find_dense_set
from graph_core import contract, spanned_edges
from models import DenseWitness, InternalInvariantError, Multigraph, PreconditionError

logger = logging.getLogger(__name__)


def check_gap_preconditions(graph: Multigraph, gap: int) -> None:
    if gap < 1:
        raise PreconditionError(f"gap must be >= 1, got {gap}")
    if graph.s < 2:
        raise PreconditionError(f"gap search needs s >= 2, got s={graph.s}")
    if graph.m < 2 * graph.s + gap + 1:
        raise PreconditionError(
            f"m >= 2s+g+1 fails: m={graph.m} < {2 * graph.s + gap + 1}"
        )


def _witness(graph: Multigraph, vertices: set[int]) -> DenseWitness:
    edges = spanned_edges(graph, vertices)
    return DenseWitness(vertices=tuple(vertices), spanned=edges, gap=len(edges) - len(vertices))


def find_gap_chain(graph: Multigraph, gap: int) -> list[DenseWitness]:
    """
    Nested witnesses S_1, S_2, ... with strictly increasing gaps, the last
    one reaching `gap`. A step whose set already over-spans counts the
    surplus and may skip several gap values at once.
    """
    check_gap_preconditions(graph, gap)

    current = find_dense_set(graph, Fraction(1))
    chain = [current]
    logger.debug(f"gap chain start: |S|={current.size}, gap={current.gap}")

    while current.gap < gap:
        contracted, mapping = contract(graph, current.vertices, drop_internal=True)
        # m' >= 2s'+1 holds here because the current set spans fewer than |S|+g edges
        found = find_dense_set(contracted, Fraction(1))

        grown = set(current.vertices)
        for x in found.vertices:
            if x != mapping.merged:
                grown.update(mapping.preimage(x))
        following = _witness(graph, grown)

        if following.gap <= current.gap:
            raise InternalInvariantError(
                f"merged set did not raise the gap: {current.gap} -> {following.gap}"
            )
        logger.debug(f"gap chain step: |S|={following.size}, gap={following.gap}")
        chain.append(following)
        current = following

    return chain


def find_gap_set(graph: Multigraph, gap: int) -> DenseWitness:
    witness = find_gap_chain(graph, gap)[-1]
    # |S| <= 8 * g * log2(s)
    if log2_cmp(graph.s, Fraction(witness.size, 8 * gap)) < 0:
        raise InternalInvariantError(
            f"witness of size {witness.size} exceeds 8*{gap}*log2({graph.s})"
        )
    logger.info(f"Gap set of {witness.size} vertices with gap {witness.gap} (target {gap})")
    return witness
