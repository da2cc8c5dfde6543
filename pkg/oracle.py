"""
Brute-force ground truth for small graphs and the witness verifier
"""

from __future__ import annotations

import logging
import math
from collections.abc import Sequence
from concurrent.futures import ProcessPoolExecutor
from itertools import combinations

import config
from models import (
    BudgetExceededError,
    DenseWitness,
    Multigraph,
    PreconditionError,
    THypergraph,
    Verdict,
)

logger = logging.getLogger(__name__)

type Graph = Multigraph | THypergraph

# (-gap, size, sorted vertices): smaller is better
type _Key = tuple[int, int, tuple[int, ...]]


def verify_witness(graph: Graph, witness: DenseWitness) -> Verdict:
    for v in witness.vertices:
        if not 0 <= v < graph.s:
            return Verdict(valid=False, reason=f"vertex {v} is outside [0, {graph.s})")
    inside = set(witness.vertices)
    for e in witness.spanned:
        if not 0 <= e < graph.m:
            return Verdict(valid=False, reason=f"edge {e} does not exist (m={graph.m})")
        missing = [v for v in graph.edges[e] if v not in inside]
        if missing:
            return Verdict(
                valid=False, reason=f"edge {e} {graph.edges[e]} is not spanned: {missing[0]} not in S"
            )
    if witness.surplus < witness.gap:
        return Verdict(
            valid=False,
            reason=f"|spanned| - |S| = {witness.surplus} is below the claimed gap {witness.gap}",
        )
    return Verdict(valid=True)


def _vertex_sets(graph: Graph) -> list[tuple[int, ...]]:
    return [tuple(sorted(set(edge))) for edge in graph.edges]


def _members(mask: int) -> tuple[int, ...]:
    out: list[int] = []
    while mask:
        low = mask & -mask
        out.append(low.bit_length() - 1)
        mask ^= low
    return tuple(out)


def _scan(
    edges: list[tuple[int, ...]], s: int, k_max: int, free_bits: int, prefix: int
) -> _Key:
    """
    Gray-code walk over all subsets of the low `free_bits` vertices, with the
    high vertices fixed to `prefix`. Returns the best key in that slice.
    """
    incident: list[list[int]] = [[] for _ in range(s)]
    for i, edge in enumerate(edges):
        for v in edge:
            incident[v].append(i)

    mask = prefix << free_bits
    missing = [sum(1 for v in edge if not mask >> v & 1) for edge in edges]
    spanned = sum(1 for c in missing if c == 0)
    size = mask.bit_count()

    best: _Key | None = None

    def offer() -> None:
        nonlocal best
        if size > k_max:
            return
        gap = spanned - size
        if best is not None:
            if -gap > best[0] or (-gap == best[0] and size > best[1]):
                return
            if -gap == best[0] and size == best[1] and _members(mask) >= best[2]:
                return
        best = (-gap, size, _members(mask))

    offer()
    for step in range(1, 1 << free_bits):
        v = (step & -step).bit_length() - 1
        bit = 1 << v
        mask ^= bit
        if mask & bit:
            size += 1
            for i in incident[v]:
                missing[i] -= 1
                if missing[i] == 0:
                    spanned += 1
        else:
            size -= 1
            for i in incident[v]:
                if missing[i] == 0:
                    spanned -= 1
                missing[i] += 1
        offer()

    if best is None:
        # every subset in the slice is larger than k_max
        return (1, s + 1, ())
    return best


def brute_force_best_gap(
    graph: Graph,
    k_max: int,
    budget: int | None = None,
    workers: int = 1,
) -> tuple[tuple[int, ...], int]:
    """
    Over all S with |S| <= k_max, maximize |spanned(S)| - |S|; ties go to the
    smaller set, then the lexicographically smaller one. The empty set
    (gap 0) takes part.
    """
    if k_max < 0:
        raise PreconditionError(f"k_max must be >= 0, got {k_max}")
    budget = config.ORACLE_BUDGET if budget is None else budget
    if 2**graph.s > budget:
        raise BudgetExceededError(
            f"2^{graph.s} subsets exceed the enumeration budget of {budget}"
        )

    edges = _vertex_sets(graph)
    prefix_bits = 0
    while (1 << prefix_bits) < workers and prefix_bits < graph.s:
        prefix_bits += 1
    free_bits = graph.s - prefix_bits
    prefixes = range(1 << prefix_bits)

    if workers > 1 and prefix_bits > 0:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            keys = list(
                pool.map(
                    _scan,
                    *zip(*[(edges, graph.s, k_max, free_bits, p) for p in prefixes]),
                )
            )
    else:
        keys = [_scan(edges, graph.s, k_max, free_bits, p) for p in prefixes]

    neg_gap, _, vertices = min(keys)
    logger.debug(f"oracle: s={graph.s}, k_max={k_max}, best gap {-neg_gap} at {vertices}")
    return vertices, -neg_gap


def exists_k_spanning_k(
    graph: Graph, k: int, budget: int | None = None
) -> bool:
    """
    Whether some k vertices span at least k edges. Enumerates k-subsets of
    whichever side is smaller: vertices, or edges (k edges whose union has
    at most k vertices can be padded to a k-set).
    """
    if k < 1:
        raise PreconditionError(f"k must be >= 1, got {k}")
    if k > graph.s or graph.m < k:
        return False
    budget = config.ORACLE_BUDGET if budget is None else budget

    vertex_count = math.comb(graph.s, k)
    edge_count = math.comb(graph.m, k)
    if min(vertex_count, edge_count) > budget:
        raise BudgetExceededError(
            f"min(C({graph.s},{k}), C({graph.m},{k})) exceeds the enumeration budget of {budget}"
        )

    masks = [sum(1 << v for v in edge) for edge in _vertex_sets(graph)]
    if edge_count <= vertex_count:
        return _edge_union_search(masks, k)

    for chosen in combinations(range(graph.s), k):
        inside = sum(1 << v for v in chosen)
        count = 0
        for mask in masks:
            if mask & ~inside == 0:
                count += 1
                if count >= k:
                    return True
    return False


def _edge_union_search(masks: Sequence[int], k: int) -> bool:
    """Depth-first choice of k edges, pruned once their vertex union exceeds k."""

    def extend(start: int, chosen: int, union: int) -> bool:
        if chosen == k:
            return True
        for i in range(start, len(masks) - (k - chosen) + 1):
            merged = union | masks[i]
            if merged.bit_count() <= k and extend(i + 1, chosen + 1, merged):
                return True
        return False

    return extend(0, 0, 0)
