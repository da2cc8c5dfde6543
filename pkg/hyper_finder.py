"""
Dense sets in t-hypergraphs by peeling one arity at a time.

At arity t >= 3 a small heavy vertex set L is chosen, one vertex of L is
removed from every edge touching L, and the search recurses on the
resulting (t-1)-hypergraph with budget k - |L|. At arity two the problem is
a multigraph gap search.
"""

from __future__ import annotations

import logging
from fractions import Fraction

from bounds import ceil_ratio, floor_ratio, hyper_density_holds, log2_cmp
from dense_core import find_any_dense_set
from gap_finder import find_gap_set
from graph_core import degrees, spanned_edges, to_multigraph
from models import (
    DenseWitness,
    HeavySet,
    InternalInvariantError,
    NoWitness,
    PeelMap,
    PreconditionError,
    SearchMode,
    THypergraph,
)

logger = logging.getLogger(__name__)


def pad_to_uniform(graph: THypergraph) -> THypergraph:
    """Fill every edge up to t vertices with the lowest ids it does not contain."""
    if graph.s < graph.t:
        raise PreconditionError(f"cannot pad to t={graph.t} vertices with s={graph.s}")
    padded: list[tuple[int, ...]] = []
    for edge in graph.edges:
        members = set(edge)
        filler = (v for v in range(graph.s) if v not in members)
        while len(members) < graph.t:
            members.add(next(filler))
        padded.append(tuple(sorted(members)))
    return THypergraph(s=graph.s, t=graph.t, edges=tuple(padded))


def _touched(graph: THypergraph, chosen: set[int]) -> tuple[int, ...]:
    return tuple(i for i, edge in enumerate(graph.edges) if any(v in chosen for v in edge))


def select_heavy_set(graph: THypergraph, ell: int) -> HeavySet:
    """
    The ell highest-degree vertices (ties to the lower id) with every edge
    touching them. Falls back to greedy coverage if that misses ell*m/s.
    """
    if not 1 <= ell <= graph.s:
        raise PreconditionError(f"heavy set size must lie in [1, s={graph.s}], got {ell}")

    deg = degrees(graph)
    ranked = sorted(range(graph.s), key=lambda v: (-deg[v], v))
    chosen = set(ranked[:ell])
    touched = _touched(graph, chosen)

    if len(touched) * graph.s < ell * graph.m:
        logger.debug(f"top-{ell} degrees touch only {len(touched)} edges; using greedy cover")
        chosen, touched = _greedy_cover(graph, ell)

    return HeavySet(
        vertices=tuple(sorted(chosen)),
        touched=touched,
        source_s=graph.s,
        source_m=graph.m,
    )


def _greedy_cover(graph: THypergraph, ell: int) -> tuple[set[int], tuple[int, ...]]:
    uncovered = set(range(graph.m))
    chosen: set[int] = set()
    for _ in range(ell):
        gain = [0] * graph.s
        for i in uncovered:
            for v in graph.edges[i]:
                gain[v] += 1
        pick = max((v for v in range(graph.s) if v not in chosen), key=lambda v: (gain[v], -v))
        chosen.add(pick)
        uncovered = {i for i in uncovered if pick not in graph.edges[i]}
    return chosen, _touched(graph, chosen)


def peel(graph: THypergraph, heavy: HeavySet) -> tuple[THypergraph, PeelMap]:
    """Drop from each touched edge its lowest vertex in L; arity falls to t-1."""
    if graph.t < 3:
        raise PreconditionError(f"peeling needs arity t >= 3, got t={graph.t}")
    members = set(heavy.vertices)
    edges: list[tuple[int, ...]] = []
    entries: list[tuple[int, int]] = []
    for i in heavy.touched:
        edge = graph.edges[i]
        hits = [v for v in edge if v in members]
        if not hits:
            raise PreconditionError(f"edge {i} {edge} does not meet the heavy set")
        removed = min(hits)
        rest = tuple(v for v in edge if v != removed)
        if not rest:
            raise PreconditionError(f"peeling edge {i} {edge} leaves it empty; pad it first")
        edges.append(rest)
        entries.append((i, removed))
    peeled = THypergraph(s=graph.s, t=graph.t - 1, edges=tuple(edges))
    return peeled, PeelMap(entries=tuple(entries))


def check_strict_preconditions(graph: THypergraph, k: int) -> None:
    s, t = graph.s, graph.t
    if s < 2:
        raise PreconditionError(f"s >= 2 fails: s={s}")
    if k > s:
        raise PreconditionError(f"k <= s fails: k={k} > s={s}")
    if log2_cmp(s, Fraction(k, 2 ** (t + 2))) > 0:
        raise PreconditionError(
            f"2^(t+2)*log2(s) <= k fails: 2^{t + 2}*log2({s}) > {k}"
        )
    if not hyper_density_holds(s, t, k, graph.m):
        raise PreconditionError(
            f"m >= 3s(2^(t+3)*s*log2(s)/k)^(t-2) fails for s={s}, t={t}, k={k}, m={graph.m}"
        )


def _base_case(graph: THypergraph, k: int, s: int, strict: bool) -> set[int]:
    multigraph = to_multigraph(graph)
    target = max(1, ceil_ratio(k, 8, s))
    if strict:
        return set(find_gap_set(multigraph, target).vertices)

    for gap in range(target, 0, -1):
        if multigraph.s >= 2 and multigraph.m >= 2 * multigraph.s + gap + 1:
            logger.debug(f"best effort base case: gap target {gap}")
            return set(find_gap_set(multigraph, gap).vertices)
    found = find_any_dense_set(multigraph)
    return set() if found is None else set(found.vertices)


def _search(graph: THypergraph, k: int, s: int, strict: bool) -> set[int]:
    if graph.t == 2:
        return _base_case(graph, k, s, strict)

    t = graph.t
    ell = max(1, min(ceil_ratio(k, 2 ** (t + 3), s), floor_ratio(k, 2 ** (t + 2), s), s))
    heavy = select_heavy_set(graph, ell)
    peeled, _ = peel(graph, heavy)
    budget = k - ell
    logger.debug(
        f"peel t={t}: l={ell}, {len(heavy.touched)} of {graph.m} edges touched, budget {budget}"
    )

    if strict:
        if 4 * ell > k:
            raise InternalInvariantError(f"l={ell} exceeds k/4 for k={k}")
        if log2_cmp(s, Fraction(budget, 2 ** (t + 1))) > 0:
            raise InternalInvariantError(f"2^(t+1)*log2(s) <= k-l fails at t={t}")
        if not hyper_density_holds(s, t - 1, budget, peeled.m):
            raise InternalInvariantError(
                f"density condition not re-established at t={t - 1} with m={peeled.m}"
            )

    return _search(peeled, budget, s, strict) | set(heavy.vertices)


def find_hyper_dense(
    graph: THypergraph, k: int, mode: SearchMode = SearchMode.STRICT
) -> DenseWitness | NoWitness:
    """
    Strict mode returns S with |S| <= k spanning at least
    |S| + k/(2^(t+1)*log2(s)) edges, or raises PreconditionError.
    Best-effort mode skips the preconditions and returns NoWitness when
    nothing with a positive gap turns up.
    """
    strict = mode is SearchMode.STRICT
    s, t = graph.s, graph.t
    if strict:
        check_strict_preconditions(graph, k)
    elif s < 2 or s < t or k < 1:
        return NoWitness(reason=f"no search possible with s={s}, t={t}, k={k}")

    working = graph if t == 2 else pad_to_uniform(graph)
    chosen = _search(working, k, s, strict)

    edges = spanned_edges(graph, chosen)
    gap = len(edges) - len(chosen)
    witness_gap = max(gap, 0)

    if strict:
        if len(chosen) > k:
            raise InternalInvariantError(f"witness of size {len(chosen)} exceeds k={k}")
        # gap >= k / (2^(t+1) * log2 s)  <=>  log2 s >= k / (gap * 2^(t+1))
        if gap < 1 or log2_cmp(s, Fraction(k, gap * 2 ** (t + 1))) < 0:
            raise InternalInvariantError(
                f"gap {gap} below k/(2^{t + 1}*log2({s})) for k={k}"
            )
    elif not chosen or gap < 1:
        return NoWitness(reason=f"best set found spans {len(edges)} edges on {len(chosen)} vertices")

    logger.info(f"Hypergraph dense set: t={t}, |S|={len(chosen)}, gap={gap}")
    return DenseWitness(vertices=tuple(chosen), spanned=edges, gap=witness_gap)
