"""
Dense-set search in multigraphs with density above one.

The graph is first reduced to minimum degree three by removing isolated,
degree-one and loop-only vertices and long chains of degree-two vertices,
then contracting the remaining short chains into single edges. Every rewrite
is recorded in a ContractionLog so a set found in the reduced graph can be
lifted back to the original one.
"""

from __future__ import annotations

import logging
import math
from collections.abc import Iterable
from fractions import Fraction

from bounds import log2_cmp
from graph_core import contract, spanned_edges
from models import (
    ContractionLog,
    ContractPath,
    DenseWitness,
    InternalInvariantError,
    Multigraph,
    PreconditionError,
    ReductionStep,
    RemoveDegreeOne,
    RemoveIsolated,
    RemoveLongPath,
    RemoveLoopOnly,
    WitnessMismatchError,
)
from tadpole import find_tadpole

logger = logging.getLogger(__name__)


class _Chain:
    """A maximal run of degree-two vertices, or a whole degree-two cycle."""

    __slots__ = ("internal", "edges", "endpoints")

    def __init__(
        self,
        internal: list[int],
        edges: list[int],
        endpoints: tuple[int, int] | None,
    ) -> None:
        self.internal = internal
        self.edges = edges
        self.endpoints = endpoints

    @property
    def is_cycle(self) -> bool:
        return self.endpoints is None


class _Workspace:
    """
    Mutable graph under reduction. Vertices keep their original ids; edges
    keep their working ids (original index, or a fresh id for a contracted
    chain).
    """

    def __init__(self, graph: Multigraph) -> None:
        self.source = graph
        self.alive: set[int] = set(range(graph.s))
        self.ends: dict[int, tuple[int, int]] = dict(enumerate(graph.edges))
        self.incident: list[set[int]] = [set() for _ in range(graph.s)]
        for index, (u, v) in enumerate(graph.edges):
            self.incident[u].add(index)
            self.incident[v].add(index)
        self.next_edge = graph.m

    def degree(self, v: int) -> int:
        return sum(2 if self._is_loop(e) else 1 for e in self.incident[v])

    def _is_loop(self, e: int) -> bool:
        u, v = self.ends[e]
        return u == v

    def _other(self, e: int, v: int) -> int:
        a, b = self.ends[e]
        return b if a == v else a

    def _drop_edge(self, e: int) -> None:
        u, v = self.ends.pop(e)
        self.incident[u].discard(e)
        self.incident[v].discard(e)

    def _drop_vertex(self, v: int) -> None:
        if self.incident[v]:
            raise WitnessMismatchError(f"vertex {v} still has incident edges")
        self.alive.remove(v)

    def _require_alive(self, v: int) -> None:
        if v not in self.alive:
            raise WitnessMismatchError(f"vertex {v} is not present")

    def chain_through(self, x: int) -> _Chain:
        """The maximal degree-two chain containing the degree-two vertex x."""
        first, second = sorted(self.incident[x])
        forward, forward_edges, forward_end = self._walk(x, first)
        if forward_end is None:
            return _Chain([x, *forward], [first, *forward_edges], None)
        backward, backward_edges, backward_end = self._walk(x, second)
        internal = [*reversed(backward), x, *forward]
        edges = [*reversed(backward_edges), second, first, *forward_edges]
        return _Chain(internal, edges, (backward_end, forward_end))

    def _walk(self, x: int, edge: int) -> tuple[list[int], list[int], int | None]:
        """Follow `edge` away from x through degree-two vertices; None as the end means back at x."""
        vertices: list[int] = []
        edges: list[int] = []
        current, via = x, edge
        while True:
            nxt = self._other(via, current)
            if nxt == x:
                return vertices, edges, None
            if self.degree(nxt) != 2:
                return vertices, edges, nxt
            vertices.append(nxt)
            (via,) = self.incident[nxt] - {via}
            edges.append(via)
            current = nxt

    def next_removal(self, epsilon: Fraction) -> ReductionStep | None:
        """Highest-priority removal: isolated, degree one, loop only, long path; lowest id first."""
        order = sorted(self.alive)
        deg = {v: self.degree(v) for v in order}
        for v in order:
            if deg[v] == 0:
                return RemoveIsolated(vertex=v)
        for v in order:
            if deg[v] == 1:
                (e,) = self.incident[v]
                return RemoveDegreeOne(vertex=v, edge=e)
        for v in order:
            if deg[v] == 2 and len(self.incident[v]) == 1:
                (e,) = self.incident[v]
                return RemoveLoopOnly(vertex=v, loop=e)
        seen: set[int] = set()
        for v in order:
            if deg[v] != 2 or v in seen:
                continue
            chain = self.chain_through(v)
            seen.update(chain.internal)
            if chain.is_cycle or len(chain.internal) * epsilon >= 1:
                return RemoveLongPath(internal=tuple(chain.internal), edges=tuple(chain.edges))
        return None

    def next_contraction(self) -> ContractPath | None:
        for v in sorted(self.alive):
            if self.degree(v) == 2:
                chain = self.chain_through(v)
                if chain.is_cycle:
                    raise InternalInvariantError(f"degree-two cycle through {v} survived removal")
                return ContractPath(
                    new_edge=self.next_edge,
                    endpoints=chain.endpoints,
                    internal=tuple(chain.internal),
                    edges=tuple(chain.edges),
                )
        return None

    def apply(self, step: ReductionStep) -> None:
        match step:
            case RemoveIsolated(vertex=v):
                self._require_alive(v)
                self._drop_vertex(v)
            case RemoveDegreeOne(vertex=v, edge=e):
                self._require_alive(v)
                if self.incident[v] != {e} or self._is_loop(e):
                    raise WitnessMismatchError(f"vertex {v} is not a degree-one end of edge {e}")
                self._drop_edge(e)
                self._drop_vertex(v)
            case RemoveLoopOnly(vertex=v, loop=e):
                self._require_alive(v)
                if self.incident[v] != {e} or not self._is_loop(e):
                    raise WitnessMismatchError(f"vertex {v} does not carry only loop {e}")
                self._drop_edge(e)
                self._drop_vertex(v)
            case RemoveLongPath(internal=internal, edges=edges):
                touching: set[int] = set()
                for v in internal:
                    self._require_alive(v)
                    if self.degree(v) != 2:
                        raise WitnessMismatchError(f"vertex {v} does not have degree two")
                    touching |= self.incident[v]
                if touching != set(edges):
                    raise WitnessMismatchError("path edges do not match the internal vertices")
                for e in edges:
                    self._drop_edge(e)
                for v in internal:
                    self._drop_vertex(v)
            case ContractPath(new_edge=new, endpoints=(a, b), internal=internal, edges=edges):
                if new != self.next_edge:
                    raise WitnessMismatchError(f"expected new edge id {self.next_edge}, got {new}")
                walk = [a, *internal, b]
                for i, e in enumerate(edges):
                    if e not in self.ends or sorted(self.ends[e]) != sorted((walk[i], walk[i + 1])):
                        raise WitnessMismatchError(
                            f"edge {e} does not join {walk[i]} and {walk[i + 1]}"
                        )
                for v in internal:
                    self._require_alive(v)
                    if self.degree(v) != 2:
                        raise WitnessMismatchError(f"vertex {v} does not have degree two")
                for e in edges:
                    self._drop_edge(e)
                for v in internal:
                    self._drop_vertex(v)
                self.ends[new] = (min(a, b), max(a, b))
                self.incident[a].add(new)
                self.incident[b].add(new)
                self.next_edge += 1

    def snapshot(self) -> tuple[Multigraph, tuple[int, ...], tuple[int, ...]]:
        vertex_map = tuple(sorted(self.alive))
        relabel = {v: i for i, v in enumerate(vertex_map)}
        edge_map = tuple(sorted(self.ends))
        edges = tuple((relabel[self.ends[e][0]], relabel[self.ends[e][1]]) for e in edge_map)
        return Multigraph(s=len(vertex_map), edges=edges), vertex_map, edge_map


def _check_epsilon(epsilon: Fraction) -> Fraction:
    epsilon = Fraction(epsilon)
    if not 0 < epsilon <= 1:
        raise PreconditionError(f"epsilon must lie in (0, 1], got {epsilon}")
    return epsilon


def reduce_to_min_degree_three(
    graph: Multigraph, epsilon: Fraction
) -> tuple[Multigraph, ContractionLog]:
    epsilon = _check_epsilon(epsilon)
    work = _Workspace(graph)
    steps: list[ReductionStep] = []

    while (step := work.next_removal(epsilon)) is not None:
        work.apply(step)
        steps.append(step)
        logger.debug(f"reduce: {step.kind} -> s={len(work.alive)}, m={len(work.ends)}")

    while (step := work.next_contraction()) is not None:
        work.apply(step)
        steps.append(step)
        logger.debug(f"reduce: contracted {len(step.internal)} vertices into edge {step.new_edge}")

    reduced, vertex_map, edge_map = work.snapshot()
    log = ContractionLog(
        epsilon=epsilon,
        source=graph,
        steps=tuple(steps),
        vertex_map=vertex_map,
        edge_map=edge_map,
        reduced=reduced,
    )
    logger.info(
        f"Reduced s={graph.s}, m={graph.m} to s={reduced.s}, m={reduced.m} in {len(steps)} steps"
    )
    return reduced, log


def replay(graph: Multigraph, log: ContractionLog) -> list[Multigraph]:
    """
    Apply the log to `graph` step by step; element i is the graph after i
    steps, vertices and edges relabeled densely in ascending original order.
    """
    if graph != log.source:
        raise WitnessMismatchError("contraction log was recorded on a different graph")
    work = _Workspace(graph)
    states = [work.snapshot()[0]]
    for index, step in enumerate(log.steps):
        try:
            work.apply(step)
        except WitnessMismatchError as e:
            raise WitnessMismatchError(f"step {index} ({step.kind}): {e}") from e
        states.append(work.snapshot()[0])
    final, vertex_map, edge_map = work.snapshot()
    if (final, vertex_map, edge_map) != (log.reduced, log.vertex_map, log.edge_map):
        raise WitnessMismatchError("replayed graph differs from the recorded reduced graph")
    return states


def _original_internal(log: ContractionLog, working_edge: int) -> list[int]:
    """Vertices hidden inside a working edge, expanding nested contractions."""
    paths = log.contracted_paths()
    pending = [working_edge]
    hidden: list[int] = []
    while pending:
        e = pending.pop()
        step = paths.get(e)
        if step is not None:
            hidden.extend(step.internal)
            pending.extend(step.edges)
    return hidden


def expand_witness(
    log: ContractionLog, vertices: Iterable[int], spanned: Iterable[int]
) -> DenseWitness:
    """Lift a set of the reduced graph, spanning at least |S'|+1 edges, back to the source graph."""
    reduced = log.reduced
    vertices = sorted(set(vertices))
    spanned = sorted(set(spanned))
    for v in vertices:
        if not 0 <= v < reduced.s:
            raise WitnessMismatchError(f"vertex {v} is not in the reduced graph")
    inside = set(vertices)
    for e in spanned:
        if not 0 <= e < reduced.m:
            raise WitnessMismatchError(f"edge {e} is not in the reduced graph")
        u, v = reduced.edges[e]
        if u not in inside or v not in inside:
            raise WitnessMismatchError(f"edge {e} is not spanned by the given vertices")
    if len(spanned) < len(vertices) + 1:
        raise PreconditionError(
            f"{len(spanned)} spanned edges, need at least |S'|+1 = {len(vertices) + 1}"
        )

    lifted = {log.vertex_map[v] for v in vertices}
    for e in spanned[: len(vertices) + 1]:
        lifted.update(_original_internal(log, log.edge_map[e]))

    edges = spanned_edges(log.source, lifted)
    gap = len(edges) - len(lifted)
    if gap < 1:
        raise InternalInvariantError(f"expanded set spans {len(edges)} edges on {len(lifted)} vertices")
    return DenseWitness(vertices=tuple(lifted), spanned=edges, gap=gap)


def _dense_in_reduced(reduced: Multigraph) -> tuple[list[int], tuple[int, ...]]:
    """A vertex set spanning at least |S|+1 edges in a nonempty graph of minimum degree three."""
    if reduced.s == 1:
        return [0], spanned_edges(reduced, [0])

    first = find_tadpole(reduced, 0)
    cycle = set(first.cycle)
    leaves_cycle = any((u in cycle) != (v in cycle) for u, v in reduced.edges)

    if not leaves_cycle:
        chosen = sorted(cycle)
        logger.debug(f"cycle {first.cycle} is a whole component")
    else:
        merged_graph, mapping = contract(reduced, cycle, drop_internal=True)
        second = find_tadpole(merged_graph, mapping.merged)
        chosen_set = set(cycle)
        for x in second.vertices:
            if x != mapping.merged:
                chosen_set.update(mapping.preimage(x))
        chosen = sorted(chosen_set)
        logger.debug(f"two cycles joined by a path: {len(chosen)} vertices")

    edges = spanned_edges(reduced, chosen)
    if len(edges) < len(chosen) + 1:
        raise InternalInvariantError(
            f"set of {len(chosen)} vertices spans only {len(edges)} reduced edges"
        )
    return chosen, edges


def size_bound_holds(s: int, size: int, epsilon: Fraction) -> bool:
    """size <= 8 * log2(s) * ceil(1/epsilon), exactly."""
    return log2_cmp(s, Fraction(size, 8 * math.ceil(1 / Fraction(epsilon)))) >= 0


def find_dense_set(graph: Multigraph, epsilon: Fraction) -> DenseWitness:
    epsilon = _check_epsilon(epsilon)
    if graph.s < 2:
        raise PreconditionError(f"dense-set search needs s >= 2, got s={graph.s}")
    if graph.m < graph.s * (1 + epsilon):
        raise PreconditionError(
            f"m >= s(1+eps) fails: m={graph.m} < {graph.s}*(1+{epsilon})"
        )

    reduced, log = reduce_to_min_degree_three(graph, epsilon)
    if reduced.s == 0:
        logger.error(f"graph with s={graph.s}, m={graph.m} reduced to nothing")
        raise InternalInvariantError("reduction emptied a graph with density above 1+eps")

    chosen, edges = _dense_in_reduced(reduced)
    witness = expand_witness(log, chosen, edges)
    if not size_bound_holds(graph.s, witness.size, epsilon):
        raise InternalInvariantError(
            f"witness of size {witness.size} exceeds 8*log2({graph.s})*ceil(1/{epsilon})"
        )
    logger.info(f"Dense set of {witness.size} vertices with gap {witness.gap}")
    return witness


def find_any_dense_set(graph: Multigraph) -> DenseWitness | None:
    """
    Some set spanning more edges than vertices, or None when no such set
    exists (every component has at most one cycle). No size guarantee.
    """
    if graph.s == 0:
        return None
    # r * eps >= 1 is impossible for r <= s internal vertices, so only
    # witness-free parts of the graph are removed
    reduced, log = reduce_to_min_degree_three(graph, Fraction(1, graph.s + 1))
    if reduced.s == 0:
        return None
    chosen, edges = _dense_in_reduced(reduced)
    return expand_witness(log, chosen, edges)
