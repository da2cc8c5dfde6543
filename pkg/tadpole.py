"""
Short path-plus-cycle search from a start vertex in a near-cubic multigraph.

Every vertex other than the start has degree at least three, so a BFS tree
at least doubles per level until some edge closes a cycle; the first closing
level bounds both the path and the cycle by 4*log2(s).
"""

from __future__ import annotations

import logging
from fractions import Fraction

from bounds import log2_cmp
from graph_core import degrees, incidence
from models import InternalInvariantError, Multigraph, PreconditionError, Tadpole

logger = logging.getLogger(__name__)

# Exhaustive search replaces BFS at and below this vertex count
SMALL_GRAPH = 3


def within_bound(s: int, length: int) -> bool:
    """length <= 4 * log2(s), exactly."""
    return s >= 1 and log2_cmp(s, Fraction(length, 4)) >= 0


def check_preconditions(graph: Multigraph, start: int) -> None:
    if graph.s < 2:
        raise PreconditionError(f"tadpole search needs s >= 2, got s={graph.s}")
    if not 0 <= start < graph.s:
        raise PreconditionError(f"start vertex {start} is outside [0, {graph.s})")
    deg = degrees(graph)
    if deg[start] < 1:
        raise PreconditionError(f"start vertex {start} is isolated")
    for u, d in enumerate(deg):
        if u != start and d < 3:
            raise PreconditionError(f"vertex {u} has degree {d} < 3")


def find_tadpole(graph: Multigraph, start: int) -> Tadpole:
    check_preconditions(graph, start)

    if graph.s <= SMALL_GRAPH:
        tadpole = shortest_tadpole(graph, start)
        if tadpole is None:
            raise InternalInvariantError(
                f"no tadpole from {start} in a graph meeting the degree conditions"
            )
        return tadpole

    tadpole = _bfs_tadpole(graph, start)
    if not within_bound(graph.s, tadpole.k + tadpole.ell):
        raise InternalInvariantError(
            f"tadpole with k+l={tadpole.k + tadpole.ell} exceeds 4*log2({graph.s})"
        )
    return tadpole


def _bfs_tadpole(graph: Multigraph, start: int) -> Tadpole:
    adjacency = incidence(graph)
    parent: dict[int, int] = {}
    parent_edge: dict[int, int] = {}
    depth = {start: 0}
    frontier = [start]

    while frontier:
        closings: list[tuple[int, int, int]] = []
        next_frontier: list[int] = []
        for u in frontier:
            for w, e in adjacency[u]:
                if e == parent_edge.get(u):
                    continue
                if w in depth:
                    closings.append((u, w, e))
                else:
                    parent[w] = u
                    parent_edge[w] = e
                    depth[w] = depth[u] + 1
                    next_frontier.append(w)

        if closings:
            logger.debug(
                f"BFS from {start}: {len(closings)} closing edges at depth {depth[frontier[0]]}"
            )
            best = min(
                closings,
                key=lambda c: (_meeting_point(c[0], c[1], parent, depth), c[2]),
            )
            return _assemble(start, *best, parent, parent_edge, depth)
        frontier = next_frontier

    raise InternalInvariantError(f"BFS from {start} exhausted the component without a cycle")


def _meeting_point(u: int, w: int, parent: dict[int, int], depth: dict[int, int]) -> int:
    while depth[u] > depth[w]:
        u = parent[u]
    while depth[w] > depth[u]:
        w = parent[w]
    while u != w:
        u, w = parent[u], parent[w]
    return u


def _assemble(
    start: int,
    u: int,
    w: int,
    closing_edge: int,
    parent: dict[int, int],
    parent_edge: dict[int, int],
    depth: dict[int, int],
) -> Tadpole:
    top = _meeting_point(u, w, parent, depth)

    # top -> ... -> u, then u -> w over the closing edge, then w -> ... back up to top
    down: list[int] = []
    x = u
    while x != top:
        down.append(x)
        x = parent[x]
    down.reverse()
    up: list[int] = []
    x = w
    while x != top:
        up.append(x)
        x = parent[x]

    cycle = [top, *down, *up]
    cycle_edges = [parent_edge[x] for x in down]
    cycle_edges.append(closing_edge)
    cycle_edges.extend(parent_edge[x] for x in up)

    path = [top]
    x = top
    while x != start:
        x = parent[x]
        path.append(x)
    path.reverse()
    path_edges = [parent_edge[x] for x in path[1:]]

    return Tadpole(
        path=tuple(path),
        path_edges=tuple(path_edges),
        cycle=tuple(cycle),
        cycle_edges=tuple(cycle_edges),
    )


def shortest_tadpole(graph: Multigraph, start: int) -> Tadpole | None:
    """
    Exhaustive search for the tadpole from `start` minimizing k + l, ties
    broken lexicographically. Exponential; meant for graphs of a few vertices.
    """
    if not 0 <= start < graph.s:
        raise PreconditionError(f"start vertex {start} is outside [0, {graph.s})")
    adjacency = incidence(graph)
    best: tuple | None = None

    def consider(path: list[int], path_edges: list[int], cycle: list[int], cycle_edges: list[int]) -> None:
        nonlocal best
        key = (len(path) + len(cycle), tuple(path), tuple(path_edges), tuple(cycle), tuple(cycle_edges))
        if best is None or key < best:
            best = key

    def cycles_from(path: list[int], path_edges: list[int]) -> None:
        anchor = path[-1]
        blocked = set(path[:-1])
        used_path_edges = set(path_edges)

        def extend(cycle: list[int], cycle_edges: list[int]) -> None:
            if best is not None and len(path) + len(cycle) >= best[0]:
                return
            for w, e in adjacency[cycle[-1]]:
                if e in used_path_edges or e in cycle_edges:
                    continue
                if w == anchor:
                    consider(path, path_edges, cycle, [*cycle_edges, e])
                elif w not in blocked and w not in cycle:
                    extend([*cycle, w], [*cycle_edges, e])

        extend([anchor], [])

    def paths(path: list[int], path_edges: list[int]) -> None:
        if best is not None and len(path) + 1 > best[0]:
            return
        cycles_from(path, path_edges)
        for w, e in adjacency[path[-1]]:
            if w not in path:
                paths([*path, w], [*path_edges, e])

    paths([start], [])
    if best is None:
        return None
    _, path, path_edges, cycle, cycle_edges = best
    return Tadpole(path=path, path_edges=path_edges, cycle=cycle, cycle_edges=cycle_edges)


def _joins(graph: Multigraph, edge: int, a: int, b: int) -> bool:
    return 0 <= edge < graph.m and graph.edges[edge] == (min(a, b), max(a, b))


def validate_tadpole(graph: Multigraph, start: int, tadpole: Tadpole) -> list[str]:
    """Every structural problem with `tadpole` as an answer for `start`; empty when valid."""
    problems: list[str] = []
    path, cycle = tadpole.path, tadpole.cycle

    if path[0] != start:
        problems.append(f"path starts at {path[0]}, not at {start}")
    outside = [v for v in (*path, *cycle) if not 0 <= v < graph.s]
    if outside:
        problems.append(f"vertex {outside[0]} is outside [0, {graph.s})")
        return problems

    for i, e in enumerate(tadpole.path_edges):
        if not _joins(graph, e, path[i], path[i + 1]):
            problems.append(f"edge {e} does not join path vertices {path[i]} and {path[i + 1]}")
    for i, e in enumerate(tadpole.cycle_edges):
        a, b = cycle[i], cycle[(i + 1) % len(cycle)]
        if not _joins(graph, e, a, b):
            problems.append(f"edge {e} does not join cycle vertices {a} and {b}")

    if len(set(path)) != len(path):
        problems.append("path repeats a vertex")
    if len(set(cycle)) != len(cycle):
        problems.append("cycle repeats a vertex")
    shared = set(path) & set(cycle)
    if shared != {cycle[0]}:
        problems.append(f"path and cycle share {sorted(shared)}, expected only {cycle[0]}")
    all_edges = (*tadpole.path_edges, *tadpole.cycle_edges)
    if len(set(all_edges)) != len(all_edges):
        problems.append("an edge is used twice")

    if not within_bound(graph.s, tadpole.k + tadpole.ell):
        problems.append(f"k+l={tadpole.k + tadpole.ell} exceeds 4*log2({graph.s})")
    return problems
