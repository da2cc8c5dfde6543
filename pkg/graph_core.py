"""
Graph text format, span counting and vertex-set contraction shared by the finders
"""

from __future__ import annotations

import logging
from collections.abc import Iterable
from fractions import Fraction

from pydantic import ValidationError

from models import (
    DenseWitness,
    GraphFormatError,
    Multigraph,
    PreconditionError,
    THypergraph,
    VertexMap,
)

logger = logging.getLogger(__name__)

type Graph = Multigraph | THypergraph


def text_records(text: bytes | str) -> list[tuple[int, list[str]]]:
    """Non-empty lines as (line number, tokens) with '#' comments stripped."""
    if isinstance(text, bytes):
        try:
            text = text.decode("utf-8")
        except UnicodeDecodeError as e:
            raise GraphFormatError(f"input is not UTF-8: {e}") from e
    records: list[tuple[int, list[str]]] = []
    for number, raw in enumerate(text.splitlines(), start=1):
        tokens = raw.split("#", 1)[0].split()
        if tokens:
            records.append((number, tokens))
    return records


def decimal_ints(tokens: list[str], line: int) -> list[int]:
    try:
        values = [int(tok, 10) for tok in tokens]
    except ValueError as e:
        raise GraphFormatError(f"line {line}: expected decimal integers, got {tokens}") from e
    if any(v < 0 for v in values):
        raise GraphFormatError(f"line {line}: negative value in {tokens}")
    return values


def parse_graph_file(text: bytes | str) -> Graph:
    """
    Parse the edge-list format:
        g <s> <m>        then m lines  e <u> <v>
        h <s> <t> <m>    then m lines  e <v1> [<v2> ...]
    """
    records = text_records(text)
    if not records:
        raise GraphFormatError("empty input: missing 'g' or 'h' header")

    line, header = records[0]
    kind = header[0]
    if kind == "g" and len(header) == 3:
        s, m = decimal_ints(header[1:], line)
        t = 2
    elif kind == "h" and len(header) == 4:
        s, t, m = decimal_ints(header[1:], line)
        if t < 2:
            raise GraphFormatError(f"line {line}: arity t must be >= 2, got {t}")
    else:
        raise GraphFormatError(
            f"line {line}: malformed header {' '.join(header)!r}; "
            "expected 'g <s> <m>' or 'h <s> <t> <m>'"
        )

    body = records[1:]
    if len(body) != m:
        raise GraphFormatError(f"header announces {m} edges, found {len(body)}")

    edges: list[tuple[int, ...]] = []
    for line, tokens in body:
        if tokens[0] != "e":
            raise GraphFormatError(f"line {line}: expected an 'e' record, got {tokens[0]!r}")
        vertices = decimal_ints(tokens[1:], line)
        if kind == "g" and len(vertices) != 2:
            raise GraphFormatError(f"line {line}: a multigraph edge needs exactly 2 endpoints")
        if not vertices:
            raise GraphFormatError(f"line {line}: hyperedge without vertices")
        if kind == "h" and len(set(vertices)) != len(vertices):
            raise GraphFormatError(f"line {line}: duplicate vertex in hyperedge {vertices}")
        if len(vertices) > t:
            raise GraphFormatError(
                f"line {line}: hyperedge of size {len(vertices)} exceeds t={t}"
            )
        bad = [v for v in vertices if v >= s]
        if bad:
            raise GraphFormatError(f"line {line}: vertex id {bad[0]} >= s={s}")
        edges.append(tuple(vertices))

    try:
        if kind == "g":
            return Multigraph(s=s, edges=tuple((e[0], e[1]) for e in edges))
        return THypergraph(s=s, t=t, edges=tuple(edges))
    except ValidationError as e:
        raise GraphFormatError(str(e)) from e


def serialize_graph(graph: Graph) -> str:
    """Canonical text form; parse_graph_file(serialize_graph(G)) == G."""
    if isinstance(graph, Multigraph):
        lines = [f"g {graph.s} {graph.m}"]
    else:
        lines = [f"h {graph.s} {graph.t} {graph.m}"]
    lines.extend("e " + " ".join(map(str, edge)) for edge in graph.edges)
    return "\n".join(lines) + "\n"


def _check_vertices(graph: Graph, vertices: Iterable[int]) -> frozenset[int]:
    chosen = frozenset(vertices)
    bad = sorted(v for v in chosen if not 0 <= v < graph.s)
    if bad:
        raise PreconditionError(f"vertex id {bad[0]} is outside [0, {graph.s})")
    return chosen


def spanned_edges(graph: Graph, vertices: Iterable[int]) -> tuple[int, ...]:
    """Indices (ascending) of the edges whose every vertex lies in `vertices`."""
    chosen = _check_vertices(graph, vertices)
    return tuple(
        index
        for index, edge in enumerate(graph.edges)
        if all(v in chosen for v in edge)
    )


def degrees(graph: Graph) -> tuple[int, ...]:
    """Degree per vertex; a multigraph self-loop adds two."""
    deg = [0] * graph.s
    if isinstance(graph, Multigraph):
        for u, v in graph.edges:
            deg[u] += 1
            deg[v] += 1
    else:
        for edge in graph.edges:
            for v in edge:
                deg[v] += 1
    return tuple(deg)


def incidence(graph: Multigraph) -> tuple[tuple[tuple[int, int], ...], ...]:
    """
    Per vertex, (neighbor, edge index) pairs ordered by neighbor then edge
    index. A self-loop is listed once, with the vertex as its own neighbor.
    """
    adjacency: list[list[tuple[int, int]]] = [[] for _ in range(graph.s)]
    for index, (u, v) in enumerate(graph.edges):
        adjacency[u].append((v, index))
        if u != v:
            adjacency[v].append((u, index))
    return tuple(tuple(sorted(pairs)) for pairs in adjacency)


def contract(
    graph: Multigraph, vertices: Iterable[int], drop_internal: bool
) -> tuple[Multigraph, VertexMap]:
    """
    Collapse `vertices` into one new vertex. Survivors keep their relative
    order and are renumbered from 0; the merged vertex gets the last id.
    Edges with both ends inside are dropped or turned into self-loops.
    """
    chosen = _check_vertices(graph, vertices)
    if not chosen:
        raise PreconditionError("cannot contract an empty vertex set")

    forward = [0] * graph.s
    next_id = 0
    for v in range(graph.s):
        if v not in chosen:
            forward[v] = next_id
            next_id += 1
    merged = next_id
    for v in chosen:
        forward[v] = merged

    edges: list[tuple[int, int]] = []
    origin: list[int] = []
    for index, (u, v) in enumerate(graph.edges):
        if drop_internal and u in chosen and v in chosen:
            continue
        edges.append((forward[u], forward[v]))
        origin.append(index)

    contracted = Multigraph(s=merged + 1, edges=tuple(edges))
    mapping = VertexMap(forward=tuple(forward), merged=merged, edge_origin=tuple(origin))
    logger.debug(
        f"Contracted {len(chosen)} vertices: s {graph.s} -> {contracted.s}, "
        f"m {graph.m} -> {contracted.m}"
    )
    return contracted, mapping


def to_hypergraph(graph: Multigraph) -> THypergraph:
    """View a multigraph as a 2-hypergraph; a self-loop becomes a singleton edge."""
    return THypergraph(
        s=graph.s,
        t=2,
        edges=tuple((u,) if u == v else (u, v) for u, v in graph.edges),
    )


def to_multigraph(graph: THypergraph) -> Multigraph:
    """Inverse of to_hypergraph; singleton edges become self-loops."""
    if graph.t != 2 and any(len(edge) > 2 for edge in graph.edges):
        raise PreconditionError(f"a {graph.t}-hypergraph with large edges is not a multigraph")
    return Multigraph(
        s=graph.s,
        edges=tuple((e[0], e[0]) if len(e) == 1 else (e[0], e[1]) for e in graph.edges),
    )


def format_witness(witness: DenseWitness) -> str:
    return (
        f"S: {' '.join(map(str, witness.vertices))}\n"
        f"edges: {' '.join(map(str, witness.spanned))}\n"
        f"gap: {witness.gap}\n"
    )


def parse_witness(text: bytes | str) -> DenseWitness:
    fields: dict[str, str] = {}
    for line, tokens in text_records(text):
        key = tokens[0]
        if not key.endswith(":") or key[:-1] not in ("S", "edges", "gap"):
            raise GraphFormatError(f"line {line}: expected 'S:', 'edges:' or 'gap:'")
        if key[:-1] in fields:
            raise GraphFormatError(f"line {line}: repeated {key!r}")
        fields[key[:-1]] = " ".join(tokens[1:])
    missing = [k for k in ("S", "edges", "gap") if k not in fields]
    if missing:
        raise GraphFormatError(f"witness is missing {missing[0]!r}")
    try:
        return DenseWitness(
            vertices=tuple(decimal_ints(fields["S"].split(), 0)),
            spanned=tuple(decimal_ints(fields["edges"].split(), 0)),
            gap=Fraction(fields["gap"]),
        )
    except (ValueError, ZeroDivisionError) as e:
        raise GraphFormatError(f"malformed witness: {e}") from e
