"""
Cell-probe side: k-wise independent linear problems over GF(p), the space
thresholds that force a dense witness, and the probe-layout auditor.

A non-adaptive layout with s cells and m queries of at most t probes each is
a t-hypergraph on the cells. A set of cells spanning more queries than
cells is a violation: those queries cannot be answered for a problem whose
every small set of columns has full rank.
"""

from __future__ import annotations

import logging
import math
from collections.abc import Iterable, Sequence
from fractions import Fraction
from itertools import combinations

import numpy as np
from pydantic import ValidationError
from sympy import GF
from sympy.polys.matrices import DomainMatrix

import config
from bounds import hyper_density_holds, hyper_density_rhs, log2_cmp, log2_float
from dense_core import find_any_dense_set, find_dense_set
from graph_core import decimal_ints, text_records
from hyper_finder import find_hyper_dense
from models import (
    AuditReport,
    AuditVerdict,
    BudgetExceededError,
    DenseWitness,
    GraphFormatError,
    InternalInvariantError,
    LinearProblem,
    Multigraph,
    PreconditionError,
    ProbeLayout,
    SearchMode,
    THypergraph,
    ThresholdCheck,
    check_field_prime,
)
from tightness_lab import sample_uniform_hypergraph

logger = logging.getLogger(__name__)

ENUMERATION_CHUNK = 1 << 16


# ---------------------------------------------------------------------------
# Linear problems
# ---------------------------------------------------------------------------


def vandermonde_problem(n: int, m: int, p: int) -> LinearProblem:
    """Query j reads sum_i x_i * (j+1)^i over GF(p)."""
    check_field_prime(p)
    if not 1 <= n <= m:
        raise PreconditionError(f"need 1 <= n <= m, got n={n}, m={m}")
    if p <= m:
        raise PreconditionError(f"need p > m for distinct points, got p={p}, m={m}")
    matrix = tuple(tuple(pow(j + 1, i, p) for j in range(m)) for i in range(n))
    return LinearProblem(p=p, n=n, m=m, matrix=matrix)


def rank_mod_p(problem: LinearProblem, columns: Sequence[int]) -> int:
    field = GF(problem.p)
    rows = [[field(problem.matrix[i][j]) for j in columns] for i in range(problem.n)]
    return DomainMatrix(rows, (problem.n, len(columns)), field).rank()


def kwise_rank_check(problem: LinearProblem, k: int, budget: int | None = None) -> bool:
    """True iff every k columns are linearly independent over GF(p)."""
    if not 1 <= k <= problem.n:
        raise PreconditionError(f"need 1 <= k <= n={problem.n}, got k={k}")
    budget = config.RANK_BUDGET if budget is None else budget
    if math.comb(problem.m, k) > budget:
        raise BudgetExceededError(
            f"C({problem.m},{k}) column subsets exceed the rank-check budget of {budget}"
        )
    for columns in combinations(range(problem.m), k):
        if rank_mod_p(problem, columns) < k:
            logger.debug(f"columns {columns} are dependent over GF({problem.p})")
            return False
    return True


def _answers(problem: LinearProblem, queries: Sequence[int], start: int, count: int) -> np.ndarray:
    """Answers to `queries` for inputs start..start+count-1 in lexicographic order."""
    p, n = problem.p, problem.n
    wide = p * p * n >= 1 << 62
    dtype = object if wide else np.int64
    index = np.arange(start, start + count, dtype=np.int64).astype(dtype)
    inputs = np.empty((count, n), dtype=dtype)
    for i in range(n - 1, -1, -1):
        inputs[:, i] = index % p
        index = index // p
    columns = np.array([[problem.matrix[i][j] for j in queries] for i in range(n)], dtype=dtype)
    return (inputs @ columns) % p


def _distinct_rows(problem: LinearProblem, queries: Sequence[int], limit: int, stop_above: int | None) -> int:
    seen: set[tuple[int, ...]] = set()
    start = 0
    while start < limit:
        count = min(ENUMERATION_CHUNK, limit - start)
        seen.update(map(tuple, _answers(problem, queries, start, count).tolist()))
        start += count
        if stop_above is not None and len(seen) > stop_above:
            break
    return len(seen)


def _check_queries(problem: LinearProblem, queries: Sequence[int]) -> None:
    bad = [q for q in queries if not 0 <= q < problem.m]
    if bad:
        raise PreconditionError(f"query {bad[0]} is outside [0, {problem.m})")


def distinct_answers(
    problem: LinearProblem, queries: Sequence[int], budget: int | None = None
) -> int:
    """Number of distinct answer tuples of `queries` over every input in GF(p)^n."""
    _check_queries(problem, queries)
    budget = config.RANK_BUDGET if budget is None else budget
    total = problem.p**problem.n
    if total > budget:
        raise BudgetExceededError(f"{problem.p}^{problem.n} inputs exceed the budget of {budget}")
    return _distinct_rows(problem, queries, total, None)


def decoder_exists(
    problem: LinearProblem,
    queries: Sequence[int],
    cell_count: int,
    budget: int | None = None,
) -> bool:
    """
    Whether `cell_count` cells over GF(p) can hold enough information to
    answer all `queries`: the queries must take at most p^cell_count distinct
    answer tuples. Enumeration stops as soon as that number is exceeded.
    """
    _check_queries(problem, queries)
    budget = config.RANK_BUDGET if budget is None else budget
    capacity = problem.p**cell_count
    total = problem.p**problem.n
    if min(capacity + 1, total) > budget:
        raise BudgetExceededError(
            f"deciding against {problem.p}^{cell_count} cell contents exceeds the budget of {budget}"
        )
    distinct = _distinct_rows(problem, queries, min(total, budget), capacity)
    if distinct > capacity:
        return False
    if total > budget:
        raise BudgetExceededError(
            f"{distinct} distinct answers after {budget} inputs; the rest of {problem.p}^{problem.n} is unchecked"
        )
    return True


# ---------------------------------------------------------------------------
# Thresholds
# ---------------------------------------------------------------------------


def witness_threshold(s: int, m: int, t: int, k: int) -> ThresholdCheck:
    """Whether a dense witness is guaranteed for (s, m, t, k), with each inequality evaluated."""
    if s < 2 or t < 2 or k < 1:
        return ThresholdCheck(
            holds=False, trace=(f"need s >= 2, t >= 2, k >= 1; got s={s}, t={t}, k={k}",)
        )
    lg = log2_float(s)
    trace: list[str] = []

    if t == 2:
        above_guard = log2_cmp(s, Fraction(k, 8)) < 0
        trace.append(f"k > 8*log2(s): {k} > {8 * lg:.6g} -> {str(above_guard).lower()}")
        proof_eps = min(16 * lg / k, 1.0)
        if log2_cmp(s, Fraction(k, 16)) >= 0:
            dense = m >= 2 * s
            trace.append(f"eps = 1; m >= 2s: {m} >= {2 * s} -> {str(dense).lower()}")
        else:
            dense = m >= s and log2_cmp(s, Fraction(k * (m - s), 16 * s)) <= 0
            trace.append(
                f"eps = 16*log2(s)/k = {proof_eps:.6g}; m >= s(1+eps): "
                f"{m} >= {s * (1 + proof_eps):.6g} -> {str(dense).lower()}"
            )
        holds = above_guard and dense
        epsilon = min(Fraction(m - s, s), Fraction(1)) if holds else None
        if epsilon is not None:
            trace.append(f"search eps = {epsilon}")
        return ThresholdCheck(holds=holds, trace=tuple(trace), epsilon=epsilon)

    small_log = log2_cmp(s, Fraction(k, 2 ** (t + 2))) <= 0
    trace.append(
        f"2^(t+2)*log2(s) <= k: {2 ** (t + 2) * lg:.6g} <= {k} -> {str(small_log).lower()}"
    )
    k_fits = k <= s
    trace.append(f"k <= s: {k} <= {s} -> {str(k_fits).lower()}")
    dense = hyper_density_holds(s, t, k, m)
    trace.append(
        f"m >= 3s(2^(t+3)*s*log2(s)/k)^(t-2): {m} >= {hyper_density_rhs(s, t, k):.6g} "
        f"-> {str(dense).lower()}"
    )
    return ThresholdCheck(holds=small_log and k_fits and dense, trace=tuple(trace))


def space_lower_bound(m: int, t: int, k: int, s: int) -> float:
    """
    Cells a layout needs to escape the witness, evaluated with log2 of `s`:
    t=2: m - 16*m*log2(s)/k; t>=3: (m/3)^(1/(t-1)) * (k/(2^(t+3)*log2 s))^((t-2)/(t-1)).
    """
    if s < 2 or k < 1 or t < 2:
        raise PreconditionError(f"need s >= 2, k >= 1, t >= 2; got s={s}, k={k}, t={t}")
    lg = log2_float(s)
    if t == 2:
        return m - 16 * m * lg / k
    return (m / 3) ** (1 / (t - 1)) * (k / (2 ** (t + 3) * lg)) ** ((t - 2) / (t - 1))


# ---------------------------------------------------------------------------
# Layouts
# ---------------------------------------------------------------------------


def layout_graph(layout: ProbeLayout) -> Multigraph | THypergraph:
    """Cells as vertices, queries as edges; single-cell probes become self-loops at arity two."""
    if layout.t <= 2:
        return Multigraph(s=layout.s, edges=tuple((c[0], c[-1]) for c in layout.probes))
    return THypergraph(s=layout.s, t=layout.t, edges=layout.probes)


def random_layout(s: int, m: int, t: int, seed: int) -> ProbeLayout:
    """Each query probes t distinct cells drawn uniformly."""
    if t == 1:
        rng = np.random.Generator(np.random.PCG64(seed))
        probes = tuple((int(c),) for c in rng.integers(0, s, size=m))
    else:
        probes = sample_uniform_hypergraph(s, m, t, seed).edges
    return ProbeLayout(s=s, m=m, t=t, probes=probes)


def _check_violation(layout: ProbeLayout, witness: DenseWitness) -> None:
    cells = set(witness.vertices)
    for q in witness.spanned:
        if not set(layout.probes[q]) <= cells:
            raise InternalInvariantError(f"query {q} reads cells outside the witness")
    if len(witness.spanned) < len(cells) + 1:
        raise InternalInvariantError(
            f"{len(witness.spanned)} queries on {len(cells)} cells is not a violation"
        )


def audit_layout(layout: ProbeLayout, k: int) -> AuditReport:
    arity = max(layout.t, 2)
    base = {"s": layout.s, "m": layout.m, "t": layout.t, "k": k}

    if layout.s < 2 or layout.s < arity or k < 1:
        return AuditReport(
            verdict=AuditVerdict.PRECONDITIONS_UNMET,
            inequality_trace=(f"need s >= max(2, t) and k >= 1; got s={layout.s}, k={k}",),
            **base,
        )

    check = witness_threshold(layout.s, layout.m, arity, k)
    trace = [
        *check.trace,
        f"space lower bound at this s: {space_lower_bound(layout.m, arity, k, layout.s):.6g}",
    ]
    graph = layout_graph(layout)

    witness: DenseWitness | None
    if isinstance(graph, Multigraph):
        if check.holds:
            witness = find_dense_set(graph, check.epsilon)
        else:
            witness = find_any_dense_set(graph)
    else:
        mode = SearchMode.STRICT if check.holds else SearchMode.BEST_EFFORT
        found = find_hyper_dense(graph, k, mode)
        witness = found if isinstance(found, DenseWitness) else None
    trace.append(f"search: {'guaranteed' if check.holds else 'best effort'}")

    if witness is None:
        logger.info(f"Audit s={layout.s} m={layout.m} t={layout.t}: no witness found")
        return AuditReport(
            verdict=AuditVerdict.NO_WITNESS_FOUND, inequality_trace=tuple(trace), **base
        )

    _check_violation(layout, witness)
    logger.info(
        f"Audit s={layout.s} m={layout.m} t={layout.t}: {len(witness.spanned)} queries "
        f"read only {witness.size} cells"
    )
    return AuditReport(
        verdict=AuditVerdict.VIOLATION,
        witness_cells=witness.vertices,
        witness_queries=witness.spanned,
        inequality_trace=tuple(trace),
        **base,
    )


# ---------------------------------------------------------------------------
# Text formats
# ---------------------------------------------------------------------------


def parse_layout(text: bytes | str) -> ProbeLayout:
    """Header "layout <s> <m> <t>", then m lines "q c1 [c2 ...]"."""
    records = text_records(text)
    if not records:
        raise GraphFormatError("empty input: missing 'layout' header")
    line, header = records[0]
    if header[0] != "layout" or len(header) != 4:
        raise GraphFormatError(f"line {line}: expected 'layout <s> <m> <t>'")
    s, m, t = decimal_ints(header[1:], line)
    body = records[1:]
    if len(body) != m:
        raise GraphFormatError(f"header announces {m} queries, found {len(body)}")
    probes: list[tuple[int, ...]] = []
    for line, tokens in body:
        if tokens[0] != "q" or len(tokens) < 2:
            raise GraphFormatError(f"line {line}: expected 'q c1 [c2 ...]'")
        probes.append(tuple(decimal_ints(tokens[1:], line)))
    try:
        return ProbeLayout(s=s, m=m, t=t, probes=tuple(probes))
    except ValidationError as e:
        raise GraphFormatError(str(e)) from e


def serialize_layout(layout: ProbeLayout) -> str:
    lines = [f"layout {layout.s} {layout.m} {layout.t}"]
    lines.extend("q " + " ".join(map(str, cells)) for cells in layout.probes)
    return "\n".join(lines) + "\n"


def parse_problem(text: bytes | str) -> LinearProblem:
    """Header "problem <p> <n> <m>", then n rows of m field elements."""
    records = text_records(text)
    if not records:
        raise GraphFormatError("empty input: missing 'problem' header")
    line, header = records[0]
    if header[0] != "problem" or len(header) != 4:
        raise GraphFormatError(f"line {line}: expected 'problem <p> <n> <m>'")
    p, n, m = decimal_ints(header[1:], line)
    rows = [tuple(decimal_ints(tokens, line)) for line, tokens in records[1:]]
    if len(rows) != n:
        raise GraphFormatError(f"header announces {n} rows, found {len(rows)}")
    try:
        return LinearProblem(p=p, n=n, m=m, matrix=tuple(rows))
    except ValidationError as e:
        raise GraphFormatError(str(e)) from e


def serialize_problem(problem: LinearProblem) -> str:
    lines = [f"problem {problem.p} {problem.n} {problem.m}"]
    lines.extend(" ".join(map(str, row)) for row in problem.matrix)
    return "\n".join(lines) + "\n"


def _joined(values: Iterable[int]) -> str:
    return " ".join(map(str, values))


def format_audit_report(report: AuditReport) -> str:
    lines = [
        f"verdict = {report.verdict}",
        f"s = {report.s}",
        f"m = {report.m}",
        f"t = {report.t}",
        f"k = {report.k}",
        f"witness_cells = {_joined(report.witness_cells)}",
        f"witness_queries = {_joined(report.witness_queries)}",
    ]
    lines.extend(f"trace = {entry}" for entry in report.inequality_trace)
    return "\n".join(lines) + "\n"
