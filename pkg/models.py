"""
Data models for span-witness
Graphs, dense witnesses, proof artifacts, cell-probe records and service bodies
"""

from __future__ import annotations

from datetime import datetime, timezone
from enum import StrEnum
from fractions import Fraction
from typing import Annotated, ClassVar, Literal

from pydantic import (
    BaseModel,
    ConfigDict,
    Field,
    PlainSerializer,
    PlainValidator,
    WithJsonSchema,
    field_validator,
    model_validator,
)
from sympy import isprime

type JsonValue = (
    None | bool | int | float | str | list["JsonValue"] | dict[str, "JsonValue"]
)


# ---------------------------------------------------------------------------
# Errors
# ---------------------------------------------------------------------------


class GraphFormatError(ValueError):
    """Malformed graph, witness, layout or problem text."""


class PreconditionError(ValueError):
    """An operation was called outside its documented preconditions."""


class WitnessMismatchError(ValueError):
    """A witness or contraction log does not fit the graph it is applied to."""


class BudgetExceededError(RuntimeError):
    """Exhaustive enumeration would exceed the configured budget."""


class InternalInvariantError(RuntimeError):
    """A property guaranteed by construction failed at runtime."""


# ---------------------------------------------------------------------------
# Rationals
# ---------------------------------------------------------------------------


def parse_rational(value: object) -> Fraction:
    """Accept "a/b", decimals, ints and Fractions; floats go through their repr."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise ValueError(f"Invalid rational: {value!r}")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        return Fraction(repr(value))
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError) as e:
            raise ValueError(f"Invalid rational: {value!r}") from e
    raise ValueError(f"Invalid rational: {value!r}")


Rational = Annotated[
    Fraction,
    PlainValidator(parse_rational, json_schema_input_type=str | int | float),
    PlainSerializer(lambda q: str(q), return_type=str),
    WithJsonSchema({"type": "string", "examples": ["1/5", "2"]}),
]


# ---------------------------------------------------------------------------
# Graphs
# ---------------------------------------------------------------------------


class Multigraph(BaseModel):
    """
    Undirected multigraph on vertices 0..s-1.
    Parallel edges and (parallel) self-loops are distinct entries of `edges`;
    edge indices are positions in that tuple and never change.
    """

    model_config: ClassVar[ConfigDict] = ConfigDict(frozen=True)

    s: int = Field(..., ge=0)
    edges: tuple[tuple[int, int], ...] = ()

    @field_validator("edges")
    @classmethod
    def normalize_edges(
        cls, v: tuple[tuple[int, int], ...]
    ) -> tuple[tuple[int, int], ...]:
        return tuple((a, b) if a <= b else (b, a) for a, b in v)

    @model_validator(mode="after")
    def check_endpoints(self) -> Multigraph:
        for index, (u, v) in enumerate(self.edges):
            if u < 0 or v >= self.s:
                raise ValueError(
                    f"edge {index} ({u}, {v}) has an endpoint outside [0, {self.s})"
                )
        return self

    @property
    def m(self) -> int:
        return len(self.edges)


class THypergraph(BaseModel):
    """Hypergraph whose edges are sets of 1..t distinct vertices; parallel edges allowed."""

    model_config: ClassVar[ConfigDict] = ConfigDict(frozen=True)

    s: int = Field(..., ge=0)
    t: int = Field(..., ge=2)
    edges: tuple[tuple[int, ...], ...] = ()

    @field_validator("edges")
    @classmethod
    def normalize_edges(
        cls, v: tuple[tuple[int, ...], ...]
    ) -> tuple[tuple[int, ...], ...]:
        normalized: list[tuple[int, ...]] = []
        for index, edge in enumerate(v):
            if not edge:
                raise ValueError(f"hyperedge {index} is empty")
            if len(set(edge)) != len(edge):
                raise ValueError(f"hyperedge {index} has a duplicate vertex: {edge}")
            normalized.append(tuple(sorted(edge)))
        return tuple(normalized)

    @model_validator(mode="after")
    def check_edges(self) -> THypergraph:
        for index, edge in enumerate(self.edges):
            if len(edge) > self.t:
                raise ValueError(
                    f"hyperedge {index} has {len(edge)} vertices, more than t={self.t}"
                )
            if edge[0] < 0 or edge[-1] >= self.s:
                raise ValueError(
                    f"hyperedge {index} {edge} has a vertex outside [0, {self.s})"
                )
        return self

    @property
    def m(self) -> int:
        return len(self.edges)

    @property
    def is_uniform(self) -> bool:
        return all(len(edge) == self.t for edge in self.edges)


class DenseWitness(BaseModel):
    """
    A vertex set S, the edge indices it claims to span, and the claimed gap.
    The claim is not checked here; `oracle.verify_witness` decides it.
    """

    model_config: ClassVar[ConfigDict] = ConfigDict(frozen=True)

    vertices: tuple[int, ...]
    spanned: tuple[int, ...]
    gap: Rational

    @field_validator("vertices", "spanned")
    @classmethod
    def sorted_unique(cls, v: tuple[int, ...]) -> tuple[int, ...]:
        return tuple(sorted(set(v)))

    @property
    def size(self) -> int:
        return len(self.vertices)

    @property
    def surplus(self) -> int:
        """|spanned| - |vertices| as listed."""
        return len(self.spanned) - len(self.vertices)


class NoWitness(BaseModel):
    """Best-effort searches return this instead of raising."""

    model_config: ClassVar[ConfigDict] = ConfigDict(frozen=True)

    reason: str


class Verdict(BaseModel):
    model_config: ClassVar[ConfigDict] = ConfigDict(frozen=True)

    valid: bool
    reason: str | None = None


class VertexMap(BaseModel):
    """Result bookkeeping of `graph_core.contract`."""

    model_config: ClassVar[ConfigDict] = ConfigDict(frozen=True)

    forward: tuple[int, ...] = Field(
        ..., description="original vertex id -> contracted vertex id"
    )
    merged: int = Field(..., description="id of the vertex the set collapsed into")
    edge_origin: tuple[int, ...] = Field(
        ..., description="contracted edge index -> original edge index"
    )

    def preimage(self, vertex: int) -> tuple[int, ...]:
        return tuple(v for v, image in enumerate(self.forward) if image == vertex)


# ---------------------------------------------------------------------------
# Tadpoles and reduction logs
# ---------------------------------------------------------------------------


class Tadpole(BaseModel):
    """
    A path p_1..p_k joined to a cycle c_1..c_l at p_k = c_1.
    path_edges[i] joins path[i] and path[i+1]; cycle_edges[i] joins cycle[i]
    and cycle[(i+1) % l], so a 1-cycle is a self-loop and a 2-cycle is a pair
    of parallel edges.
    """

    model_config: ClassVar[ConfigDict] = ConfigDict(frozen=True)

    path: tuple[int, ...] = Field(..., min_length=1)
    path_edges: tuple[int, ...] = ()
    cycle: tuple[int, ...] = Field(..., min_length=1)
    cycle_edges: tuple[int, ...] = Field(..., min_length=1)

    @model_validator(mode="after")
    def check_shape(self) -> Tadpole:
        if self.path[-1] != self.cycle[0]:
            raise ValueError(
                f"path ends at {self.path[-1]} but cycle starts at {self.cycle[0]}"
            )
        if len(self.path_edges) != len(self.path) - 1:
            raise ValueError("path needs exactly one edge between consecutive vertices")
        if len(self.cycle_edges) != len(self.cycle):
            raise ValueError("cycle needs exactly one edge per vertex")
        return self

    @property
    def k(self) -> int:
        return len(self.path)

    @property
    def ell(self) -> int:
        return len(self.cycle)

    @property
    def vertices(self) -> frozenset[int]:
        return frozenset(self.path) | frozenset(self.cycle)


class RemoveIsolated(BaseModel):
    model_config: ClassVar[ConfigDict] = ConfigDict(frozen=True)

    kind: Literal["remove-isolated"] = "remove-isolated"
    vertex: int


class RemoveDegreeOne(BaseModel):
    model_config: ClassVar[ConfigDict] = ConfigDict(frozen=True)

    kind: Literal["remove-degree-one"] = "remove-degree-one"
    vertex: int
    edge: int


class RemoveLoopOnly(BaseModel):
    model_config: ClassVar[ConfigDict] = ConfigDict(frozen=True)

    kind: Literal["remove-loop-only"] = "remove-loop-only"
    vertex: int
    loop: int


class RemoveLongPath(BaseModel):
    """Internal degree-two vertices of a long path, or a whole degree-two cycle."""

    model_config: ClassVar[ConfigDict] = ConfigDict(frozen=True)

    kind: Literal["remove-long-path"] = "remove-long-path"
    internal: tuple[int, ...] = Field(..., min_length=1)
    edges: tuple[int, ...] = Field(..., min_length=1)


class ContractPath(BaseModel):
    """A short degree-two path replaced by the single edge `new_edge`."""

    model_config: ClassVar[ConfigDict] = ConfigDict(frozen=True)

    kind: Literal["contract-path"] = "contract-path"
    new_edge: int
    endpoints: tuple[int, int]
    internal: tuple[int, ...] = Field(..., min_length=1)
    edges: tuple[int, ...]

    @model_validator(mode="after")
    def check_lengths(self) -> ContractPath:
        if len(self.edges) != len(self.internal) + 1:
            raise ValueError(
                f"a path through {len(self.internal)} vertices has "
                f"{len(self.internal) + 1} edges, got {len(self.edges)}"
            )
        return self


ReductionStep = Annotated[
    RemoveIsolated | RemoveDegreeOne | RemoveLoopOnly | RemoveLongPath | ContractPath,
    Field(discriminator="kind"),
]


class ContractionLog(BaseModel):
    """
    Replayable record of the rewrites turning `source` into `reduced`.
    Working edge ids below source.m are original edges; larger ids are the
    `new_edge` of a ContractPath step.
    """

    model_config: ClassVar[ConfigDict] = ConfigDict(frozen=True)

    epsilon: Rational
    source: Multigraph
    steps: tuple[ReductionStep, ...] = ()
    vertex_map: tuple[int, ...] = Field(
        ..., description="reduced vertex id -> original vertex id"
    )
    edge_map: tuple[int, ...] = Field(
        ..., description="reduced edge index -> working edge id"
    )
    reduced: Multigraph

    @model_validator(mode="after")
    def check_maps(self) -> ContractionLog:
        if len(self.vertex_map) != self.reduced.s:
            raise ValueError("vertex_map must cover every reduced vertex")
        if len(self.edge_map) != self.reduced.m:
            raise ValueError("edge_map must cover every reduced edge")
        return self

    def contracted_paths(self) -> dict[int, ContractPath]:
        return {
            step.new_edge: step for step in self.steps if isinstance(step, ContractPath)
        }


# ---------------------------------------------------------------------------
# Hypergraph peeling
# ---------------------------------------------------------------------------


class SearchMode(StrEnum):
    STRICT = "strict"
    BEST_EFFORT = "best_effort"


class HeavySet(BaseModel):
    """Vertices L with the edges touching them; |touched| >= |L|*m/s."""

    model_config: ClassVar[ConfigDict] = ConfigDict(frozen=True)

    vertices: tuple[int, ...] = Field(..., min_length=1)
    touched: tuple[int, ...]
    source_s: int = Field(..., ge=1)
    source_m: int = Field(..., ge=0)

    @model_validator(mode="after")
    def check_weight(self) -> HeavySet:
        if len(self.touched) * self.source_s < len(self.vertices) * self.source_m:
            raise ValueError(
                f"{len(self.touched)} touched edges is below "
                f"l*m/s = {len(self.vertices)}*{self.source_m}/{self.source_s}"
            )
        return self

    @property
    def ell(self) -> int:
        return len(self.vertices)


class PeelMap(BaseModel):
    """peeled edge index -> (original edge index, removed vertex v_e)."""

    model_config: ClassVar[ConfigDict] = ConfigDict(frozen=True)

    entries: tuple[tuple[int, int], ...]

    def origin(self, peeled_index: int) -> int:
        return self.entries[peeled_index][0]

    def removed_vertex(self, peeled_index: int) -> int:
        return self.entries[peeled_index][1]


# ---------------------------------------------------------------------------
# Tightness experiments
# ---------------------------------------------------------------------------


class TrialReport(BaseModel):
    """Outcome of a Monte-Carlo run on random t-uniform hypergraphs."""

    model_config: ClassVar[ConfigDict] = ConfigDict(frozen=True)

    s: int = Field(..., ge=1)
    m: int = Field(..., ge=0)
    t: int = Field(..., ge=2)
    k: int = Field(..., ge=1)
    trials: int = Field(..., ge=0)
    seed: int = Field(..., ge=0)
    rng: str = "numpy.PCG64"
    threshold_s: float
    condition_satisfied: bool
    analytic_bound: float
    exact_union_bound: float
    e_minus_k: float
    failures: int = Field(..., ge=0)
    fraction: float = Field(..., ge=0.0, le=1.0)

    @model_validator(mode="after")
    def check_counts(self) -> TrialReport:
        if self.failures > self.trials:
            raise ValueError("failures cannot exceed trials")
        return self


# ---------------------------------------------------------------------------
# Cell-probe model
# ---------------------------------------------------------------------------


# Residues fit in a signed 64-bit word.
MAX_FIELD_PRIME = 2**61 - 1


def check_field_prime(p: int) -> None:
    """Raise PreconditionError unless p is a prime no larger than MAX_FIELD_PRIME."""
    if p > MAX_FIELD_PRIME:
        raise PreconditionError(f"p={p} exceeds the largest supported prime 2^61-1")
    if not isprime(p):
        raise PreconditionError(f"p={p} is not prime")


class FieldElement(BaseModel):
    """Element of the prime field GF(p)."""

    model_config: ClassVar[ConfigDict] = ConfigDict(frozen=True)

    value: int
    p: int = Field(..., ge=2, le=MAX_FIELD_PRIME)

    @model_validator(mode="after")
    def check_field(self) -> FieldElement:
        if not isprime(self.p):
            raise ValueError(f"modulus {self.p} is not prime")
        if not 0 <= self.value < self.p:
            raise ValueError(f"value {self.value} is not reduced mod {self.p}")
        return self

    @classmethod
    def of(cls, value: int, p: int) -> FieldElement:
        if p > MAX_FIELD_PRIME:
            raise PreconditionError(f"p={p} exceeds the largest supported prime 2^61-1")
        return cls(value=value % p, p=p)

    def _coerce(self, other: FieldElement | int) -> int:
        if isinstance(other, FieldElement):
            if other.p != self.p:
                raise ValueError(f"cannot mix GF({self.p}) and GF({other.p})")
            return other.value
        return other % self.p

    def __add__(self, other: FieldElement | int) -> FieldElement:
        return FieldElement.of(self.value + self._coerce(other), self.p)

    __radd__ = __add__

    def __sub__(self, other: FieldElement | int) -> FieldElement:
        return FieldElement.of(self.value - self._coerce(other), self.p)

    def __mul__(self, other: FieldElement | int) -> FieldElement:
        return FieldElement.of(self.value * self._coerce(other), self.p)

    __rmul__ = __mul__

    def __neg__(self) -> FieldElement:
        return FieldElement.of(-self.value, self.p)

    def __pow__(self, exponent: int) -> FieldElement:
        return FieldElement(value=pow(self.value, exponent, self.p), p=self.p)

    def inverse(self) -> FieldElement:
        if self.value == 0:
            raise ZeroDivisionError(f"0 has no inverse in GF({self.p})")
        return FieldElement(value=pow(self.value, -1, self.p), p=self.p)


class LinearProblem(BaseModel):
    """Query j answers column_j . x over GF(p) for an input x in GF(p)^n."""

    model_config: ClassVar[ConfigDict] = ConfigDict(frozen=True)

    p: int = Field(..., ge=2, le=MAX_FIELD_PRIME)
    n: int = Field(..., ge=1)
    m: int = Field(..., ge=1)
    matrix: tuple[tuple[int, ...], ...] = Field(..., description="n rows of m entries")

    @model_validator(mode="after")
    def check_matrix(self) -> LinearProblem:
        if not isprime(self.p):
            raise ValueError(f"p={self.p} is not prime")
        if len(self.matrix) != self.n:
            raise ValueError(f"expected {self.n} rows, got {len(self.matrix)}")
        for i, row in enumerate(self.matrix):
            if len(row) != self.m:
                raise ValueError(f"row {i} has {len(row)} entries, expected {self.m}")
            if any(not 0 <= x < self.p for x in row):
                raise ValueError(f"row {i} has an entry outside [0, {self.p})")
        return self

    def column(self, j: int) -> tuple[int, ...]:
        return tuple(row[j] for row in self.matrix)

    def entry(self, i: int, j: int) -> FieldElement:
        return FieldElement(value=self.matrix[i][j], p=self.p)

    def answer(self, j: int, x: tuple[int, ...]) -> FieldElement:
        if len(x) != self.n:
            raise ValueError(f"input has {len(x)} coordinates, expected {self.n}")
        total = FieldElement(value=0, p=self.p)
        for i, xi in enumerate(x):
            total = total + self.entry(i, j) * xi
        return total


class ProbeLayout(BaseModel):
    """Non-adaptive layout: query q always reads the cells probes[q]."""

    model_config: ClassVar[ConfigDict] = ConfigDict(frozen=True)

    s: int = Field(..., ge=1)
    m: int = Field(..., ge=0)
    t: int = Field(..., ge=1)
    probes: tuple[tuple[int, ...], ...]

    @field_validator("probes")
    @classmethod
    def as_sets(cls, v: tuple[tuple[int, ...], ...]) -> tuple[tuple[int, ...], ...]:
        return tuple(tuple(sorted(set(cells))) for cells in v)

    @model_validator(mode="after")
    def check_probes(self) -> ProbeLayout:
        if len(self.probes) != self.m:
            raise ValueError(f"expected {self.m} probe sets, got {len(self.probes)}")
        for q, cells in enumerate(self.probes):
            if not cells:
                raise ValueError(f"query {q} probes no cell")
            if len(cells) > self.t:
                raise ValueError(f"query {q} probes {len(cells)} cells, more than t={self.t}")
            if cells[0] < 0 or cells[-1] >= self.s:
                raise ValueError(f"query {q} probes a cell outside [0, {self.s})")
        return self


class ThresholdCheck(BaseModel):
    """Whether a dense witness is guaranteed for (s, m, t, k), with the evaluated inequalities."""

    model_config: ClassVar[ConfigDict] = ConfigDict(frozen=True)

    holds: bool
    trace: tuple[str, ...]
    epsilon: Rational | None = None


class AuditVerdict(StrEnum):
    VIOLATION = "violation"
    NO_WITNESS_FOUND = "no_witness_found"
    PRECONDITIONS_UNMET = "preconditions_unmet"


class AuditReport(BaseModel):
    """
    On a violation, the witness queries read only witness cells and outnumber
    them, so no layout with these probes can serve a k-wise independent problem.
    """

    model_config: ClassVar[ConfigDict] = ConfigDict(frozen=True)

    verdict: AuditVerdict
    s: int
    m: int
    t: int
    k: int
    witness_cells: tuple[int, ...] = ()
    witness_queries: tuple[int, ...] = ()
    inequality_trace: tuple[str, ...] = ()

    @model_validator(mode="after")
    def check_violation(self) -> AuditReport:
        if self.verdict is AuditVerdict.VIOLATION and len(self.witness_queries) <= len(
            self.witness_cells
        ):
            raise ValueError("a violation needs more witness queries than cells")
        return self


# ---------------------------------------------------------------------------
# Service bodies
# ---------------------------------------------------------------------------


class TightnessJob(BaseModel):
    kind: Literal["tightness"] = "tightness"
    s: int = Field(..., ge=1)
    m: int = Field(..., ge=0)
    t: int = Field(..., ge=2)
    k: int = Field(..., ge=1)
    trials: int = Field(..., ge=1, le=100_000)
    seed: int = Field(0, ge=0)

    model_config: ClassVar[ConfigDict] = ConfigDict(
        frozen=True,
        json_schema_extra={
            "example": {"kind": "tightness", "s": 161, "m": 16, "t": 3, "k": 4, "trials": 100, "seed": 7}
        },
    )


class AuditJob(BaseModel):
    model_config: ClassVar[ConfigDict] = ConfigDict(frozen=True)

    kind: Literal["audit"] = "audit"
    layout: ProbeLayout
    k: int = Field(..., ge=1)


Job = Annotated[TightnessJob | AuditJob, Field(discriminator="kind")]


class JobBatch(BaseModel):
    """Support batch submit (single or multiple jobs)"""

    jobs: list[Job] = Field(..., min_length=1, max_length=1000)


class JobResponse(BaseModel):
    accepted: int
    message: str = "Jobs queued for processing"


class StoredReport(BaseModel):
    """A computed report as kept by the report store."""

    kind: Literal["tightness", "audit"]
    fingerprint: str
    report: dict[str, JsonValue]
    created_at: str = Field(
        default_factory=lambda: datetime.now(timezone.utc).isoformat()
    )


class ReportQueryResponse(BaseModel):
    kind: str | None = None
    total: int
    reports: list[StoredReport]


class SystemStats(BaseModel):
    """Counters for GET /stats"""

    uptime_seconds: float
    received: int = Field(..., description="Total jobs received")
    computed: int = Field(..., description="Distinct jobs computed")
    duplicate_dropped: int = Field(..., description="Jobs answered by an earlier identical job")
    kinds: list[str] = Field(..., description="Report kinds stored")

    @property
    def duplicate_rate(self) -> float:
        if self.received == 0:
            return 0.0
        return (self.duplicate_dropped / self.received) * 100


class FindDenseRequest(BaseModel):
    graph: str = Field(..., description="graph in the 'g s m' text format")
    epsilon: Rational


class VerifyRequest(BaseModel):
    graph: str
    witness: str = Field(..., description="'S:' / 'edges:' / 'gap:' record")
