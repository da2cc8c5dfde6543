"""
span-witness command line
Exit status: 0 on success, 1 when nothing was found or a check failed,
2 on malformed input, unmet preconditions or an exhausted budget, and
3 when an internal invariant breaks.
"""

import asyncio
import logging
import sys
from collections.abc import Iterator, Sequence
from contextlib import contextmanager
from fractions import Fraction
from pathlib import Path
from typing import Annotated

import click
import typer
from pydantic import ValidationError

import config
from bounds import ceil_ratio
from cellprobe import (
    audit_layout,
    format_audit_report,
    kwise_rank_check,
    parse_layout,
    parse_problem,
    random_layout,
    serialize_layout,
    serialize_problem,
    vandermonde_problem,
)
from dense_core import find_dense_set, reduce_to_min_degree_three
from gap_finder import find_gap_set
from graph_core import (
    format_witness,
    parse_graph_file,
    parse_witness,
    spanned_edges,
    to_hypergraph,
    to_multigraph,
)
from hyper_finder import find_hyper_dense
from jobs import fingerprint
from models import (
    AuditJob,
    AuditVerdict,
    BudgetExceededError,
    DenseWitness,
    GraphFormatError,
    InternalInvariantError,
    Multigraph,
    PreconditionError,
    SearchMode,
    StoredReport,
    THypergraph,
    TightnessJob,
    WitnessMismatchError,
    parse_rational,
)
from oracle import brute_force_best_gap, verify_witness
from report_store import ReportStore
from tadpole import find_tadpole
from tightness_lab import (
    format_trial_report,
    run_tightness_experiment,
    sweep_k,
    trial_reports_csv,
)

logger = logging.getLogger(__name__)

app = typer.Typer(
    name="span-witness",
    help="Small dense subgraphs, tightness experiments and probe-layout audits.",
    no_args_is_help=True,
    add_completion=False,
)

InputFile = Annotated[
    Path, typer.Argument(exists=True, dir_okay=False, readable=True, show_default=False)
]

EXIT_NOT_FOUND = 1
EXIT_BAD_INPUT = 2
EXIT_INTERNAL = 3


@app.callback()
def main(
    log_level: Annotated[
        str, typer.Option("--log-level", help="Logging level; logs go to stderr")
    ] = config.LOG_LEVEL,
) -> None:
    logging.basicConfig(
        level=log_level.upper(), format=config.LOG_FORMAT, stream=sys.stderr, force=True
    )


@contextmanager
def _bad_input() -> Iterator[None]:
    """Report input and precondition failures with status 2 and broken invariants with status 3."""
    try:
        yield
    except (
        GraphFormatError,
        PreconditionError,
        BudgetExceededError,
        WitnessMismatchError,
        ValidationError,
    ) as e:
        logger.debug(f"{type(e).__name__}: {e}")
        typer.echo(f"error: {e}", err=True)
        raise typer.Exit(EXIT_BAD_INPUT)
    except InternalInvariantError as e:
        logger.error(f"Internal invariant failed: {e}")
        typer.echo(f"internal error: {e}", err=True)
        raise typer.Exit(EXIT_INTERNAL)


def _rational(text: str) -> Fraction:
    try:
        return parse_rational(text)
    except ValueError as e:
        raise typer.BadParameter(str(e))


def _load_multigraph(path: Path) -> Multigraph:
    graph = parse_graph_file(path.read_bytes())
    if isinstance(graph, THypergraph):
        return to_multigraph(graph)
    return graph


def _load_hypergraph(path: Path) -> THypergraph:
    graph = parse_graph_file(path.read_bytes())
    if isinstance(graph, Multigraph):
        return to_hypergraph(graph)
    return graph


def _emit(record: str, out: Path | None = None, append: Path | None = None) -> None:
    if out is not None:
        _ = out.write_text(record)
    else:
        typer.echo(record, nl=False)
    if append is not None:
        with append.open("a") as f:
            _ = f.write(record)


async def _store(db: Path, stored: StoredReport) -> None:
    store = ReportStore(str(db))
    await store.initialize()
    try:
        await store.increment_received()
        if await store.check_and_mark(stored.fingerprint, stored.kind):
            await store.store_report(stored)
        else:
            await store.increment_duplicate_dropped()
    finally:
        await store.close()


# ---------------------------------------------------------------------------
# Multigraph searches
# ---------------------------------------------------------------------------


@app.command("find-dense")
def find_dense(
    file: InputFile,
    epsilon: Annotated[str, typer.Option(help="Density margin, 'a/b' or decimal")],
) -> None:
    """Small S spanning at least |S|+1 edges in a multigraph with m >= s(1+eps)."""
    eps = _rational(epsilon)
    with _bad_input():
        witness = find_dense_set(_load_multigraph(file), eps)
    _emit(format_witness(witness))


@app.command("find-gap")
def find_gap(
    file: InputFile,
    gap: Annotated[int, typer.Option(help="Required surplus g >= 1")],
) -> None:
    """Small S spanning at least |S|+g edges in a multigraph with m >= 2s+g+1."""
    with _bad_input():
        witness = find_gap_set(_load_multigraph(file), gap)
    _emit(format_witness(witness))


@app.command("find-hyper")
def find_hyper(
    file: InputFile,
    k: Annotated[int, typer.Option(help="Size budget for the witness")],
    best_effort: Annotated[
        bool, typer.Option("--best-effort", help="Search even when the density condition fails")
    ] = False,
) -> None:
    mode = SearchMode.BEST_EFFORT if best_effort else SearchMode.STRICT
    with _bad_input():
        found = find_hyper_dense(_load_hypergraph(file), k, mode)
    if not isinstance(found, DenseWitness):
        typer.echo(f"no_witness = {found.reason}")
        raise typer.Exit(EXIT_NOT_FOUND)
    _emit(format_witness(found))


@app.command("find-tadpole")
def tadpole(
    file: InputFile,
    start: Annotated[int, typer.Option(help="Vertex the path starts from")] = 0,
) -> None:
    with _bad_input():
        found = find_tadpole(_load_multigraph(file), start)
    _emit(
        f"path: {' '.join(map(str, found.path))}\n"
        f"path_edges: {' '.join(map(str, found.path_edges))}\n"
        f"cycle: {' '.join(map(str, found.cycle))}\n"
        f"cycle_edges: {' '.join(map(str, found.cycle_edges))}\n"
    )


@app.command("reduce")
def reduce_graph(
    file: InputFile,
    epsilon: Annotated[str, typer.Option(help="Density margin, 'a/b' or decimal")],
) -> None:
    """Print the minimum-degree-three reduction and its replayable log as JSON."""
    eps = _rational(epsilon)
    with _bad_input():
        _, log = reduce_to_min_degree_three(_load_multigraph(file), eps)
    _emit(log.model_dump_json(indent=2) + "\n")


@app.command()
def verify(graph: InputFile, witness: InputFile) -> None:
    """Recount a witness against its graph."""
    with _bad_input():
        verdict = verify_witness(
            parse_graph_file(graph.read_bytes()), parse_witness(witness.read_bytes())
        )
    typer.echo(f"verdict = {'valid' if verdict.valid else 'invalid'}")
    if not verdict.valid:
        typer.echo(f"reason = {verdict.reason}")
        raise typer.Exit(EXIT_NOT_FOUND)


@app.command("oracle")
def best_gap(
    file: InputFile,
    kmax: Annotated[int, typer.Option(help="Largest subset size considered")],
    workers: Annotated[int, typer.Option(min=1)] = 1,
) -> None:
    """Exhaustive best-gap set among subsets of at most kmax vertices."""
    with _bad_input():
        graph = parse_graph_file(file.read_bytes())
        vertices, gap = brute_force_best_gap(graph, kmax, workers=workers)
        spanned = spanned_edges(graph, vertices)
    _emit(format_witness(DenseWitness(vertices=vertices, spanned=spanned, gap=gap)))


# ---------------------------------------------------------------------------
# Tightness experiments
# ---------------------------------------------------------------------------


@app.command()
def tightness(
    s: Annotated[int, typer.Option()],
    m: Annotated[int, typer.Option()],
    t: Annotated[int, typer.Option()],
    k: Annotated[int, typer.Option()],
    trials: Annotated[int, typer.Option()],
    seed: Annotated[int, typer.Option()],
    workers: Annotated[int, typer.Option(min=1)] = 1,
    append: Annotated[Path | None, typer.Option(help="Also append the record here")] = None,
    db: Annotated[Path | None, typer.Option(help="Store the report in this database")] = None,
) -> None:
    """Monte-Carlo failure rate against the union bound."""
    with _bad_input():
        report = run_tightness_experiment(s, m, t, k, trials, seed, workers=workers)
    if db is not None:
        with _bad_input():
            job = TightnessJob(s=s, m=m, t=t, k=k, trials=trials, seed=seed)
        asyncio.run(
            _store(
                db,
                StoredReport(
                    kind=job.kind,
                    fingerprint=fingerprint(job),
                    report=report.model_dump(mode="json"),
                ),
            )
        )
    _emit(format_trial_report(report), append=append)


@app.command("tightness-sweep")
def tightness_sweep(
    s: Annotated[int, typer.Option()],
    m: Annotated[int, typer.Option()],
    t: Annotated[int, typer.Option()],
    ks: Annotated[str, typer.Option(help="Comma-separated k values, e.g. 4,5,6")],
    trials: Annotated[int, typer.Option()],
    seed: Annotated[int, typer.Option()],
    workers: Annotated[int, typer.Option(min=1)] = 1,
) -> None:
    """One CSV row per k."""
    try:
        values = [int(part) for part in ks.split(",") if part.strip()]
    except ValueError as e:
        raise typer.BadParameter(f"--ks: {e}")
    with _bad_input():
        reports = sweep_k(s, m, t, values, trials, seed, workers=workers)
    _emit(trial_reports_csv(reports))


# ---------------------------------------------------------------------------
# Cell-probe layouts
# ---------------------------------------------------------------------------


@app.command("gen-problem")
def gen_problem(
    n: Annotated[int, typer.Option(help="Input length")],
    m: Annotated[int, typer.Option(help="Number of queries")],
    p: Annotated[int, typer.Option(help="Prime field size, > m")],
    out: Annotated[Path | None, typer.Option()] = None,
) -> None:
    """Vandermonde query matrix over GF(p)."""
    with _bad_input():
        problem = vandermonde_problem(n, m, p)
    _emit(serialize_problem(problem), out=out)


@app.command("rank-check")
def rank_check(
    problem: InputFile,
    k: Annotated[int, typer.Option(help="Every k columns must be independent")],
) -> None:
    with _bad_input():
        holds = kwise_rank_check(parse_problem(problem.read_bytes()), k)
    typer.echo(f"kwise = {'true' if holds else 'false'}")
    if not holds:
        raise typer.Exit(EXIT_NOT_FOUND)


@app.command("gen-layout")
def gen_layout(
    s: Annotated[int, typer.Option(help="Number of cells")],
    m: Annotated[int, typer.Option(help="Number of queries")],
    t: Annotated[int, typer.Option(help="Probes per query")],
    seed: Annotated[int, typer.Option(min=0)] = 0,
    out: Annotated[Path | None, typer.Option()] = None,
) -> None:
    """Random non-adaptive layout, each query probing t distinct cells."""
    with _bad_input():
        layout = random_layout(s, m, t, seed)
    _emit(serialize_layout(layout), out=out)


@app.command()
def audit(
    layout: InputFile,
    k: Annotated[int | None, typer.Option(help="Independence level of the problem")] = None,
    n: Annotated[
        int | None, typer.Option(help="Input length; k defaults to ceil(n/log2 n)")
    ] = None,
    append: Annotated[Path | None, typer.Option(help="Also append the record here")] = None,
    db: Annotated[Path | None, typer.Option(help="Store the report in this database")] = None,
) -> None:
    """Look for queries that read fewer cells than their count."""
    if k is None:
        if n is None or n < 2:
            raise typer.BadParameter("give --k, or --n >= 2 to derive it")
        k = ceil_ratio(n, 1, n)
    with _bad_input():
        parsed = parse_layout(layout.read_bytes())
        report = audit_layout(parsed, k)
    if db is not None:
        job = AuditJob(layout=parsed, k=k)
        asyncio.run(
            _store(
                db,
                StoredReport(
                    kind=job.kind,
                    fingerprint=fingerprint(job),
                    report=report.model_dump(mode="json"),
                ),
            )
        )
    _emit(format_audit_report(report), append=append)
    match report.verdict:
        case AuditVerdict.NO_WITNESS_FOUND:
            raise typer.Exit(EXIT_NOT_FOUND)
        case AuditVerdict.PRECONDITIONS_UNMET:
            raise typer.Exit(EXIT_BAD_INPUT)


def run_cli(args: Sequence[str]) -> int:
    """Run one command in-process and return its exit status."""
    command = typer.main.get_command(app)
    try:
        result = command.main(
            args=list(args), prog_name="span-witness", standalone_mode=False
        )
    except click.exceptions.Abort:
        return 1
    except InternalInvariantError as e:
        logger.error(f"Internal invariant failed: {e}")
        return EXIT_INTERNAL
    except click.ClickException as e:
        e.show()
        return e.exit_code
    return result if isinstance(result, int) else 0


if __name__ == "__main__":
    sys.exit(run_cli(sys.argv[1:]))
