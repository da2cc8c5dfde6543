"""
Tests for the command line: outputs and exit statuses
"""

from __future__ import annotations

import asyncio
import csv
import io
from pathlib import Path

import pytest
from typer.testing import CliRunner

import cli
from cli import app, run_cli
from models import ContractionLog, InternalInvariantError, StoredReport
from report_store import ReportStore

runner = CliRunner()

THETA = "g 5 6\ne 0 2\ne 2 1\ne 0 3\ne 3 1\ne 0 4\ne 4 1\n"


@pytest.fixture
def theta_file(tmp_path: Path) -> Path:
    path = tmp_path / "theta.g"
    _ = path.write_text(THETA)
    return path


def _write(tmp_path: Path, name: str, text: str) -> Path:
    path = tmp_path / name
    _ = path.write_text(text)
    return path


async def _stored(db: Path) -> list[StoredReport]:
    store = ReportStore(str(db))
    await store.initialize()
    try:
        return await store.load_reports()
    finally:
        await store.close()


def test_find_dense_prints_witness(theta_file: Path):
    """
    Test 1: find-dense on the theta graph

    Requirement: Witness printed as S / edges / gap lines, exit 0
    Verifies: Whole theta graph with gap 1 at eps = 1/5
    """
    result = runner.invoke(app, ["find-dense", str(theta_file), "--epsilon", "1/5"])

    assert result.exit_code == 0, result.output
    assert result.stdout == "S: 0 1 2 3 4\nedges: 0 1 2 3 4 5\ngap: 1\n"


def test_find_dense_accepts_decimal_epsilon(theta_file: Path):
    result = runner.invoke(app, ["find-dense", str(theta_file), "--epsilon", "0.2"])
    assert result.exit_code == 0


@pytest.mark.parametrize(
    "args",
    [
        ["find-dense", "{theta}", "--epsilon", "1"],
        ["find-dense", "{theta}", "--epsilon", "abc"],
        ["find-dense", "{bad}", "--epsilon", "1/5"],
        ["find-dense", "{theta}", "--epsilon", "1/5", "--bogus"],
        ["find-dense", "{missing}", "--epsilon", "1/5"],
    ],
)
def test_input_errors_exit_two(tmp_path: Path, theta_file: Path, args: list[str]):
    """
    Test 2: Preconditions, malformed input and usage errors

    Requirement: Exit status 2 on precondition or format errors and unknown flags
    Verifies: eps too large for the graph, bad rational, bad file, unknown flag
    """
    bad = _write(tmp_path, "bad.g", "g 2 3\ne 0 1\n")
    paths = {"theta": theta_file, "bad": bad, "missing": tmp_path / "nope.g"}

    result = runner.invoke(app, [a.format(**paths) for a in args])

    assert result.exit_code == 2, result.output


def test_verify_valid_and_invalid(tmp_path: Path, theta_file: Path):
    """
    Test 3: verify prints a verdict

    Requirement: Exit 0 on valid, 1 on invalid with a reason
    Verifies: A witness claiming an unspanned edge is invalid
    """
    good = _write(tmp_path, "good.w", "S: 0 1 2 3 4\nedges: 0 1 2 3 4 5\ngap: 1\n")
    bad = _write(tmp_path, "bad.w", "S: 0 1 2\nedges: 0 1 2\ngap: 0\n")

    ok = runner.invoke(app, ["verify", str(theta_file), str(good)])
    rejected = runner.invoke(app, ["verify", str(theta_file), str(bad)])

    assert ok.exit_code == 0 and ok.stdout == "verdict = valid\n"
    assert rejected.exit_code == 1
    assert rejected.stdout.startswith("verdict = invalid\nreason = edge 2")


def test_find_gap(tmp_path: Path):
    graph = _write(tmp_path, "multi.g", "g 2 7\n" + "e 0 1\n" * 7)

    result = runner.invoke(app, ["find-gap", str(graph), "--gap", "2"])

    assert result.exit_code == 0
    assert result.stdout == "S: 0 1\nedges: 0 1 2 3 4 5 6\ngap: 5\n"


def test_find_hyper_best_effort(tmp_path: Path):
    """
    Test 4: find-hyper in best-effort mode

    Requirement: Exit 0 with a witness, 1 when none turns up
    Verifies: Five triples on four vertices, then a single triple
    """
    dense = _write(tmp_path, "dense.h", "h 4 3 5\ne 0 1 2\ne 0 1 2\ne 0 1 3\ne 0 2 3\ne 1 2 3\n")
    sparse = _write(tmp_path, "sparse.h", "h 4 3 1\ne 0 1 2\n")

    found = runner.invoke(app, ["find-hyper", str(dense), "--k", "4", "--best-effort"])
    missing = runner.invoke(app, ["find-hyper", str(sparse), "--k", "4", "--best-effort"])
    strict = runner.invoke(app, ["find-hyper", str(dense), "--k", "4"])

    assert found.exit_code == 0 and found.stdout.startswith("S: 0 1 2 3\n")
    assert missing.exit_code == 1 and missing.stdout.startswith("no_witness = ")
    assert strict.exit_code == 2, "Strict mode preconditions fail at this size"


def test_oracle(theta_file: Path):
    result = runner.invoke(app, ["oracle", str(theta_file), "--kmax", "4"])

    assert result.exit_code == 0
    assert result.stdout.endswith("gap: 0\n")


def test_find_tadpole_and_reduce(tmp_path: Path, theta_file: Path):
    k4 = _write(tmp_path, "k4.g", "g 4 6\ne 0 1\ne 0 2\ne 0 3\ne 1 2\ne 1 3\ne 2 3\n")

    tadpole = runner.invoke(app, ["find-tadpole", str(k4), "--start", "0"])
    reduced = runner.invoke(app, ["reduce", str(theta_file), "--epsilon", "1/5"])

    assert tadpole.exit_code == 0
    lines = dict(line.split(": ", 1) for line in tadpole.stdout.splitlines())
    assert lines["path"].split()[0] == "0"
    assert len(lines["cycle"].split()) == 3, "K4 closes a triangle"
    assert reduced.exit_code == 0
    log = ContractionLog.model_validate_json(reduced.stdout)
    assert log.reduced.s == 2 and len(log.steps) == 3


def test_tightness_record_append_and_db(tmp_path: Path):
    """
    Test 5: tightness prints a key = value record

    Requirement: Report appended to a file and stored once per parameter set
    Verifies: Record content, append file, deduplicated database entry
    """
    append = tmp_path / "records.txt"
    db = tmp_path / "reports.db"
    args = [
        "tightness", "--s", "161", "--m", "16", "--t", "3", "--k", "4",
        "--trials", "20", "--seed", "7", "--append", str(append), "--db", str(db),
    ]  # fmt: skip

    first = runner.invoke(app, args)
    second = runner.invoke(app, args)

    assert first.exit_code == 0, first.output
    assert "condition_satisfied = true\n" in first.stdout
    assert first.stdout == second.stdout, "Same seed, same record"
    assert append.read_text() == first.stdout * 2
    stored = asyncio.run(_stored(db))
    assert len(stored) == 1 and stored[0].kind == "tightness"
    assert stored[0].report["failures"] == int(
        next(line for line in first.stdout.splitlines() if line.startswith("failures"))
        .split(" = ")[1]
    )


def test_tightness_sweep_csv():
    result = runner.invoke(
        app,
        ["tightness-sweep", "--s", "30", "--m", "10", "--t", "3", "--ks", "3,4", "--trials", "5", "--seed", "1"],
    )

    assert result.exit_code == 0
    rows = list(csv.reader(io.StringIO(result.stdout)))
    assert len(rows) == 3 and rows[0][0] == "s"


def test_problem_generation_and_rank_check(tmp_path: Path):
    """
    Test 6: gen-problem then rank-check

    Requirement: Vandermonde problems over GF(p) are n-wise independent
    Verifies: Written file parses; kwise = true
    """
    out = tmp_path / "problem.txt"

    generated = runner.invoke(app, ["gen-problem", "--n", "3", "--m", "4", "--p", "5", "--out", str(out)])
    checked = runner.invoke(app, ["rank-check", str(out), "--k", "3"])
    not_prime = runner.invoke(app, ["gen-problem", "--n", "3", "--m", "4", "--p", "6"])

    assert generated.exit_code == 0 and out.read_text().startswith("problem 5 3 4\n")
    assert checked.exit_code == 0 and checked.stdout == "kwise = true\n"
    assert not_prime.exit_code == 2


def test_layout_generation_and_audit(tmp_path: Path):
    """
    Test 7: gen-layout then audit

    Requirement: Exit 0 on a violation, 1 when no witness is found
    Verifies: Dense random layout is violated; a forest layout is not; k from --n
    """
    dense = tmp_path / "dense.layout"
    forest = _write(tmp_path, "forest.layout", "layout 4 3 2\nq 0 1\nq 1 2\nq 2 3\n")

    generated = runner.invoke(
        app, ["gen-layout", "--s", "6", "--m", "20", "--t", "2", "--seed", "3", "--out", str(dense)]
    )
    violated = runner.invoke(app, ["audit", str(dense), "--k", "4"])
    clean = runner.invoke(app, ["audit", str(forest), "--n", "16"])
    no_k = runner.invoke(app, ["audit", str(forest)])

    assert generated.exit_code == 0
    assert violated.exit_code == 0 and violated.stdout.startswith("verdict = violation\n")
    assert clean.exit_code == 1
    assert "k = 4\n" in clean.stdout, "ceil(16 / log2 16) = 4"
    assert no_k.exit_code == 2


def test_run_cli_statuses(tmp_path: Path, theta_file: Path):
    bad = _write(tmp_path, "bad.w", "S: 0 1 2\nedges: 0 1 2\ngap: 0\n")

    assert run_cli(["verify", str(theta_file), str(bad)]) == 1
    assert run_cli(["find-dense", str(theta_file), "--epsilon", "1/5"]) == 0
    assert run_cli(["--bogus"]) == 2


def test_broken_invariant_exits_with_status_three(
    theta_file: Path, monkeypatch: pytest.MonkeyPatch
):
    """
    Test 8: A failed internal invariant is reported, not dumped

    Requirement: InternalInvariantError maps to its own non-zero exit status
    Verifies: Status 3 and an "internal error" line from both entry points
    """

    # Arrange
    def broken(*_args: object) -> None:
        raise InternalInvariantError("gap 0 below the guaranteed surplus")

    monkeypatch.setattr(cli, "find_dense_set", broken)
    args = ["find-dense", str(theta_file), "--epsilon", "1/5"]

    # Act
    result = runner.invoke(app, args)
    status = run_cli(args)

    # Assert
    assert result.exit_code == 3, f"Expected status 3, got {result.exit_code}: {result.output}"
    assert result.exception is None or isinstance(result.exception, SystemExit), (
        f"Traceback leaked: {result.exception!r}"
    )
    assert "internal error: gap 0 below the guaranteed surplus" in result.stderr
    assert status == 3, f"run_cli returned {status}"
