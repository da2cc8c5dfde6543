"""
Monte-Carlo check that random t-uniform hypergraphs at low density have no
k vertices spanning k edges, against the union bound for that event.
"""

from __future__ import annotations

import csv
import io
import logging
import math
from collections.abc import Iterable, Sequence
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction

import numpy as np

import config
from models import (
    BudgetExceededError,
    InternalInvariantError,
    PreconditionError,
    THypergraph,
    TrialReport,
)
from oracle import exists_k_spanning_k

logger = logging.getLogger(__name__)

RNG_NAME = "numpy.PCG64"
BOUND_TOLERANCE = 1e-9

type Seed = int | np.random.SeedSequence


def _generator(seed: Seed) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


def sample_uniform_hypergraph(s: int, m: int, t: int, seed: Seed) -> THypergraph:
    """m independent edges, each uniform over the t-subsets of [0, s)."""
    if t < 2:
        raise PreconditionError(f"arity t must be >= 2, got {t}")
    if s < t:
        raise PreconditionError(f"cannot draw {t}-subsets from s={s} vertices")
    if m < 0:
        raise PreconditionError(f"m must be >= 0, got {m}")

    rng = _generator(seed)
    rows = np.sort(rng.integers(0, s, size=(m, t)), axis=1)
    # rejection keeps each accepted row uniform over the t-subsets
    while True:
        bad = np.flatnonzero((np.diff(rows, axis=1) == 0).any(axis=1))
        if bad.size == 0:
            break
        rows[bad] = np.sort(rng.integers(0, s, size=(bad.size, t)), axis=1)

    return THypergraph(s=s, t=t, edges=tuple(tuple(int(v) for v in row) for row in rows))


def threshold_s(m: int, t: int, k: int) -> float:
    """e^3 * k * (m/k)^(1/(t-1))."""
    return math.exp(3) * k * (m / k) ** (1 / (t - 1))


def analytic_bound(s: int, m: int, t: int, k: int) -> float:
    """(e^(t+2) * m * k^(t-2) / s^(t-1))^k, evaluated in log space."""
    if m == 0:
        return 0.0
    log_base = (t + 2) + math.log(m) + (t - 2) * math.log(k) - (t - 1) * math.log(s)
    try:
        return math.exp(k * log_base)
    except OverflowError:
        return math.inf


def exact_union_bound(s: int, m: int, t: int, k: int) -> float:
    """C(s,k) * C(m,k) * (C(k,t) / C(s,t))^k, exact until the final float."""
    value = (
        math.comb(s, k)
        * math.comb(m, k)
        * Fraction(math.comb(k, t), math.comb(s, t)) ** k
    )
    try:
        return float(value)
    except OverflowError:
        return math.inf


def _count_failures(
    s: int, m: int, t: int, k: int, seeds: Sequence[np.random.SeedSequence], budget: int
) -> int:
    return sum(
        exists_k_spanning_k(sample_uniform_hypergraph(s, m, t, child), k, budget)
        for child in seeds
    )


def _chunks[T](items: Sequence[T], parts: int) -> list[Sequence[T]]:
    size = max(1, math.ceil(len(items) / parts))
    return [items[i : i + size] for i in range(0, len(items), size)]


def run_tightness_experiment(
    s: int,
    m: int,
    t: int,
    k: int,
    trials: int,
    seed: int,
    workers: int = 1,
    budget: int | None = None,
) -> TrialReport:
    if s < t:
        raise PreconditionError(f"cannot draw {t}-subsets from s={s} vertices")
    if k < 1 or trials < 0 or seed < 0:
        raise PreconditionError(
            f"need k >= 1, trials >= 0 and seed >= 0, got k={k}, trials={trials}, seed={seed}"
        )
    budget = config.ORACLE_BUDGET if budget is None else budget
    if k <= s and k <= m and min(math.comb(s, k), math.comb(m, k)) > budget:
        raise BudgetExceededError(
            f"k-set check at s={s}, m={m}, k={k} exceeds the enumeration budget of {budget}"
        )

    children = np.random.SeedSequence(seed).spawn(trials)
    if workers > 1 and trials > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = _chunks(children, workers)
            failures = sum(
                pool.map(
                    _count_failures,
                    *zip(*[(s, m, t, k, part, budget) for part in parts]),
                )
            )
    else:
        failures = _count_failures(s, m, t, k, children, budget)

    threshold = threshold_s(m, t, k)
    satisfied = s >= threshold
    bound = analytic_bound(s, m, t, k)
    e_minus_k = math.exp(-k)
    if satisfied and t >= 3 and bound > e_minus_k * (1 + BOUND_TOLERANCE):
        raise InternalInvariantError(
            f"union bound {bound!r} exceeds e^-k = {e_minus_k!r} although s >= threshold"
        )

    report = TrialReport(
        s=s,
        m=m,
        t=t,
        k=k,
        trials=trials,
        seed=seed,
        rng=RNG_NAME,
        threshold_s=threshold,
        condition_satisfied=satisfied,
        analytic_bound=bound,
        exact_union_bound=exact_union_bound(s, m, t, k),
        e_minus_k=e_minus_k,
        failures=failures,
        fraction=failures / trials if trials else 0.0,
    )
    logger.info(
        f"tightness s={s} m={m} t={t} k={k}: {failures}/{trials} failures, bound {bound:.6g}"
    )
    return report


def sweep_k(
    s: int,
    m: int,
    t: int,
    ks: Iterable[int],
    trials: int,
    seed: int,
    workers: int = 1,
    budget: int | None = None,
) -> list[TrialReport]:
    return [
        run_tightness_experiment(s, m, t, k, trials, seed, workers=workers, budget=budget)
        for k in ks
    ]


def _render(value: object) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def format_trial_report(report: TrialReport) -> str:
    """One "key = value" line per field, in declaration order."""
    return "".join(
        f"{key} = {_render(value)}\n" for key, value in report.model_dump().items()
    )


def trial_reports_csv(reports: Iterable[TrialReport]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(TrialReport.model_fields)
    for report in reports:
        writer.writerow(_render(v) for v in report.model_dump().values())
    return buffer.getvalue()
