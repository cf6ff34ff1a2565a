"""
Property suites that check the decomposition against independent answers.

Each suite returns a SuiteResult with one row per case (or per sweep
point) and a pass flag; the CLI turns them into a table and a JSON file.
Suites are pure with respect to their random stream, so a seed fixes
every row.
"""

from __future__ import annotations

import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Any, Callable, Dict, List, Optional, Sequence

from entsep.analysis.oracles import (
    WERNER_SWEEP,
    rotated_werner_state,
    two_qubit_cut,
    werner_bsa_oracle,
    werner_closed_form,
    werner_separable_threshold,
    werner_state,
)
from entsep.bsa import bsa_decompose, negativity, ppt_check, rank_bound
from entsep.lp import LpProblem, enumerate_basic_solutions, lp_solve
from entsep.models.decomposition import BsaConfig
from entsep.models.density import PartitionSpec, SeparabilityMode
from entsep.models.states import RngStream
from entsep.numerics import rank_with_tolerance
from entsep.sampling import random_mixed_state, random_separable_state

logger = logging.getLogger(__name__)

WERNER_TOL = 5e-3
SEPARABLE_B = 1e-3
LP_TOL = 1e-9
LP_LARGE_SHAPE = (145, 2000)
LP_LARGE_SECONDS = 10.0

UNIQUENESS_P = (0.45, 0.95)

SUITES = ("werner", "uniqueness", "rank-arithmetic", "rank-bound", "ppt", "lp")


@dataclass(frozen=True)
class SuiteResult:
    """
    Outcome of one property suite.

    Attributes:
        name: Suite name.
        passed: True when no case failed.
        cases: Number of cases run.
        failures: Number of failed cases.
        rows: One mapping per case, JSON-ready.
        seconds: Wall time of the suite.
    """

    name: str
    passed: bool
    cases: int
    failures: int
    rows: List[Dict[str, Any]] = field(default_factory=list)
    seconds: float = 0.0

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


def _map(fn: Callable, items: Sequence, threads: int) -> List:
    if threads <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def _result(name: str, rows: List[Dict[str, Any]], started: float) -> SuiteResult:
    failures = sum(1 for r in rows if not r["passed"])
    result = SuiteResult(name, failures == 0, len(rows), failures, rows, time.perf_counter() - started)
    logger.info("suite %s: %d/%d passed in %.1fs", name, result.cases - failures, result.cases, result.seconds)
    return result


# Werner sweep

def werner_suite(
    rng: RngStream,
    config: Optional[BsaConfig] = None,
    points: Sequence[float] = WERNER_SWEEP,
    threads: int = 1,
) -> SuiteResult:
    """B of ρ_W(p) against the symmetry-reduction oracle."""
    started = time.perf_counter()
    threshold = werner_separable_threshold()
    mode = SeparabilityMode.k_separable(PartitionSpec.of(2, 2))

    def run(item):
        p, stream = item
        result = bsa_decompose(werner_state(p), mode, config, stream)
        oracle = werner_bsa_oracle(p, threshold)
        error = abs(result.B - oracle)
        return {
            "p": p,
            "B": result.B,
            "oracle": oracle,
            "closed_form": werner_closed_form(p),
            "error": error,
            "iterations": result.iterations_used,
            "passed": error <= WERNER_TOL,
        }

    rows = _map(run, list(zip(points, rng.split(len(points)))), threads)
    return _result("werner", rows, started)


# Uniqueness

def uniqueness_suite(
    rng: RngStream,
    config: Optional[BsaConfig] = None,
    n_cases: int = 10,
    threads: int = 1,
) -> SuiteResult:
    """
    Two random streams reach the same B within 2 · convergence_tol.

    Cases are locally rotated Werner states with p spread over UNIQUENESS_P.
    """
    started = time.perf_counter()
    config = config or BsaConfig()
    tol = 2.0 * config.convergence_tol
    mode = SeparabilityMode.k_separable(PartitionSpec.of(2, 2))
    low, high = UNIQUENESS_P
    points = [low + (high - low) * k / max(1, n_cases - 1) for k in range(n_cases)]

    def run(item):
        p, stream = item
        rotation, first, second = stream.split(3)
        rho = rotated_werner_state(p, rotation)
        a = bsa_decompose(rho, mode, config, first)
        b = bsa_decompose(rho, mode, config, second)
        spread = abs(a.B - b.B)
        return {"p": p, "B_first": a.B, "B_second": b.B, "spread": spread, "passed": spread <= tol}

    rows = _map(run, list(zip(points, rng.split(len(points)))), threads)
    return _result("uniqueness", rows, started)


# Rank bounds

def rank_arithmetic_suite() -> SuiteResult:
    """Closed-form rank bounds of the reference partitions."""
    started = time.perf_counter()
    two_qubits = PartitionSpec.of(2, 2)
    assembly = PartitionSpec.of(3, 2, 2)
    cases = [
        ("2x2 k-sep", SeparabilityMode.k_separable(two_qubits), two_qubits, 1),
        ("3x2x2 k-sep", SeparabilityMode.k_separable(assembly), assembly, 7),
        ("3x2x2 bisep-augmented", SeparabilityMode.bisep_augmented(assembly), assembly, 5),
    ]
    rows = []
    for label, mode, partition, expected in cases:
        value = rank_bound(mode, partition)
        rows.append({"case": label, "rank_bound": value, "expected": expected, "passed": value == expected})
    return _result("rank-arithmetic", rows, started)


def rank_bound_suite(
    rng: RngStream,
    config: Optional[BsaConfig] = None,
    n_cases: int = 200,
    threads: int = 1,
) -> SuiteResult:
    """Entangled components of two-qubit states are pure whenever B is not negligible."""
    started = time.perf_counter()
    mode = SeparabilityMode.k_separable(PartitionSpec.of(2, 2))

    def run(stream):
        rho = random_mixed_state((2, 2), stream)
        result = bsa_decompose(rho, mode, config, stream)
        rank = rank_with_tolerance(result.rho_ent.matrix, 1e-6) if result.rho_ent is not None else 0
        checked = result.B > SEPARABLE_B
        return {"B": result.B, "rank": rank, "checked": checked, "passed": not checked or rank == 1}

    rows = _map(run, rng.split(n_cases), threads)
    return _result("rank-bound", rows, started)


# PPT agreement

def ppt_suite(
    rng: RngStream,
    config: Optional[BsaConfig] = None,
    n_cases: int = 100,
    threads: int = 1,
) -> SuiteResult:
    """
    B below SEPARABLE_B exactly when the state is PPT.

    Cases alternate between 2x2 and 2x3 and between states separable by
    construction and generic mixtures.
    """
    started = time.perf_counter()
    cut = two_qubit_cut()

    def run(item):
        index, stream = item
        dims = (2, 2) if index % 2 == 0 else (2, 3)
        separable = (index // 2) % 2 == 0
        rho = random_separable_state(dims, stream) if separable else random_mixed_state(dims, stream)
        mode = SeparabilityMode.k_separable(rho.partition)
        result = bsa_decompose(rho, mode, config, stream)
        ppt = ppt_check(rho, cut)
        return {
            "dims": "x".join(str(d) for d in dims),
            "constructed_separable": separable,
            "B": result.B,
            "min_pt_eigenvalue": ppt.min_pt_eigenvalue,
            "negativity": negativity(rho, cut),
            "is_ppt": ppt.is_ppt,
            "passed": (result.B < SEPARABLE_B) == ppt.is_ppt,
        }

    rows = _map(run, list(enumerate(rng.split(n_cases))), threads)
    return _result("ppt", rows, started)


# LP solver

def random_feasible_lp(rows: int, cols: int, rng: RngStream) -> LpProblem:
    """Gaussian A, b = A x0 for a nonnegative x0, nonnegative costs."""
    a = rng.normal((rows, cols))
    x0 = rng.uniform(cols) * (rng.uniform(cols) < 0.5)
    c = rng.uniform(cols)
    return LpProblem(a, a @ x0, c)


def lp_suite(rng: RngStream, n_cases: int = 100, large: bool = True) -> SuiteResult:
    """Simplex optimum against exhaustive enumeration, plus one timed large instance."""
    started = time.perf_counter()
    rows: List[Dict[str, Any]] = []
    for stream in rng.split(n_cases):
        m = int(stream.integers(1, 5))
        n = int(stream.integers(m + 1, 9))
        problem = random_feasible_lp(m, n, stream)
        ours = lp_solve(problem)
        reference = enumerate_basic_solutions(problem)
        error = abs(ours.objective_value - reference.objective_value)
        rows.append({
            "shape": f"{m}x{n}",
            "simplex": ours.objective_value,
            "enumeration": reference.objective_value,
            "error": error,
            "passed": ours.is_optimal and reference.is_optimal and error <= LP_TOL * max(1.0, abs(reference.objective_value)),
        })
    if large:
        m, n = LP_LARGE_SHAPE
        problem = random_feasible_lp(m, n, rng)
        tick = time.perf_counter()
        solution = lp_solve(problem)
        seconds = time.perf_counter() - tick
        rows.append({
            "shape": f"{m}x{n}",
            "simplex": solution.objective_value,
            "seconds": seconds,
            "pivots": solution.pivots,
            "passed": solution.is_optimal and seconds < LP_LARGE_SECONDS,
        })
    return _result("lp", rows, started)


def run_benchmark(
    suites: Sequence[str] = SUITES,
    seed: int = 0,
    config: Optional[BsaConfig] = None,
    threads: int = 1,
    cases: Optional[int] = None,
) -> List[SuiteResult]:
    """
    Run the named suites in order, each on its own child stream.

    ``cases`` overrides the default case count of the sampled suites.
    """
    unknown = [s for s in suites if s not in SUITES]
    if unknown:
        raise ValueError(f"unknown suite '{unknown[0]}' (available: {', '.join(SUITES)})")
    streams = dict(zip(SUITES, RngStream(seed).split(len(SUITES))))
    results = []
    for name in suites:
        stream = streams[name]
        if name == "werner":
            results.append(werner_suite(stream, config, threads=threads))
        elif name == "uniqueness":
            results.append(uniqueness_suite(stream, config, cases or 10, threads))
        elif name == "rank-arithmetic":
            results.append(rank_arithmetic_suite())
        elif name == "rank-bound":
            results.append(rank_bound_suite(stream, config, cases or 200, threads))
        elif name == "ppt":
            results.append(ppt_suite(stream, config, cases or 100, threads))
        elif name == "lp":
            results.append(lp_suite(stream, cases or 100))
    return results


def format_table(results: Sequence[SuiteResult]) -> List[str]:
    """Human-readable lines: one summary line per suite, then the Werner rows."""
    lines = [f"{'suite':<16} {'result':<6} {'passed':>9} {'seconds':>8}"]
    for r in results:
        status = "PASS" if r.passed else "FAIL"
        lines.append(f"{r.name:<16} {status:<6} {r.cases - r.failures:>4}/{r.cases:<4} {r.seconds:>8.2f}")
    for r in results:
        if r.name == "werner":
            lines.append("")
            lines.append(f"{'p':>8} {'B':>12} {'oracle':>12} {'error':>10}")
            for row in r.rows:
                lines.append(f"{row['p']:>8.4f} {row['B']:>12.6f} {row['oracle']:>12.6f} {row['error']:>10.2e}")
    return lines
