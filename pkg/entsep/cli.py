# entsep/cli.py
"""
Command-line interface for entsep.

Responsibilities:
- Parse flags and merge them over presets and config files
- Delegate work to the library (bsa, dynamics, analysis)
- Persist results through entsep.db and optionally record the run
- Print summary lines and map failures to exit codes

Exit codes: 0 ok, 1 benchmark suite failed, 2 invalid input or config,
3 no convergence or numerical breakdown (results are still written when
they exist).
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

from entsep.analysis.benchmark import SUITES, format_table, run_benchmark
from entsep.analysis.oracles import ghz_like_state
from entsep.analysis.subspace import (
    beta_distribution,
    corner_states,
    dominant_eigenvector,
    max_product_overlap,
)
from entsep.analysis.tanglemeter import tanglemeter_of
from entsep.bsa import bsa_decompose, rank_bound, verify_decomposition
from entsep.config import MODES, PRESETS, RunConfig, load_config, with_overrides
from entsep.db.database import Database, config_digest
from entsep.db.files import (
    complex_to_json,
    load_density_matrix,
    save_analysis_csv,
    save_beta_csv,
    save_decomposition,
    save_density_matrix,
    save_json,
    save_trajectory_csv,
)
from entsep.dynamics import analyze_trajectory, build_generators, evolve
from entsep.errors import ConfigError, EntsepError, IntegrationError, InvalidInputError, LpBreakdownError
from entsep.liouville import build_basis, vectorize
from entsep.models.analysis import TANGLEMETER_DIMS, EntangledSubspace
from entsep.models.density import DensityMatrix, SeparabilityMode
from entsep.models.dynamics import MODEL_DIMS
from entsep.models.states import RngStream
from entsep.numerics import rank_with_tolerance

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_SUITE_FAILED = 1
EXIT_INVALID = 2
EXIT_NOT_CONVERGED = 3

DEFAULT_LEDGER = "entsep-runs.sqlite3"
LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"


@dataclass
class Outcome:
    """What a command hands back to main for the exit code and the ledger."""

    exit_code: int = EXIT_OK
    metrics: Dict[str, Any] = field(default_factory=dict)
    outputs: List[str] = field(default_factory=list)


# Small helpers

def _configure_logging(level: Optional[str]) -> None:
    """Level from --log-level, else ENTSEP_LOG, else WARNING."""
    name = (level or os.environ.get("ENTSEP_LOG") or "WARNING").upper()
    numeric = logging.getLevelName(name)
    if not isinstance(numeric, int):
        raise ConfigError(f"unknown log level '{name}'")
    logging.basicConfig(format=LOG_FORMAT)
    logging.getLogger().setLevel(numeric)


def _run_config(args: argparse.Namespace) -> RunConfig:
    config = load_config(args.config, args.preset)
    return with_overrides(
        config,
        seed=args.seed,
        mode=args.mode,
        threads=args.threads,
        out_dir=args.out,
        samples=getattr(args, "samples", None),
    )


def _mode(config: RunConfig, rho: DensityMatrix) -> SeparabilityMode:
    return SeparabilityMode.from_name(config.mode, rho.partition, config.custom_groupings)


def _out_path(config: RunConfig, name: str) -> Path:
    return Path(config.out_dir) / name


def _flag(value: Optional[bool]) -> str:
    return "n/a" if value is None else str(bool(value)).lower()


def _initial_state(config: RunConfig) -> DensityMatrix:
    source = config.dynamics.initial_state
    rho = ghz_like_state(MODEL_DIMS) if source == "ghz-like" else load_density_matrix(Path(source))
    if tuple(rho.partition.subsystem_dims) != MODEL_DIMS:
        raise InvalidInputError(f"initial state must be a 3x2x2 state, got partition {rho.partition.subsystem_dims}")
    if config.dynamics.initial_mixing > 0.0:
        rho = rho.mixed_with_identity(config.dynamics.initial_mixing)
    return rho


# Commands

def decompose_command(args: argparse.Namespace) -> Outcome:
    """Decompose one density matrix and write the result JSON."""
    config = _run_config(args)
    rho = load_density_matrix(Path(args.input))
    mode = _mode(config, rho)
    outcome = Outcome()

    try:
        result = bsa_decompose(rho, mode, config.bsa, RngStream(config.seed))
    except LpBreakdownError as exc:
        print(f"Error: decomposition broke down: {exc}", file=sys.stderr)
        return Outcome(EXIT_NOT_CONVERGED, {"error": str(exc)})

    report = verify_decomposition(rho, result, config.bsa, config.optimizer)
    path = save_decomposition(
        _out_path(config, f"{Path(args.input).stem}.bsa.json"), result, report, config.to_dict(), config.seed
    )
    outcome.outputs.append(str(path))

    rank = report.ent_rank or 0
    print(f"B={result.B:.4f} rank={rank} iters={result.iterations_used} converged={_flag(result.converged)}")
    if not report.passed:
        print(f"Warning: verification failed (see {path})")
    outcome.metrics = {"B": result.B, "rank": rank, "iterations": result.iterations_used, "converged": result.converged}
    if not result.converged:
        outcome.exit_code = EXIT_NOT_CONVERGED
    return outcome


def evolve_command(args: argparse.Namespace) -> Outcome:
    """Integrate the relaxation model and analyse the trajectory."""
    config = _run_config(args)
    if args.stride is not None:
        config = replace(config, dynamics=replace(config.dynamics, stride=args.stride))
    dyn = config.dynamics
    rho0 = _initial_state(config)
    basis = build_basis(rho0.dim)
    mats = build_generators(config.model, basis)

    try:
        traj = evolve(vectorize(rho0, basis), mats, dyn.dt, dyn.t_end, rho0.partition, dyn.monitor_positivity)
    except IntegrationError as exc:
        print(f"Error: integration failed at step {exc.step}: {exc}", file=sys.stderr)
        return Outcome(EXIT_NOT_CONVERGED, {"error": str(exc), "step": exc.step})

    analysis = analyze_trajectory(
        traj,
        _mode(config, rho0),
        config.bsa,
        RngStream(config.seed),
        dyn.stride,
        config.optimizer,
        dyn.death_tol,
        dyn.lambda_dom_threshold,
    )
    outputs = [
        str(save_trajectory_csv(_out_path(config, "trajectory.csv"), traj, dyn.stride)),
        str(save_analysis_csv(_out_path(config, "analysis.csv"), analysis)),
    ]
    if analysis.final_entangled is not None:
        outputs.append(str(save_density_matrix(_out_path(config, "rho_ent_final.json"), analysis.final_entangled)))

    print(f"Analysed {len(analysis.records)} steps up to t={traj.times[-1]:g}")
    if traj.positivity_violations:
        print(f"Warning: {len(traj.positivity_violations)} steps left the state space")
    failed = analysis.failed()
    if failed:
        print(f"Warning: {len(failed)} steps could not be decomposed")
    unconverged = sum(1 for r in analysis.records if r.converged is False)
    if unconverged:
        print(f"Warning: {unconverged} decompositions hit the iteration cap")

    if not analysis.death_intervals:
        print("No sudden-death interval detected.")
    for interval in analysis.death_intervals:
        if interval.revived:
            print(f"Sudden death at t={interval.start:g}, revival at t={interval.end:g}")
        else:
            print(f"Sudden death at t={interval.start:g}, no revival before t={traj.times[-1]:g}")

    metrics = {
        "steps": traj.n_steps,
        "analysed": len(analysis.records),
        "failed": len(failed),
        "death_intervals": [[i.start, i.end] for i in analysis.death_intervals],
    }
    return Outcome(EXIT_OK, metrics, outputs)


def analyze_command(args: argparse.Namespace) -> Outcome:
    """Corners, extremality, rank and tanglemeter of an entangled component."""
    config = _run_config(args)
    rho = load_density_matrix(Path(args.input))
    is_322 = tuple(rho.partition.subsystem_dims) == TANGLEMETER_DIMS
    if not args.no_tanglemeter and not is_322:
        raise InvalidInputError(
            f"tanglemeters need a 3x2x2 state, got partition {rho.partition.subsystem_dims}; "
            "pass --no-tanglemeter for corners only"
        )
    if config.samples > 0 and not is_322:
        raise InvalidInputError("--samples needs a 3x2x2 state")

    mode = _mode(config, rho)
    probe_rng, corner_rng, beta_rng, canon_rng = RngStream(config.seed).split(4)
    subspace = EntangledSubspace.from_density(rho, config.bsa.rank_rel_tol)
    rank = rank_with_tolerance(rho.matrix, config.bsa.rank_rel_tol)
    bound = rank_bound(mode, rho.partition)
    probe = max_product_overlap(subspace, mode, config.optimizer, probe_rng)
    corners = corner_states(subspace, mode, config.optimizer, corner_rng)
    extremal = probe.overlap < 1.0 - config.bsa.extremality_margin

    stem = Path(args.input).stem
    payload: Dict[str, Any] = {
        "mode": mode.name,
        "rank": rank,
        "rank_bound": bound,
        "rank_ok": rank <= bound,
        "extremality_overlap": probe.overlap,
        "extremality_ok": extremal,
        "closest_product": {"grouping": probe.argmax.grouping.label(), **complex_to_json(probe.argmax.assembled.amplitudes)},
        "corners": [complex_to_json(c.amplitudes) for c in corners],
    }
    metrics: Dict[str, Any] = {"rank": rank, "rank_bound": bound, "extremality_overlap": probe.overlap}
    outputs: List[str] = []
    exit_code = EXIT_OK

    if not args.no_tanglemeter:
        dominant = dominant_eigenvector(rho)
        beta, canonical = tanglemeter_of(dominant.vector, config.optimizer, canon_rng)
        payload["lambda_dom"] = dominant.lambda_dom
        payload["tanglemeter"] = beta.to_dict()
        payload["canonical"] = canonical.to_dict()
        metrics["beta_111"] = beta.beta_111
        print(f"lambda_dom={dominant.lambda_dom:.6f} " + " ".join(f"{k}={v:.6f}" for k, v in beta.to_dict().items()))
        if not canonical.converged:
            print("Warning: canonicalisation missed its tolerances")
            exit_code = EXIT_NOT_CONVERGED
        elif canonical.degenerate:
            print("Note: canonical form is degenerate (several equally good reference products)")

    if config.samples > 0:
        distribution = beta_distribution(rho, config.samples, beta_rng, config.optimizer, config.threads, config.bsa.rank_rel_tol)
        outputs.append(str(save_beta_csv(_out_path(config, f"{stem}.beta.csv"), distribution)))
        payload["beta_distribution"] = {
            "requested": distribution.requested,
            "failures": distribution.failures,
            "mean": distribution.mean.tolist() if distribution.mean is not None else None,
            "covariance": distribution.covariance.tolist() if distribution.covariance is not None else None,
        }
        metrics["beta_failures"] = distribution.failures

    outputs.insert(0, str(save_json(_out_path(config, f"{stem}.analysis.json"), payload)))
    print(f"rank={rank} bound={bound} corners={len(corners)} overlap={probe.overlap:.6f} extremal={_flag(extremal)}")
    return Outcome(exit_code, metrics, outputs)


def benchmark_command(args: argparse.Namespace) -> Outcome:
    """Run the property suites, print the table and write benchmark.json."""
    config = _run_config(args)
    suites = args.suite or list(SUITES)
    results = run_benchmark(suites, config.seed, config.bsa, config.threads, args.cases)
    path = save_json(
        _out_path(config, "benchmark.json"),
        {"seed": config.seed, "suites": [r.to_dict() for r in results]},
    )
    for line in format_table(results):
        print(line)
    failed = [r.name for r in results if not r.passed]
    metrics = {r.name: f"{r.cases - r.failures}/{r.cases}" for r in results}
    return Outcome(EXIT_SUITE_FAILED if failed else EXIT_OK, metrics, [str(path)])


def history_command(args: argparse.Namespace) -> Outcome:
    """List recent runs from the ledger."""
    digest = config_digest(_run_config(args).to_dict()) if args.same_config else None
    db = Database(path=args.ledger or DEFAULT_LEDGER)
    db.initialize()
    rows = db.fetch_runs(limit=args.limit, digest=digest)
    db.close()
    if not rows:
        print("No matching runs." if digest else "No runs recorded yet.")
        return Outcome()
    for r in rows:
        metrics = " ".join(f"{k}={v}" for k, v in r["metrics"].items())
        print(f"#{r['id']} • {r['created_at']} | {r['command']} | seed={r['seed']} | exit={r['exit_code']} | {metrics}")
    return Outcome()


COMMANDS = {
    "decompose": decompose_command,
    "evolve": evolve_command,
    "analyze": analyze_command,
    "benchmark": benchmark_command,
    "history": history_command,
}


# Parser

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="JSON config file")
    common.add_argument("--preset", choices=sorted(PRESETS), help="named parameter preset")
    common.add_argument("--seed", type=int)
    common.add_argument("--mode", choices=MODES)
    common.add_argument("--threads", type=int)
    common.add_argument("--out", help="output directory")
    common.add_argument("--ledger", help="SQLite run ledger to record this run in")
    common.add_argument("--log-level", help="overrides ENTSEP_LOG")

    parser = argparse.ArgumentParser(prog="entsep", description="Best separable approximation toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("decompose", parents=[common], help="decompose a density-matrix file")
    p.add_argument("input")

    p = sub.add_parser("evolve", parents=[common], help="integrate and analyse the relaxation model")
    p.add_argument("--stride", type=int)

    p = sub.add_parser("analyze", parents=[common], help="characterise an entangled component")
    p.add_argument("input")
    p.add_argument("--samples", type=int)
    p.add_argument("--no-tanglemeter", action="store_true", help="corners and extremality only")

    p = sub.add_parser("benchmark", parents=[common], help="run the property suites")
    p.add_argument("--suite", action="append", choices=SUITES)
    p.add_argument("--cases", type=int, help="case count of the sampled suites")

    p = sub.add_parser("history", parents=[common], help="list runs from the ledger")
    p.add_argument("--limit", type=int, default=20)
    p.add_argument(
        "--same-config", action="store_true", help="only runs whose effective config matches this invocation's"
    )
    return parser


# Main entry point

def main(argv: Optional[Sequence[str]] = None) -> int:
    """Run one command and return its exit code."""
    args = build_parser().parse_args(argv)
    try:
        _configure_logging(args.log_level)
        outcome = COMMANDS[args.command](args)
    except (InvalidInputError, ConfigError) as exc:
        print(f"Error: {exc}", file=sys.stderr)
        outcome = Outcome(EXIT_INVALID, {"error": str(exc)})
    except EntsepError as exc:
        print(f"Error: {exc}", file=sys.stderr)
        outcome = Outcome(EXIT_NOT_CONVERGED, {"error": str(exc)})

    if args.ledger and args.command != "history":
        _record(args, outcome)
    return outcome.exit_code


def _record(args: argparse.Namespace, outcome: Outcome) -> None:
    try:
        config = _run_config(args).to_dict()
    except EntsepError:
        config = {}
    db = Database(path=args.ledger)
    db.initialize()
    db.save_run(args.command, config.get("seed", 0), config, outcome.metrics, outcome.outputs, outcome.exit_code)
    db.close()


if __name__ == "__main__":
    sys.exit(main())
