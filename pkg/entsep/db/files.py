"""
JSON and CSV persistence of states, decompositions and time series.

Floats are written with repr precision so a save/load round trip is
bit-stable. JSON documents carry ``generated_at`` as their first key and
CSV files start with a ``# generated_at=`` line; two runs with the same
config and seed differ only in that line.
"""

from __future__ import annotations

import csv
import json
import logging
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Sequence

import numpy as np

from entsep.errors import InvalidInputError
from entsep.models.analysis import BETA_COLUMNS, BetaDistribution
from entsep.models.decomposition import BsaDecomposition, VerificationReport
from entsep.models.density import DensityMatrix, PartitionSpec
from entsep.models.dynamics import Trajectory, TrajectoryAnalysis

logger = logging.getLogger(__name__)

LOAD_TOL = 1e-8


def timestamp() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def complex_to_json(m: np.ndarray) -> Dict[str, Any]:
    m = np.asarray(m)
    return {"re": np.real(m).tolist(), "im": np.imag(m).tolist()}


def _write_json(path: Path, payload: Dict[str, Any]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    document = {"generated_at": timestamp(), **payload}
    path.write_text(json.dumps(document, indent=2) + "\n", encoding="utf-8")
    logger.debug("wrote %s", path)
    return path


def _write_csv(path: Path, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="") as fh:
        fh.write(f"# generated_at={timestamp()}\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_cell(v) for v in row])
    logger.debug("wrote %s", path)
    return path


def _cell(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def read_csv(path: Path) -> List[Dict[str, str]]:
    """Rows of a CSV written here, header comment skipped."""
    with Path(path).open(encoding="utf-8", newline="") as fh:
        lines = [line for line in fh if not line.startswith("#")]
    return list(csv.DictReader(lines))


# Density matrices

def save_density_matrix(path: Path, rho: DensityMatrix, label: Optional[str] = None) -> Path:
    payload: Dict[str, Any] = {"dims": list(rho.partition.subsystem_dims)}
    if label is not None:
        payload["label"] = label
    payload["matrix_re"] = np.real(rho.matrix).tolist()
    payload["matrix_im"] = np.imag(rho.matrix).tolist()
    return _write_json(path, payload)


def density_matrix_from_json(data: Dict[str, Any]) -> DensityMatrix:
    """
    Validate and build a density matrix from its JSON form.

    Raises:
        InvalidInputError: Missing fields, wrong shapes or a violated
            density-matrix invariant (named in the message).
    """
    for key in ("dims", "matrix_re", "matrix_im"):
        if key not in data:
            raise InvalidInputError(f"density matrix file lacks '{key}'")
    try:
        dims = tuple(int(d) for d in data["dims"])
        re = np.array(data["matrix_re"], dtype=float)
        im = np.array(data["matrix_im"], dtype=float)
    except (TypeError, ValueError) as exc:
        raise InvalidInputError(f"malformed density matrix file: {exc}") from exc
    if re.shape != im.shape:
        raise InvalidInputError(f"matrix_re {re.shape} and matrix_im {im.shape} differ in shape")
    return DensityMatrix(PartitionSpec(dims), re + 1j * im, LOAD_TOL)


def load_density_matrix(path: Path) -> DensityMatrix:
    path = Path(path)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise InvalidInputError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise InvalidInputError(f"{path} is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise InvalidInputError(f"{path} must hold a JSON object")
    return density_matrix_from_json(data)


# Decompositions

def decomposition_to_json(result: BsaDecomposition) -> Dict[str, Any]:
    return {
        "B": result.B,
        "converged": result.converged,
        "iterations_used": result.iterations_used,
        "input_perturbation": result.input_perturbation,
        "mode": result.mode.name,
        "groupings": [g.label() for g in result.mode.groupings],
        "history": list(result.history),
        "product_weights": [float(a) for a in result.product_weights],
        "product_vertices": [
            {"grouping": p.grouping.label(), **complex_to_json(p.assembled.amplitudes)}
            for p in result.product_vertices
        ],
        "entangled_weights": [float(b) for b in result.entangled_weights],
        "entangled_vertices": [complex_to_json(v.amplitudes) for v in result.entangled_vertices],
        "rho_sep": complex_to_json(result.rho_sep.matrix) if result.rho_sep is not None else None,
        "rho_ent": complex_to_json(result.rho_ent.matrix) if result.rho_ent is not None else None,
    }


def save_decomposition(
    path: Path,
    result: BsaDecomposition,
    report: VerificationReport,
    config: Dict[str, Any],
    seed: int,
) -> Path:
    payload = decomposition_to_json(result)
    payload["verification"] = report.to_dict()
    payload["seed"] = seed
    payload["config"] = config
    return _write_json(path, payload)


def save_json(path: Path, payload: Dict[str, Any]) -> Path:
    """Any JSON-ready mapping, with the timestamp key first."""
    return _write_json(path, payload)


# Time series

def save_trajectory_csv(path: Path, traj: Trajectory, stride: int = 1) -> Path:
    """One row per stride-th step: step, t, purity and the Liouville components."""
    n = traj.vectors.shape[1]
    header = ["step", "t", "purity"] + [f"r_{k}" for k in range(n)]
    purity = traj.purity()
    steps = range(0, traj.n_steps + 1, max(1, stride))
    rows = ([s, float(traj.times[s]), float(purity[s])] + list(traj.vectors[s]) for s in steps)
    return _write_csv(path, header, rows)


ANALYSIS_COLUMNS = ("t", "purity", "B", "rank", "lambda_dom") + BETA_COLUMNS


def save_analysis_csv(path: Path, analysis: TrajectoryAnalysis) -> Path:
    """Per-step analysis; β fields are empty unless a tanglemeter was recorded."""
    rows = []
    for r in analysis.records:
        betas = list(r.tanglemeter.as_row()) if r.tanglemeter is not None else [None] * len(BETA_COLUMNS)
        rows.append([r.t, r.purity, r.B, r.rank, r.lambda_dom] + betas)
    return _write_csv(path, ANALYSIS_COLUMNS, rows)


def save_beta_csv(path: Path, distribution: BetaDistribution) -> Path:
    return _write_csv(path, ("weight",) + BETA_COLUMNS, distribution.rows())
