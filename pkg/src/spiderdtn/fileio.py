"""File formats.

Three formats cover all persistent data:

* matrix CSV: bare comma-separated rows, every float rendered with 17
  significant digits so values round-trip bit for bit; no header;
* problem JSON: a schema-versioned description of one recovery instance
  (see docs/formats.md for the field list);
* result CSV: per-instance metric rows with a fixed header, plus small
  summary CSVs for cells, probes, and regressions.

All writers emit LF line endings and no timestamps, so identical inputs
produce identical bytes.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .experiments import CellResult, InstanceResult, ProbeRow, RegressionResult
from .inverse import FULL_SPACE, REDUCED, InverseProblem
from .topology import EdgePartition, SpiderTopology, build_spider

SCHEMA_VERSION = 1

INSTANCE_HEADER = "m,s,repetition,seed,error,misfit,ratio,p,penalty,iterations,status"
CELL_HEADER = "m,s,skipped,instances,failures,max_error,max_ratio"
PROBE_HEADER = "m,sigma_min,sigma_max,cond"
REGRESSION_HEADER = "slope,intercept,r_squared,p_value"


def format_float(value: float) -> str:
    """Render a float with 17 significant digits (lossless round trip)."""
    return "%.17g" % float(value)


def write_matrix_csv(path: str | Path, matrix: np.ndarray) -> None:
    """Write a 1- or 2-dimensional array as a bare CSV of 17-digit floats."""
    matrix = np.atleast_2d(np.asarray(matrix, dtype=float))
    if matrix.ndim != 2:
        raise ValueError(f"matrix must be 1- or 2-dimensional, got {matrix.ndim}")
    lines = [",".join(format_float(v) for v in row) for row in matrix]
    Path(path).write_text("\n".join(lines) + "\n")


def read_matrix_csv(path: str | Path) -> np.ndarray:
    """Read a bare CSV written by :func:`write_matrix_csv`.

    Raises
    ------
    ValueError
        On empty files, ragged rows, or unparsable entries.
    """
    text = Path(path).read_text()
    rows: list[list[float]] = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            rows.append([float(cell) for cell in line.split(",")])
        except ValueError as exc:
            raise ValueError(f"{path}:{lineno}: {exc}") from exc
    if not rows:
        raise ValueError(f"{path}: no numeric rows")
    width = len(rows[0])
    if any(len(row) != width for row in rows):
        raise ValueError(f"{path}: rows have unequal lengths")
    return np.array(rows, dtype=float)


def write_instances_csv(path: str | Path, instances: Iterable[InstanceResult]) -> None:
    lines = [INSTANCE_HEADER]
    for inst in instances:
        lines.append(
            ",".join(
                [
                    str(inst.num_radii),
                    str(inst.num_blocks),
                    str(inst.repetition),
                    str(inst.seed),
                    format_float(inst.error),
                    format_float(inst.misfit),
                    format_float(inst.ratio),
                    format_float(inst.total),
                    format_float(inst.penalty),
                    str(inst.iterations),
                    inst.status,
                ]
            )
        )
    Path(path).write_text("\n".join(lines) + "\n")


def read_instances_csv(path: str | Path) -> list[InstanceResult]:
    """Read a per-instance result CSV back into records.

    Raises
    ------
    ValueError
        If the header or any row does not match the fixed layout.
    """
    lines = Path(path).read_text().splitlines()
    if not lines or lines[0] != INSTANCE_HEADER:
        raise ValueError(f"{path}: missing result header {INSTANCE_HEADER!r}")
    records: list[InstanceResult] = []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        cells = line.split(",")
        if len(cells) != 11:
            raise ValueError(f"{path}:{lineno}: expected 11 columns, got {len(cells)}")
        records.append(
            InstanceResult(
                num_radii=int(cells[0]),
                num_blocks=int(cells[1]),
                repetition=int(cells[2]),
                seed=int(cells[3]),
                error=float(cells[4]),
                misfit=float(cells[5]),
                ratio=float(cells[6]),
                total=float(cells[7]),
                penalty=float(cells[8]),
                iterations=int(cells[9]),
                status=cells[10],
            )
        )
    return records


def write_cells_csv(path: str | Path, cells: Iterable[CellResult]) -> None:
    lines = [CELL_HEADER]
    for cell in cells:
        lines.append(
            ",".join(
                [
                    str(cell.num_radii),
                    str(cell.num_blocks),
                    "1" if cell.skipped else "0",
                    str(len(cell.instances)),
                    str(cell.failures),
                    format_float(cell.max_error),
                    format_float(cell.max_ratio),
                ]
            )
        )
    Path(path).write_text("\n".join(lines) + "\n")


def write_probe_csv(path: str | Path, rows: Iterable[ProbeRow]) -> None:
    lines = [PROBE_HEADER]
    for row in rows:
        lines.append(
            ",".join(
                [
                    str(row.num_radii),
                    format_float(row.sigma_min),
                    format_float(row.sigma_max),
                    format_float(row.cond),
                ]
            )
        )
    Path(path).write_text("\n".join(lines) + "\n")


def write_regression_csv(path: str | Path, regression: RegressionResult | None) -> None:
    lines = [REGRESSION_HEADER]
    if regression is not None:
        lines.append(
            ",".join(
                format_float(v)
                for v in (
                    regression.slope,
                    regression.intercept,
                    regression.r_squared,
                    regression.p_value,
                )
            )
        )
    Path(path).write_text("\n".join(lines) + "\n")


def write_xy_csv(path: str | Path, xs: Sequence[float], ys: Sequence[float]) -> None:
    if len(xs) != len(ys):
        raise ValueError(f"x and y lengths differ: {len(xs)} vs {len(ys)}")
    lines = ["x,y"]
    lines.extend(
        f"{format_float(x)},{format_float(y)}" for x, y in zip(xs, ys)
    )
    Path(path).write_text("\n".join(lines) + "\n")


@dataclass(frozen=True, eq=False)
class LoadedProblem:
    """A problem file resolved into live objects."""

    topology: SpiderTopology
    partition: EdgePartition
    problem: InverseProblem
    true_conductance: np.ndarray | None


def problem_to_document(
    num_radii: int,
    partition: EdgePartition,
    *,
    response: np.ndarray | str | None,
    conductance: np.ndarray | None = None,
    mu: float = 1.0,
    tol: float = 1e-8,
    max_iter: int = 500,
    formulation: str = REDUCED,
    seed: int = 0,
) -> dict:
    """Build the JSON document for one problem.

    ``response`` may be an inline matrix or a path string relative to the
    eventual file location.
    """
    if isinstance(response, str):
        response_field: object = response
    elif response is not None:
        response_field = [
            [float(v) for v in row] for row in np.asarray(response, dtype=float)
        ]
    else:
        raise ValueError("a response matrix (inline or path) is required")
    document = {
        "version": SCHEMA_VERSION,
        "m": int(num_radii),
        "partition": {
            "s": int(partition.num_blocks),
            "block_of": [int(b) for b in partition.block_of],
        },
        "response_matrix": response_field,
        "mu": float(mu),
        "solver": {
            "tol": float(tol),
            "max_iter": int(max_iter),
            "formulation": formulation,
        },
        "seed": int(seed),
    }
    if conductance is not None:
        document["conductance"] = [float(v) for v in np.asarray(conductance)]
    return document


def write_problem_json(path: str | Path, document: dict) -> None:
    Path(path).write_text(json.dumps(document, indent=2, sort_keys=True) + "\n")


def _require(condition: bool, path: str | Path, message: str) -> None:
    if not condition:
        raise ValueError(f"{path}: {message}")


def load_problem(path: str | Path) -> LoadedProblem:
    """Read and validate a problem JSON file.

    Relative response paths resolve against the directory containing the
    problem file.

    Raises
    ------
    ValueError
        On schema violations: wrong version, malformed partition, length
        mismatches, unknown formulation, or a bad response matrix.
    """
    path = Path(path)
    try:
        document = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ValueError(f"{path}: not valid JSON: {exc}") from exc
    _require(isinstance(document, dict), path, "top level must be an object")
    version = document.get("version")
    _require(
        version == SCHEMA_VERSION,
        path,
        f"unsupported schema version {version!r} (expected {SCHEMA_VERSION})",
    )
    _require("m" in document, path, "missing field 'm'")
    topology = build_spider(int(document["m"]))

    part_doc = document.get("partition")
    _require(
        isinstance(part_doc, dict) and "s" in part_doc and "block_of" in part_doc,
        path,
        "partition must be an object with fields 's' and 'block_of'",
    )
    labels = np.asarray(part_doc["block_of"], dtype=np.int64)
    _require(
        labels.size == topology.num_edges,
        path,
        f"partition labels {labels.size} edges but the topology has "
        f"{topology.num_edges}",
    )
    try:
        partition = EdgePartition(int(part_doc["s"]), labels)
    except ValueError as exc:
        raise ValueError(f"{path}: {exc}") from exc

    response_field = document.get("response_matrix")
    _require(response_field is not None, path, "missing field 'response_matrix'")
    if isinstance(response_field, str):
        response = read_matrix_csv(path.parent / response_field)
    else:
        response = np.asarray(response_field, dtype=float)
    m = topology.num_boundary
    _require(
        response.shape == (m, m),
        path,
        f"response matrix must be {m}x{m}, got {response.shape}",
    )

    solver_doc = document.get("solver", {})
    _require(isinstance(solver_doc, dict), path, "solver must be an object")
    formulation = solver_doc.get("formulation", REDUCED)
    _require(
        formulation in (REDUCED, FULL_SPACE),
        path,
        f"unknown formulation {formulation!r}",
    )

    conductance = None
    if document.get("conductance") is not None:
        conductance = np.asarray(document["conductance"], dtype=float)
        _require(
            conductance.shape == (topology.num_edges,),
            path,
            f"conductance must have {topology.num_edges} entries, "
            f"got {conductance.shape}",
        )

    try:
        problem = InverseProblem(
            topology=topology,
            partition=partition,
            response_data=response,
            mu=float(document.get("mu", 1.0)),
            stationarity_tol=float(solver_doc.get("tol", 1e-8)),
            max_iterations=int(solver_doc.get("max_iter", 500)),
            formulation=formulation,
            seed=int(document.get("seed", 0)),
        )
    except ValueError as exc:
        raise ValueError(f"{path}: {exc}") from exc
    return LoadedProblem(
        topology=topology,
        partition=partition,
        problem=problem,
        true_conductance=conductance,
    )
