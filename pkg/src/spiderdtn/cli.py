"""Command-line interface.

Subcommands::

    forward   evaluate the boundary response of a given conductance
    recover   solve one inverse problem described by a problem JSON file
    sweep     random-instance recovery sweep over network sizes and blocks
    ratio     stability-ratio experiment over block counts on one size
    probe     conditioning probe of the linearized problem

Exit codes: 0 on success, 2 on usage or input errors, 3 when the recover
solver does not converge (outputs are still written).
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path

import numpy as np

from . import fileio, svgplot
from ._kernels import BACKEND
from .experiments import (
    SweepConfig,
    run_illposedness_probe,
    run_ratio_vs_s,
    run_recovery_sweep,
)
from .forward import response_from_conductance
from .inverse import FULL_SPACE, REDUCED, solve
from .topology import build_spider


def _parse_int_list(text: str) -> tuple[int, ...]:
    try:
        values = tuple(int(part) for part in text.split(",") if part.strip())
    except ValueError as exc:
        raise ValueError(f"expected a comma-separated integer list, got {text!r}") from exc
    if not values:
        raise ValueError(f"expected a comma-separated integer list, got {text!r}")
    return values


def _parse_conductance(spec_text: str, num_edges: int) -> np.ndarray:
    """Conductance from 'const:VALUE' or a CSV path holding one row or one
    column per edge."""
    if spec_text.startswith("const:"):
        value = float(spec_text[len("const:") :])
        return np.full(num_edges, value)
    matrix = fileio.read_matrix_csv(spec_text)
    vector = matrix.ravel()
    if matrix.ndim == 2 and 1 not in matrix.shape and matrix.size != num_edges:
        raise ValueError(
            f"{spec_text}: expected a vector of {num_edges} conductances, "
            f"got shape {matrix.shape}"
        )
    if vector.size != num_edges:
        raise ValueError(
            f"{spec_text}: expected {num_edges} conductances, got {vector.size}"
        )
    return vector


def _sweep_config(
    args: argparse.Namespace, defaults: SweepConfig, axes: bool
) -> SweepConfig:
    """Resolve a SweepConfig from (lowest to highest precedence) built-in
    defaults, a --config JSON file, and explicit flags. ``axes`` controls
    whether --m/--s feed the grid (the ratio command sets its own axes)."""
    values = dataclasses.asdict(defaults)
    if args.config is not None:
        try:
            loaded = json.loads(Path(args.config).read_text())
        except json.JSONDecodeError as exc:
            raise ValueError(f"{args.config}: not valid JSON: {exc}") from exc
        if not isinstance(loaded, dict):
            raise ValueError(f"{args.config}: top level must be an object")
        unknown = set(loaded) - set(values)
        if unknown:
            raise ValueError(
                f"{args.config}: unknown config keys {sorted(unknown)}"
            )
        values.update(loaded)
    flag_map = {
        "repetitions": "reps",
        "low": "low",
        "high": "high",
        "mu": "mu",
        "root_seed": "seed",
        "stationarity_tol": "tol",
        "max_iterations": "max_iter",
        "formulation": "formulation",
        "threads": "threads",
    }
    if axes:
        flag_map["radii"] = "m"
        flag_map["blocks"] = "s"
    for field, flag in flag_map.items():
        flag_value = getattr(args, flag, None)
        if flag_value is not None:
            values[field] = flag_value
    values["radii"] = tuple(values["radii"])
    values["blocks"] = tuple(values["blocks"])
    return SweepConfig(**values)


def _write_config(out_dir: Path, config: SweepConfig) -> None:
    (out_dir / "config.json").write_text(
        json.dumps(dataclasses.asdict(config), indent=2, sort_keys=True) + "\n"
    )


def cmd_forward(args: argparse.Namespace) -> int:
    topology = build_spider(args.m)
    conductance = _parse_conductance(args.conductance, topology.num_edges)
    response = response_from_conductance(topology, conductance)
    if args.out is None:
        for row in response:
            print(",".join(fileio.format_float(v) for v in row))
    else:
        fileio.write_matrix_csv(args.out, response)
    return 0


def cmd_recover(args: argparse.Namespace) -> int:
    loaded = fileio.load_problem(args.problem)
    problem = loaded.problem
    overrides = {}
    if args.formulation is not None:
        overrides["formulation"] = args.formulation
    if args.mu is not None:
        overrides["mu"] = args.mu
    if args.tol is not None:
        overrides["stationarity_tol"] = args.tol
    if args.max_iter is not None:
        overrides["max_iterations"] = args.max_iter
    if overrides:
        problem = dataclasses.replace(problem, **overrides)

    result = solve(problem, true_conductance=loaded.true_conductance)

    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    fileio.write_matrix_csv(out_dir / "conductance.csv", result.conductance)
    fileio.write_matrix_csv(out_dir / "block_values.csv", result.block_values)
    fileio.write_matrix_csv(out_dir / "response.csv", result.response)
    error = None
    if loaded.true_conductance is not None:
        error = float(
            np.linalg.norm(result.conductance - loaded.true_conductance)
        )
    summary = {
        "status": result.status,
        "iterations": result.iterations,
        "formulation": problem.formulation,
        "objective": {
            "misfit": result.objective.misfit,
            "penalty": result.objective.penalty,
            "mu": result.objective.mu,
            "total": result.objective.total,
        },
        "gradient_norm": result.gradient_norm,
        "constraint_violation": result.constraint_violation,
        "clamped_edges": result.clamped_edges,
        "ratio": result.ratio,
        "error": error,
        "block_values": [float(v) for v in result.block_values],
    }
    (out_dir / "summary.json").write_text(
        json.dumps(summary, indent=2, sort_keys=True) + "\n"
    )
    print(f"status: {result.status}  total: {fileio.format_float(result.objective.total)}")
    return 0 if result.converged else 3


def cmd_sweep(args: argparse.Namespace) -> int:
    config = _sweep_config(args, SweepConfig(), axes=True)
    cells = run_recovery_sweep(config)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    _write_config(out_dir, config)
    instances = [inst for cell in cells for inst in cell.instances]
    fileio.write_instances_csv(out_dir / "instances.csv", instances)
    fileio.write_cells_csv(out_dir / "cells.csv", cells)
    series = []
    for num_radii in config.radii:
        xs = [
            cell.num_blocks
            for cell in cells
            if cell.num_radii == num_radii and not cell.skipped
        ]
        ys = [
            cell.max_error
            for cell in cells
            if cell.num_radii == num_radii and not cell.skipped
        ]
        series.append(
            svgplot.Series(label=f"{num_radii} radii", x=xs, y=ys, mode="line")
        )
    try:
        svgplot.render_plot(
            out_dir / "max_error.svg",
            series,
            title="Worst recovery error by block count",
            x_label="blocks",
            y_label="max error",
            log_y=True,
        )
    except ValueError:
        pass  # all errors were exactly zero; nothing to draw on a log axis
    failures = sum(cell.failures for cell in cells)
    print(
        f"{len(instances)} instances across {len(cells)} cells; "
        f"{failures} not converged"
    )
    return 0


def cmd_ratio(args: argparse.Namespace) -> int:
    config = _sweep_config(args, SweepConfig(repetitions=10), axes=False)
    experiment = run_ratio_vs_s(args.m, args.s_max, config)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    _write_config(out_dir, dataclasses.replace(
        config, radii=(args.m,), blocks=tuple(range(1, args.s_max + 1))
    ))
    instances = [inst for cell in experiment.cells for inst in cell.instances]
    fileio.write_instances_csv(out_dir / "instances.csv", instances)
    fileio.write_cells_csv(out_dir / "cells.csv", experiment.cells)
    fileio.write_regression_csv(out_dir / "regression.csv", experiment.regression)

    finite = [
        (inst.num_blocks, inst.ratio)
        for inst in instances
        if np.isfinite(inst.ratio)
    ]
    series = [
        svgplot.Series(
            label="instance ratios",
            x=[p[0] for p in finite],
            y=[p[1] for p in finite],
            mode="points",
        )
    ]
    cells_finite = [
        cell for cell in experiment.cells if np.isfinite(cell.max_ratio)
    ]
    series.append(
        svgplot.Series(
            label="per-block max",
            x=[c.num_blocks for c in cells_finite],
            y=[c.max_ratio for c in cells_finite],
            mode="line",
        )
    )
    if experiment.regression is not None:
        xs = [1.0, float(args.s_max)]
        reg = experiment.regression
        series.append(
            svgplot.Series(
                label="log-linear fit",
                x=xs,
                y=[10.0 ** (reg.intercept + reg.slope * x) for x in xs],
                mode="line",
            )
        )
    try:
        svgplot.render_plot(
            out_dir / "ratio.svg",
            series,
            title="Stability ratio growth with block count",
            x_label="blocks",
            y_label="ratio",
            log_y=True,
        )
    except ValueError:
        pass
    if experiment.regression is None:
        print("regression: not enough finite points")
    else:
        reg = experiment.regression
        print(
            f"slope {fileio.format_float(reg.slope)}  "
            f"r_squared {fileio.format_float(reg.r_squared)}  "
            f"p_value {fileio.format_float(reg.p_value)}"
        )
    return 0


def cmd_probe(args: argparse.Namespace) -> int:
    rows = run_illposedness_probe(tuple(args.m))
    print("m,sigma_min,sigma_max,cond")
    for row in rows:
        print(
            f"{row.num_radii},{fileio.format_float(row.sigma_min)},"
            f"{fileio.format_float(row.sigma_max)},{fileio.format_float(row.cond)}"
        )
    if args.out_dir is not None:
        out_dir = Path(args.out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        fileio.write_probe_csv(out_dir / "probe.csv", rows)
        svgplot.render_plot(
            out_dir / "cond.svg",
            [
                svgplot.Series(
                    label="condition number",
                    x=[r.num_radii for r in rows],
                    y=[r.cond for r in rows],
                    mode="line",
                )
            ],
            title="Conditioning of the linearized problem",
            x_label="radii",
            y_label="cond",
            log_y=True,
        )
    return 0


def _add_sweep_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--reps", type=int, default=None, help="repetitions per cell")
    parser.add_argument("--low", type=float, default=None, help="lower conductance bound")
    parser.add_argument("--high", type=float, default=None, help="upper conductance bound")
    parser.add_argument("--mu", type=float, default=None, help="penalty weight")
    parser.add_argument("--seed", type=int, default=None, help="root seed")
    parser.add_argument("--tol", type=float, default=None, help="stationarity tolerance")
    parser.add_argument("--max-iter", type=int, default=None, help="iteration cap")
    parser.add_argument(
        "--formulation",
        choices=(REDUCED, FULL_SPACE),
        default=None,
        help="solver formulation",
    )
    parser.add_argument("--threads", type=int, default=None, help="parallel instance workers")
    parser.add_argument("--config", default=None, help="JSON file with config fields")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="spiderdtn",
        description="Forward and inverse conductance problems on spider networks "
        f"(kernel backend: {BACKEND})",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_forward = sub.add_parser(
        "forward", help="boundary response of a conductance vector"
    )
    p_forward.add_argument("--m", type=int, required=True, help="radius count")
    p_forward.add_argument(
        "--conductance",
        required=True,
        help="'const:VALUE' or a CSV path with one value per edge",
    )
    p_forward.add_argument("--out", default=None, help="output CSV (default: stdout)")
    p_forward.set_defaults(handler=cmd_forward)

    p_recover = sub.add_parser("recover", help="solve one problem file")
    p_recover.add_argument("--problem", required=True, help="problem JSON path")
    p_recover.add_argument("--out-dir", required=True, help="output directory")
    p_recover.add_argument(
        "--formulation", choices=(REDUCED, FULL_SPACE), default=None
    )
    p_recover.add_argument("--mu", type=float, default=None)
    p_recover.add_argument("--tol", type=float, default=None)
    p_recover.add_argument("--max-iter", type=int, default=None)
    p_recover.set_defaults(handler=cmd_recover)

    p_sweep = sub.add_parser("sweep", help="recovery sweep over sizes and blocks")
    p_sweep.add_argument(
        "--m", type=_parse_int_list, default=None, help="radius counts, e.g. 7,11"
    )
    p_sweep.add_argument(
        "--s", type=_parse_int_list, default=None, help="block counts, e.g. 1,2,3,5"
    )
    p_sweep.add_argument("--out-dir", required=True)
    _add_sweep_flags(p_sweep)
    p_sweep.set_defaults(handler=cmd_sweep)

    p_ratio = sub.add_parser("ratio", help="stability ratios against block count")
    p_ratio.add_argument("--m", type=int, required=True, help="radius count")
    p_ratio.add_argument(
        "--s-max", type=int, required=True, help="largest block count"
    )
    p_ratio.add_argument("--out-dir", required=True)
    _add_sweep_flags(p_ratio)
    p_ratio.set_defaults(handler=cmd_ratio)

    p_probe = sub.add_parser("probe", help="conditioning probe")
    p_probe.add_argument(
        "--m", type=_parse_int_list, required=True, help="radius counts, e.g. 7,11,15"
    )
    p_probe.add_argument("--out-dir", default=None)
    p_probe.set_defaults(handler=cmd_probe)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.handler(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
