"""Reproducible recovery experiments.

The harness sweeps network size and partition block count, generating random
piecewise-constant instances, recovering each from its exact response, and
recording stability metrics. Every instance seed derives from one root seed
through fixed tokens, so any cell, repetition, or whole sweep can be re-run
bit for bit in isolation.
"""

from __future__ import annotations

import dataclasses
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.stats import linregress

from .forward import conditioning_probe, response_from_conductance
from .inverse import REDUCED, FULL_SPACE, InverseProblem, solve
from .seeding import derive_seed
from .topology import build_spider, random_partition, sample_pc_conductance


@dataclass(frozen=True)
class SweepConfig:
    """Sweep axes and shared solver settings.

    ``radii`` and ``blocks`` span the grid; infeasible cells (more blocks
    than edges) are skipped and recorded as such rather than erroring.
    ``threads`` only parallelizes independent instances; results are
    identical for any thread count.
    """

    radii: tuple[int, ...] = (7, 11)
    blocks: tuple[int, ...] = (1, 2, 3, 5)
    repetitions: int = 3
    low: float = 1.0
    high: float = 100.0
    mu: float = 1.0
    root_seed: int = 0
    stationarity_tol: float = 1e-8
    max_iterations: int = 500
    formulation: str = REDUCED
    threads: int = 1

    def __post_init__(self) -> None:
        if not self.radii:
            raise ValueError("at least one radius count is required")
        if not self.blocks:
            raise ValueError("at least one block count is required")
        if self.repetitions < 1:
            raise ValueError(f"repetitions must be >= 1, got {self.repetitions}")
        if not (0.0 < self.low <= self.high):
            raise ValueError(
                f"conductance interval must satisfy 0 < low <= high, "
                f"got [{self.low}, {self.high}]"
            )
        if self.threads < 1:
            raise ValueError(f"threads must be >= 1, got {self.threads}")
        if self.formulation not in (REDUCED, FULL_SPACE):
            raise ValueError(f"unknown formulation {self.formulation!r}")


@dataclass(frozen=True)
class InstanceResult:
    """Metrics of one generated-and-recovered instance."""

    num_radii: int
    num_blocks: int
    repetition: int
    seed: int
    error: float
    misfit: float
    ratio: float
    total: float
    penalty: float
    iterations: int
    status: str

    @property
    def converged(self) -> bool:
        return self.status in ("converged", "converged-stagnant")


@dataclass(frozen=True, eq=False)
class CellResult:
    """All repetitions of one (radii, blocks) grid cell."""

    num_radii: int
    num_blocks: int
    skipped: bool
    instances: tuple[InstanceResult, ...]

    @property
    def failures(self) -> int:
        return sum(1 for inst in self.instances if not inst.converged)

    @property
    def max_error(self) -> float:
        """Largest error over converged instances; a non-converged iterate
        is not a recovery, so it carries no stability information."""
        values = [
            i.error
            for i in self.instances
            if i.converged and np.isfinite(i.error)
        ]
        return max(values) if values else float("nan")

    @property
    def max_ratio(self) -> float:
        """Largest finite ratio over converged instances; NaN sentinels are
        skipped, and a cell with no usable ratio reports NaN."""
        values = [
            i.ratio
            for i in self.instances
            if i.converged and np.isfinite(i.ratio)
        ]
        return max(values) if values else float("nan")


@dataclass(frozen=True)
class RegressionResult:
    """Ordinary least-squares line fit summary."""

    slope: float
    intercept: float
    r_squared: float
    p_value: float


@dataclass(frozen=True, eq=False)
class RatioExperiment:
    """Ratio-versus-block-count experiment: per-block-count cells and the
    regression of log10(max ratio) on block count (None when fewer than
    three cells had finite ratios)."""

    num_radii: int
    cells: tuple[CellResult, ...]
    regression: RegressionResult | None


def instance_seed(root_seed: int, num_radii: int, num_blocks: int, repetition: int) -> int:
    """Seed of one sweep instance; fixed derivation shared by all runners."""
    return derive_seed(root_seed, num_radii, num_blocks, repetition)


def run_instance(
    num_radii: int, num_blocks: int, repetition: int, config: SweepConfig
) -> InstanceResult:
    """Generate and recover one random instance.

    The instance seed splits into independent partition and value seeds, so
    changing the sampled interval never shifts the partition draw.
    """
    seed = instance_seed(config.root_seed, num_radii, num_blocks, repetition)
    topology = build_spider(num_radii)
    partition = random_partition(
        topology, num_blocks, derive_seed(seed, "partition")
    )
    conductance, _ = sample_pc_conductance(
        partition, config.low, config.high, derive_seed(seed, "values")
    )
    data = response_from_conductance(topology, conductance)
    problem = InverseProblem(
        topology=topology,
        partition=partition,
        response_data=data,
        mu=config.mu,
        stationarity_tol=config.stationarity_tol,
        max_iterations=config.max_iterations,
        formulation=config.formulation,
        seed=seed,
    )
    result = solve(problem, true_conductance=conductance)
    error = float(np.linalg.norm(result.conductance - conductance))
    return InstanceResult(
        num_radii=num_radii,
        num_blocks=num_blocks,
        repetition=repetition,
        seed=seed,
        error=error,
        misfit=result.objective.misfit,
        ratio=float("nan") if result.ratio is None else float(result.ratio),
        total=result.objective.total,
        penalty=result.objective.penalty,
        iterations=result.iterations,
        status=result.status,
    )


def run_recovery_sweep(config: SweepConfig) -> tuple[CellResult, ...]:
    """Run the whole grid, cells in declared order, repetitions in order.

    Infeasible cells (block count above the edge count of that topology) are
    returned with ``skipped=True`` and no instances.
    """
    cells: list[CellResult] = []
    jobs: list[tuple[int, int, int]] = []
    feasible: dict[tuple[int, int], bool] = {}
    for num_radii in config.radii:
        num_edges = build_spider(num_radii).num_edges
        for num_blocks in config.blocks:
            ok = 1 <= num_blocks <= num_edges
            feasible[(num_radii, num_blocks)] = ok
            if ok:
                jobs.extend(
                    (num_radii, num_blocks, rep)
                    for rep in range(config.repetitions)
                )

    if config.threads > 1:
        with ThreadPoolExecutor(max_workers=config.threads) as pool:
            results = list(
                pool.map(lambda job: run_instance(*job, config), jobs)
            )
    else:
        results = [run_instance(*job, config) for job in jobs]

    by_cell: dict[tuple[int, int], list[InstanceResult]] = {}
    for inst in results:
        by_cell.setdefault((inst.num_radii, inst.num_blocks), []).append(inst)

    for num_radii in config.radii:
        for num_blocks in config.blocks:
            key = (num_radii, num_blocks)
            if not feasible[key]:
                cells.append(
                    CellResult(
                        num_radii=num_radii,
                        num_blocks=num_blocks,
                        skipped=True,
                        instances=(),
                    )
                )
            else:
                cells.append(
                    CellResult(
                        num_radii=num_radii,
                        num_blocks=num_blocks,
                        skipped=False,
                        instances=tuple(by_cell.get(key, [])),
                    )
                )
    return tuple(cells)


def run_ratio_vs_s(
    num_radii: int, max_blocks: int, config: SweepConfig
) -> RatioExperiment:
    """Sweep block counts 1..max_blocks on one topology and regress
    log10 of the per-cell max ratio on the block count.

    Raises
    ------
    ValueError
        If ``max_blocks`` exceeds the edge count of the topology.
    """
    num_edges = build_spider(num_radii).num_edges
    if not 1 <= max_blocks <= num_edges:
        raise ValueError(
            f"max block count must lie in 1..{num_edges} for {num_radii} radii, "
            f"got {max_blocks}"
        )
    sweep_config = dataclasses.replace(
        config, radii=(num_radii,), blocks=tuple(range(1, max_blocks + 1))
    )
    cells = run_recovery_sweep(sweep_config)
    xs = [
        float(cell.num_blocks) for cell in cells if np.isfinite(cell.max_ratio)
    ]
    ys = [
        float(np.log10(cell.max_ratio))
        for cell in cells
        if np.isfinite(cell.max_ratio)
    ]
    regression = None
    if len(xs) >= 3 and len(set(xs)) >= 2:
        regression = linear_fit(np.array(xs), np.array(ys))
    return RatioExperiment(num_radii=num_radii, cells=cells, regression=regression)


@dataclass(frozen=True)
class ProbeRow:
    """Conditioning probe of one topology size."""

    num_radii: int
    sigma_min: float
    sigma_max: float
    cond: float


def run_illposedness_probe(radii: tuple[int, ...]) -> tuple[ProbeRow, ...]:
    """Conditioning probe of the linearized problem for each radius count,
    in the given order."""
    rows = []
    for num_radii in radii:
        probe = conditioning_probe(num_radii)
        rows.append(
            ProbeRow(
                num_radii=num_radii,
                sigma_min=probe.sigma_min,
                sigma_max=probe.sigma_max,
                cond=probe.cond,
            )
        )
    return tuple(rows)


def linear_fit(x: np.ndarray, y: np.ndarray) -> RegressionResult:
    """Ordinary least-squares line through (x, y).

    Raises
    ------
    ValueError
        With fewer than three points, non-finite values, or zero variance
        in ``x``.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError(
            f"x and y must be one-dimensional and equally long, "
            f"got shapes {x.shape} and {y.shape}"
        )
    if x.size < 3:
        raise ValueError(f"at least 3 points are required, got {x.size}")
    if not (np.isfinite(x).all() and np.isfinite(y).all()):
        raise ValueError("regression inputs must be finite")
    if float(np.ptp(x)) == 0.0:
        raise ValueError("x values are all identical; slope is undefined")
    fit = linregress(x, y)
    return RegressionResult(
        slope=float(fit.slope),
        intercept=float(fit.intercept),
        r_squared=float(fit.rvalue) ** 2,
        p_value=float(fit.pvalue),
    )
