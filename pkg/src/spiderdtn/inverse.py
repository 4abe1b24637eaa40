"""Inverse conductance recovery from a measured boundary response.

The recovery minimizes a regularized misfit

    p(c) = || N(c) - N_data ||_F^2  +  mu * || c - mean_B(c) ||^2

over per-edge conductances ``c``, where ``mean_B(c)`` replaces each entry by
the mean of its partition block, so the penalty pulls the solution toward
piecewise-constant vectors without fixing the block values in advance.

Two formulations are provided. The reduced formulation (default) eliminates
the voltages through the forward map and runs a projected Levenberg-Marquardt
iteration on ``c`` alone. The full-space formulation keeps interior voltages
as unknowns tied to ``c`` by interior current-balance constraints and treats
those with an augmented Lagrangian, each inner subproblem being again a
bound-constrained least-squares solve. Both are kept because they reach the
same minimizers along different numerical routes, which makes gaming by one
path visible in the other.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from ._kernels import forward_core
from .forward import response_matrix_violations
from .nlls import (
    CONVERGED,
    CONVERGED_STAGNANT,
    FAILED,
    MAX_ITER,
    LeastSquaresResult,
    minimize_bounded,
)
from .topology import EdgePartition, SpiderTopology
from .warmstart import InitialGuess, initial_guess

REDUCED = "reduced"
FULL_SPACE = "full-space"

# Recovered entries below this are reported as exact zeros; values this small
# are artifacts of the lower bound, not conductances.
REPORT_ZERO_THRESHOLD = 1e-8

_OUTER_LIMIT = 25
_RHO_INITIAL = 10.0
_RHO_GROWTH = 10.0
_RHO_MAX = 1e12


@dataclass(frozen=True, eq=False)
class InverseProblem:
    """One recovery instance: network, partition, data, and solver knobs.

    ``seed`` is carried through to result records for provenance; the solve
    itself is deterministic.
    """

    topology: SpiderTopology
    partition: EdgePartition
    response_data: np.ndarray
    mu: float = 1.0
    conductance_floor: float = 1e-10
    stationarity_tol: float = 1e-8
    feasibility_tol: float = 1e-8
    max_iterations: int = 500
    formulation: str = REDUCED
    seed: int = 0

    def __post_init__(self) -> None:
        data = np.asarray(self.response_data, dtype=float)
        m = self.topology.num_boundary
        if data.shape != (m, m):
            raise ValueError(
                f"response data must be {m}x{m} for this topology, "
                f"got shape {data.shape}"
            )
        if self.partition.num_edges != self.topology.num_edges:
            raise ValueError(
                f"partition labels {self.partition.num_edges} edges but the "
                f"topology has {self.topology.num_edges}"
            )
        if not self.mu >= 0.0:
            raise ValueError(f"penalty weight must be nonnegative, got {self.mu}")
        if not self.conductance_floor > 0.0:
            raise ValueError(
                f"conductance floor must be positive, got {self.conductance_floor}"
            )
        for name in ("stationarity_tol", "feasibility_tol"):
            value = getattr(self, name)
            if not value > 0.0:
                raise ValueError(f"{name} must be positive, got {value}")
        if self.max_iterations < 1:
            raise ValueError(
                f"iteration cap must be at least 1, got {self.max_iterations}"
            )
        if self.formulation not in (REDUCED, FULL_SPACE):
            raise ValueError(
                f"formulation must be {REDUCED!r} or {FULL_SPACE!r}, "
                f"got {self.formulation!r}"
            )
        data = data.copy()
        data.setflags(write=False)
        object.__setattr__(self, "response_data", data)


@dataclass(frozen=True)
class ObjectiveBreakdown:
    """Misfit and penalty parts of the objective; ``total`` is always
    ``misfit + mu * penalty`` of the stored fields."""

    misfit: float
    penalty: float
    mu: float
    total: float = field(init=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "total", self.misfit + self.mu * self.penalty)


@dataclass(frozen=True, eq=False)
class RecoveryResult:
    """Solver output.

    ``conductance`` is the recovered per-edge vector with entries below the
    reporting threshold zeroed (``clamped_edges`` counts them).
    ``response`` is the boundary response at the solver iterate: for the
    reduced formulation the exact forward response of the recovered vector,
    for the full-space formulation the boundary rows implied by the final
    voltage variables. ``ratio`` is the recovered-versus-true sensitivity
    ratio when ground truth was supplied, else None.
    ``objective_history`` is the accepted-objective sequence of the (final)
    inner least-squares run, non-increasing within that run.
    """

    conductance: np.ndarray
    block_values: np.ndarray
    response: np.ndarray
    objective: ObjectiveBreakdown
    iterations: int
    status: str
    gradient_norm: float
    constraint_violation: float
    clamped_edges: int
    ratio: float | None
    objective_history: tuple[float, ...]

    @property
    def converged(self) -> bool:
        return self.status in (CONVERGED, CONVERGED_STAGNANT)


def block_means(conductance: np.ndarray, partition: EdgePartition) -> np.ndarray:
    """Mean conductance per partition block, index 0 holding block 1."""
    conductance = np.asarray(conductance, dtype=float)
    if conductance.shape != (partition.num_edges,):
        raise ValueError(
            f"conductance must have {partition.num_edges} entries, "
            f"got shape {conductance.shape}"
        )
    labels0 = partition.block_of - 1
    sums = np.bincount(labels0, weights=conductance, minlength=partition.num_blocks)
    return sums / partition.sizes()


def _mean_expansion(conductance: np.ndarray, partition: EdgePartition) -> np.ndarray:
    """Each entry replaced by its block mean."""
    return block_means(conductance, partition)[partition.block_of - 1]


def _mean_complement(partition: EdgePartition) -> np.ndarray:
    """Dense matrix of (identity minus block-mean projector)."""
    num_edges = partition.num_edges
    matrix = np.eye(num_edges)
    for block in range(1, partition.num_blocks + 1):
        members = partition.members(block)
        matrix[np.ix_(members, members)] -= 1.0 / members.size
    return matrix


def reduced_objective(
    topology: SpiderTopology,
    partition: EdgePartition,
    conductance: np.ndarray,
    response_data: np.ndarray,
    mu: float,
) -> ObjectiveBreakdown:
    """Objective value with voltages eliminated through the forward map."""
    conductance = np.asarray(conductance, dtype=float)
    response, _, _ = forward_core(
        topology.num_boundary,
        topology.num_vertices,
        topology.tails,
        topology.heads,
        np.ascontiguousarray(conductance),
        False,
    )
    misfit = float(np.sum((response - response_data) ** 2))
    deviation = conductance - _mean_expansion(conductance, partition)
    return ObjectiveBreakdown(
        misfit=misfit, penalty=float(deviation @ deviation), mu=mu
    )


def full_objective(
    topology: SpiderTopology,
    partition: EdgePartition,
    conductance: np.ndarray,
    voltages: np.ndarray,
    response_data: np.ndarray,
    mu: float,
) -> tuple[ObjectiveBreakdown, np.ndarray]:
    """Objective and constraint residuals with voltages as free variables.

    ``voltages`` is the full (num_vertices, m) table whose boundary rows must
    be the identity. Returns the breakdown evaluated on the voltage-implied
    boundary response, plus the interior current-balance residuals, one row
    per interior vertex and one column per boundary datum. At a feasible
    point (zero residuals) this agrees with :func:`reduced_objective`.
    """
    m = topology.num_boundary
    n = topology.num_vertices
    voltages = np.asarray(voltages, dtype=float)
    if voltages.shape != (n, m):
        raise ValueError(
            f"voltage table must be {n}x{m}, got shape {voltages.shape}"
        )
    if not np.array_equal(voltages[:m], np.eye(m)):
        raise ValueError("boundary rows of the voltage table must be the identity")
    conductance = np.asarray(conductance, dtype=float)
    if conductance.shape != (topology.num_edges,):
        raise ValueError(
            f"conductance must have {topology.num_edges} entries, "
            f"got shape {conductance.shape}"
        )
    laplacian = _laplacian_dense(topology, conductance)
    currents = laplacian @ voltages
    implied = currents[:m]
    misfit = float(np.sum((implied - response_data) ** 2))
    deviation = conductance - _mean_expansion(conductance, partition)
    breakdown = ObjectiveBreakdown(
        misfit=misfit, penalty=float(deviation @ deviation), mu=mu
    )
    return breakdown, currents[m:]


def objective_gradient(
    topology: SpiderTopology,
    partition: EdgePartition,
    conductance: np.ndarray,
    response_data: np.ndarray,
    mu: float,
) -> np.ndarray:
    """Gradient of the reduced objective with respect to the conductances."""
    fun = _reduced_fun(topology, partition, response_data, mu)
    residuals, jacobian = fun(np.ascontiguousarray(conductance, dtype=float))
    return 2.0 * (jacobian.T @ residuals)


def lipschitz_ratio(
    recovered_conductance: np.ndarray,
    true_conductance: np.ndarray,
    recovered_response: np.ndarray,
    data_response: np.ndarray,
) -> float:
    """Conductance change per unit response change between two solutions.

    Returns NaN when the response difference underflows (the two responses
    are numerically identical), so that aggregates can skip such pairs
    explicitly instead of dividing by zero.
    """
    num = float(
        np.linalg.norm(
            np.asarray(recovered_conductance, float)
            - np.asarray(true_conductance, float)
        )
    )
    den = float(
        np.linalg.norm(
            np.asarray(recovered_response, float) - np.asarray(data_response, float)
        )
    )
    if den < 1e-300:
        return float("nan")
    return num / den


def _laplacian_dense(topology: SpiderTopology, weights: np.ndarray) -> np.ndarray:
    """Weighted Laplacian without the positivity check; the full-space
    iteration legitimately evaluates at the lower bound."""
    n = topology.num_vertices
    tails, heads = topology.tails, topology.heads
    matrix = np.zeros((n, n))
    matrix[tails, heads] -= weights
    matrix[heads, tails] -= weights
    diag = np.zeros(n)
    np.add.at(diag, tails, weights)
    np.add.at(diag, heads, weights)
    matrix[np.arange(n), np.arange(n)] = diag
    return matrix


def _reduced_fun(
    topology: SpiderTopology,
    partition: EdgePartition,
    response_data: np.ndarray,
    mu: float,
) -> Callable[[np.ndarray], tuple[np.ndarray, np.ndarray]]:
    m = topology.num_boundary
    n = topology.num_vertices
    tails, heads = topology.tails, topology.heads
    labels0 = partition.block_of - 1
    counts = partition.sizes().astype(float)
    sqmu = float(np.sqrt(mu))
    penalty_jac = sqmu * _mean_complement(partition)

    def fun(conductance: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        response, _, diffs = forward_core(
            m, n, tails, heads, np.ascontiguousarray(conductance), True
        )
        misfit_res = (response - response_data).ravel()
        means = (
            np.bincount(labels0, weights=conductance, minlength=counts.size)
            / counts
        )
        penalty_res = sqmu * (conductance - means[labels0])
        # Misfit row (s, t) differentiates to the product of edge drops.
        misfit_jac = (
            (diffs[:, :, None] * diffs[:, None, :])
            .transpose(1, 2, 0)
            .reshape(m * m, topology.num_edges)
        )
        return (
            np.concatenate([misfit_res, penalty_res]),
            np.vstack([misfit_jac, penalty_jac]),
        )

    return fun


def _fullspace_fun(
    topology: SpiderTopology,
    partition: EdgePartition,
    response_data: np.ndarray,
    mu: float,
    rho: float,
    multipliers: np.ndarray,
) -> Callable[[np.ndarray], tuple[np.ndarray, np.ndarray]]:
    """Augmented-Lagrangian inner residuals over x = [conductances,
    interior voltages (column-major)].

    Row blocks: boundary misfit (column-major, m*m rows), block-mean penalty
    (num_edges rows), scaled constraints (num_interior * m rows).
    """
    m = topology.num_boundary
    n = topology.num_vertices
    ni = n - m
    num_edges = topology.num_edges
    tails, heads = topology.tails, topology.heads
    labels0 = partition.block_of - 1
    counts = partition.sizes().astype(float)
    sqmu = float(np.sqrt(mu))
    sqrho = float(np.sqrt(rho / 2.0))
    penalty_jac = sqmu * _mean_complement(partition)
    num_rows = m * m + num_edges + ni * m
    num_cols = num_edges + ni * m
    eye_m = np.eye(m)
    t_range = np.arange(m)

    def fun(x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        conductance = x[:num_edges]
        interior_v = x[num_edges:].reshape((ni, m), order="F")
        voltages = np.vstack([eye_m, interior_v])
        laplacian = _laplacian_dense(topology, conductance)
        currents = laplacian @ voltages

        misfit_res = (currents[:m] - response_data).ravel(order="F")
        means = (
            np.bincount(labels0, weights=conductance, minlength=counts.size)
            / counts
        )
        penalty_res = sqmu * (conductance - means[labels0])
        constraints = currents[m:].ravel(order="F")
        shifted = sqrho * (constraints + multipliers / rho)
        residuals = np.concatenate([misfit_res, penalty_res, shifted])

        jac = np.zeros((num_rows, num_cols))
        drops = voltages[tails] - voltages[heads]
        for e in range(num_edges):
            u, v = int(tails[e]), int(heads[e])
            drop = drops[e]
            if u < m:
                jac[u + m * t_range, e] += drop
            else:
                jac[m * m + num_edges + (u - m) + ni * t_range, e] += sqrho * drop
            if v < m:
                jac[v + m * t_range, e] -= drop
            else:
                jac[m * m + num_edges + (v - m) + ni * t_range, e] -= sqrho * drop
        jac[m * m : m * m + num_edges, :num_edges] = penalty_jac
        boundary_block = laplacian[:m, m:]
        interior_block = laplacian[m:, m:]
        for t in range(m):
            cols = slice(num_edges + t * ni, num_edges + (t + 1) * ni)
            jac[t * m : (t + 1) * m, cols] = boundary_block
            rows = slice(m * m + num_edges + t * ni, m * m + num_edges + (t + 1) * ni)
            jac[rows, cols] = sqrho * interior_block
        return residuals, jac

    return fun


def _solve_reduced(
    problem: InverseProblem, start: np.ndarray
) -> tuple[LeastSquaresResult, float]:
    fun = _reduced_fun(
        problem.topology, problem.partition, problem.response_data, problem.mu
    )
    result = minimize_bounded(
        fun,
        start,
        lower=problem.conductance_floor,
        gtol=problem.stationarity_tol,
        max_iterations=problem.max_iterations,
    )
    return result, 0.0


def _solve_fullspace(
    problem: InverseProblem, start: np.ndarray, voltages0: np.ndarray
) -> tuple[LeastSquaresResult, float, int]:
    topology = problem.topology
    m = topology.num_boundary
    ni = topology.num_interior
    num_edges = topology.num_edges
    x = np.concatenate([start, voltages0[m:].ravel(order="F")])
    lower = np.concatenate(
        [np.full(num_edges, problem.conductance_floor), np.full(ni * m, -np.inf)]
    )
    multipliers = np.zeros(ni * m)
    rho = _RHO_INITIAL
    feasibility = np.inf
    total_iterations = 0
    result = None
    for _ in range(_OUTER_LIMIT):
        fun = _fullspace_fun(
            topology,
            problem.partition,
            problem.response_data,
            problem.mu,
            rho,
            multipliers,
        )
        result = minimize_bounded(
            fun,
            x,
            lower=lower,
            gtol=problem.stationarity_tol,
            max_iterations=problem.max_iterations,
        )
        x = result.x
        total_iterations += result.iterations
        _, residuals = full_objective(
            topology,
            problem.partition,
            x[:num_edges],
            np.vstack([np.eye(m), x[num_edges:].reshape((ni, m), order="F")]),
            problem.response_data,
            problem.mu,
        )
        previous = feasibility
        feasibility = float(np.abs(residuals).max())
        if feasibility <= problem.feasibility_tol and result.status in (
            CONVERGED,
            CONVERGED_STAGNANT,
        ):
            break
        multipliers = multipliers + rho * residuals.ravel(order="F")
        if feasibility > 0.25 * previous:
            rho = min(rho * _RHO_GROWTH, _RHO_MAX)
    final = LeastSquaresResult(
        x=x,
        objective=result.objective,
        projected_gradient_norm=result.projected_gradient_norm,
        iterations=total_iterations,
        status=result.status,
        objective_history=result.objective_history,
    )
    return final, feasibility, num_edges


def solve(
    problem: InverseProblem,
    true_conductance: np.ndarray | None = None,
    initial: InitialGuess | None = None,
) -> RecoveryResult:
    """Recover a conductance vector from the measured boundary response.

    Parameters
    ----------
    problem:
        Instance description including formulation and tolerances.
    true_conductance:
        Optional ground truth; enables the ``ratio`` field of the result.
    initial:
        Starting point; the constant-fit warm start is computed when omitted.

    Notes
    -----
    Structural defects in the measured response (asymmetry, nonzero row
    sums) are reported as a RuntimeWarning rather than an error, since
    mildly inconsistent data is still worth fitting.
    """
    topology = problem.topology
    issues = response_matrix_violations(problem.response_data)
    if issues:
        warnings.warn(
            "measured response fails structural checks: " + "; ".join(issues),
            RuntimeWarning,
            stacklevel=2,
        )
    if initial is None:
        initial = initial_guess(problem.response_data, topology)
    start = np.full(
        topology.num_edges,
        max(float(initial.conductance), problem.conductance_floor),
    )

    if problem.formulation == REDUCED:
        engine_result, constraint_violation = _solve_reduced(problem, start)
        solver_c = engine_result.x
        response, _, _ = forward_core(
            topology.num_boundary,
            topology.num_vertices,
            topology.tails,
            topology.heads,
            np.ascontiguousarray(solver_c),
            False,
        )
        iterations = engine_result.iterations
    else:
        engine_result, constraint_violation, num_edges = _solve_fullspace(
            problem, start, initial.voltages
        )
        solver_c = engine_result.x[:num_edges]
        interior_v = engine_result.x[num_edges:].reshape(
            (topology.num_interior, topology.num_boundary), order="F"
        )
        voltages = np.vstack([np.eye(topology.num_boundary), interior_v])
        currents = _laplacian_dense(topology, solver_c) @ voltages
        response = currents[: topology.num_boundary]
        iterations = engine_result.iterations

    misfit = float(np.sum((response - problem.response_data) ** 2))
    deviation = solver_c - _mean_expansion(solver_c, problem.partition)
    breakdown = ObjectiveBreakdown(
        misfit=misfit, penalty=float(deviation @ deviation), mu=problem.mu
    )

    reported = solver_c.copy()
    clamp_mask = reported < REPORT_ZERO_THRESHOLD
    reported[clamp_mask] = 0.0
    reported.setflags(write=False)

    ratio = None
    if true_conductance is not None:
        ratio = lipschitz_ratio(
            reported, true_conductance, response, problem.response_data
        )

    return RecoveryResult(
        conductance=reported,
        block_values=block_means(reported, problem.partition),
        response=response,
        objective=breakdown,
        iterations=iterations,
        status=engine_result.status,
        gradient_norm=engine_result.projected_gradient_norm,
        constraint_violation=float(constraint_violation),
        clamped_edges=int(clamp_mask.sum()),
        ratio=ratio,
        objective_history=engine_result.objective_history,
    )
