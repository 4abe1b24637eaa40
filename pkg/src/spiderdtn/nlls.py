"""Bound-constrained nonlinear least squares.

A projected Levenberg-Marquardt iteration shared by both inverse
formulations. The model step solves the damped normal equations; candidate
points are projected onto the lower bounds before evaluation, so every
iterate is feasible and the objective sequence is monotone by construction.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

CONVERGED = "converged"
CONVERGED_STAGNANT = "converged-stagnant"
MAX_ITER = "max-iter"
FAILED = "failed"

_DAMPING_MAX = 1e14


@dataclass(frozen=True, eq=False)
class LeastSquaresResult:
    """Outcome of one bound-constrained least-squares run.

    ``objective_history`` holds the objective at the start followed by the
    value after each accepted step; it is non-increasing.
    """

    x: np.ndarray
    objective: float
    projected_gradient_norm: float
    iterations: int
    status: str
    objective_history: tuple[float, ...]


def _projected_gradient_norm(
    gradient: np.ndarray, x: np.ndarray, lower: np.ndarray
) -> float:
    """Sup-norm of the gradient with components pointing into an active
    lower bound zeroed out; the stationarity measure for bound constraints."""
    projected = gradient.copy()
    at_bound = (x <= lower) & (gradient > 0.0)
    projected[at_bound] = 0.0
    return float(np.abs(projected).max()) if projected.size else 0.0


def minimize_bounded(
    fun: Callable[[np.ndarray], tuple[np.ndarray, np.ndarray]],
    x0: np.ndarray,
    lower: float | np.ndarray | None = None,
    *,
    gtol: float = 1e-8,
    max_iterations: int = 500,
    stagnation_window: int = 10,
    stagnation_rtol: float = 1e-16,
    damping0: float = 1e-3,
) -> LeastSquaresResult:
    """Minimize ``sum(residuals**2)`` subject to ``x >= lower``.

    Parameters
    ----------
    fun:
        Callable returning ``(residuals, jacobian)`` at a point.
    x0:
        Starting point; projected onto the bounds before the first
        evaluation.
    lower:
        Scalar or per-component lower bounds; None means unbounded.
    gtol:
        Stationarity tolerance on the sup-norm of the projected gradient.
    max_iterations:
        Cap on accepted steps.
    stagnation_window, stagnation_rtol:
        Declare convergence-by-stagnation when the relative objective
        improvement over the last ``stagnation_window`` accepted steps falls
        below ``stagnation_rtol``; separates flatlined runs from genuine
        step failures.

    Returns
    -------
    LeastSquaresResult
        Status is ``converged`` (projected gradient within ``gtol``),
        ``converged-stagnant``, ``max-iter``, or ``failed`` (no acceptable
        step before the damping limit). The best iterate is returned in all
        cases.
    """
    x = np.asarray(x0, dtype=float).copy()
    if lower is None:
        bounds = np.full(x.shape, -np.inf)
    else:
        bounds = np.broadcast_to(np.asarray(lower, dtype=float), x.shape).copy()
    np.maximum(x, bounds, out=x)

    residuals, jacobian = fun(x)
    objective = float(residuals @ residuals)
    history = [objective]
    damping = damping0

    for iteration in range(max_iterations):
        gradient = 2.0 * (jacobian.T @ residuals)
        pg_norm = _projected_gradient_norm(gradient, x, bounds)
        if pg_norm <= gtol:
            return LeastSquaresResult(
                x=x,
                objective=objective,
                projected_gradient_norm=pg_norm,
                iterations=iteration,
                status=CONVERGED,
                objective_history=tuple(history),
            )

        normal = jacobian.T @ jacobian
        rhs = jacobian.T @ residuals
        scale = np.diag(normal).copy()
        scale[scale <= 0.0] = 1.0

        accepted = False
        while damping <= _DAMPING_MAX:
            try:
                step = np.linalg.solve(
                    normal + damping * np.diag(scale), -rhs
                )
            except np.linalg.LinAlgError:
                damping *= 10.0
                continue
            candidate = np.maximum(x + step, bounds)
            try:
                cand_residuals, cand_jacobian = fun(candidate)
            except np.linalg.LinAlgError:
                # A candidate clipped deep into the bounds can defeat the
                # factorization numerically; treat it as a rejected step.
                damping *= 10.0
                continue
            cand_objective = float(cand_residuals @ cand_residuals)
            if cand_objective < objective:
                x = candidate
                residuals, jacobian = cand_residuals, cand_jacobian
                objective = cand_objective
                history.append(objective)
                damping = max(damping / 3.0, 1e-12)
                accepted = True
                break
            damping *= 10.0

        if not accepted:
            gradient = 2.0 * (jacobian.T @ residuals)
            pg_norm = _projected_gradient_norm(gradient, x, bounds)
            # No descent direction left at the damping cap: either the
            # objective has flattened at its floor or the step search failed.
            status = CONVERGED_STAGNANT if objective <= 1e-24 else FAILED
            return LeastSquaresResult(
                x=x,
                objective=objective,
                projected_gradient_norm=pg_norm,
                iterations=iteration,
                status=status,
                objective_history=tuple(history),
            )

        if len(history) > stagnation_window:
            past = history[-1 - stagnation_window]
            improvement = past - history[-1]
            if improvement < stagnation_rtol * max(past, 1e-300):
                gradient = 2.0 * (jacobian.T @ residuals)
                pg_norm = _projected_gradient_norm(gradient, x, bounds)
                return LeastSquaresResult(
                    x=x,
                    objective=objective,
                    projected_gradient_norm=pg_norm,
                    iterations=iteration + 1,
                    status=CONVERGED_STAGNANT,
                    objective_history=tuple(history),
                )

    gradient = 2.0 * (jacobian.T @ residuals)
    pg_norm = _projected_gradient_norm(gradient, x, bounds)
    status = CONVERGED if pg_norm <= gtol else MAX_ITER
    return LeastSquaresResult(
        x=x,
        objective=objective,
        projected_gradient_norm=pg_norm,
        iterations=max_iterations,
        status=status,
        objective_history=tuple(history),
    )
