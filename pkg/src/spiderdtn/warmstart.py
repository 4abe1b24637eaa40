"""Warm start for the inverse solver.

The best constant-conductance approximation to a measured response has a
closed form: the response scales linearly in a global conductance factor, so
fitting reduces to a one-dimensional nonnegative least-squares problem whose
solution is a clipped ratio of inner products. The matching initial voltage
variables are the harmonic extensions at unit conductance.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .forward import forward_with_diffs, response_from_conductance
from .topology import SpiderTopology


@dataclass(frozen=True, eq=False)
class InitialGuess:
    """Starting point for the inverse solver: one conductance value for all
    edges plus the voltage table that is exactly harmonic for it."""

    conductance: float
    voltages: np.ndarray


@lru_cache(maxsize=16)
def unit_response(topology: SpiderTopology) -> np.ndarray:
    """Boundary response at unit conductance on every edge (cached)."""
    response = response_from_conductance(
        topology, np.ones(topology.num_edges)
    )
    response.setflags(write=False)
    return response


def constant_fit(
    response_data: np.ndarray,
    topology: SpiderTopology,
    method: str = "exact",
) -> float:
    """Best constant conductance for ``response_data`` in the Frobenius
    sense, clipped to be nonnegative.

    ``method`` selects how the one-dimensional problem is solved:

    * ``"exact"`` (default): the closed-form clipped ratio
      ``max(0, <data, M> / <M, M>)`` with ``M`` the unit response;
    * ``"projected"``: projected gradient descent on the same quadratic,
      kept as an independent cross-check of the closed form.

    Both agree to near machine precision.
    """
    unit = unit_response(topology)
    gram = float(np.sum(unit * unit))
    inner = float(np.sum(np.asarray(response_data, dtype=float) * unit))
    if method == "exact":
        return max(0.0, inner / gram)
    if method == "projected":
        value = 0.0
        step = 0.5 / gram
        for _ in range(200):
            gradient = 2.0 * (value * gram - inner)
            updated = max(0.0, value - step * gradient)
            if abs(updated - value) <= 1e-15 * max(1.0, abs(updated)):
                value = updated
                break
            value = updated
        return value
    raise ValueError(f"method must be 'exact' or 'projected', got {method!r}")


def initial_voltages(topology: SpiderTopology) -> np.ndarray:
    """Voltage table (num_vertices, m) of the unit-conductance harmonic
    extensions; boundary rows are the identity."""
    _, interior, _ = forward_with_diffs(topology, np.ones(topology.num_edges))
    return np.vstack([np.eye(topology.num_boundary), interior])


def initial_guess(
    response_data: np.ndarray, topology: SpiderTopology
) -> InitialGuess:
    """Constant-fit conductance plus matching voltages.

    The voltages are harmonic for any constant conductance (scaling all edges
    leaves the potentials unchanged), so the unit-conductance table is exact
    for the fitted constant as well.
    """
    return InitialGuess(
        conductance=constant_fit(response_data, topology),
        voltages=initial_voltages(topology),
    )
