"""Forward map on spider networks.

Weighted Laplacian assembly, harmonic extensions of boundary data, the
boundary response matrix (the discrete Dirichlet-to-Neumann map), its
sensitivity with respect to edge conductances, and a conditioning probe for
that sensitivity.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from ._kernels import forward_core
from .errors import NonpositiveConductanceError, SingularInteriorBlockError
from .topology import SpiderTopology, build_spider


@dataclass(frozen=True, eq=False)
class LaplacianMatrix:
    """Dense weighted graph Laplacian in boundary-first vertex order."""

    matrix: np.ndarray
    num_boundary: int

    @property
    def boundary_block(self) -> np.ndarray:
        """Rows and columns of boundary vertices (diagonal for spiders,
        since no edge joins two boundary vertices)."""
        m = self.num_boundary
        return self.matrix[:m, :m]

    @property
    def coupling_block(self) -> np.ndarray:
        """Boundary rows, interior columns."""
        m = self.num_boundary
        return self.matrix[:m, m:]

    @property
    def interior_block(self) -> np.ndarray:
        """Interior rows and columns; positive definite for connected graphs
        with positive weights."""
        m = self.num_boundary
        return self.matrix[m:, m:]


@dataclass(frozen=True, eq=False)
class HarmonicExtensionSet:
    """Potentials of the canonical boundary data set.

    Column ``t`` of ``potentials`` is the vertex potential vector that agrees
    with the ``t``-th standard basis vector on the boundary and has zero net
    current at every interior vertex. The top ``num_boundary`` rows are the
    identity by construction.
    """

    potentials: np.ndarray
    num_boundary: int

    @property
    def interior(self) -> np.ndarray:
        return self.potentials[self.num_boundary :]


def _as_weights(topology: SpiderTopology, conductance: np.ndarray) -> np.ndarray:
    weights = np.ascontiguousarray(conductance, dtype=float)
    if weights.shape != (topology.num_edges,):
        raise ValueError(
            f"conductance must have one entry per edge "
            f"({topology.num_edges}), got shape {weights.shape}"
        )
    if not np.all(weights > 0.0):
        bad = int(np.flatnonzero(~(weights > 0.0))[0])
        raise NonpositiveConductanceError(
            f"conductance must be strictly positive; edge {bad} has "
            f"value {weights[bad]}"
        )
    return weights


def assemble_laplacian(
    topology: SpiderTopology, conductance: np.ndarray
) -> LaplacianMatrix:
    """Assemble the dense weighted Laplacian ``L`` of the network.

    ``L[a, a]`` is the total conductance incident to ``a``; ``L[a, b]`` is
    minus the conductance of edge ``(a, b)`` when present, else zero.

    Raises
    ------
    NonpositiveConductanceError
        If any conductance entry is not strictly positive.
    ValueError
        On a length mismatch with the topology's edge list.
    """
    weights = _as_weights(topology, conductance)
    n = topology.num_vertices
    matrix = np.zeros((n, n))
    tails, heads = topology.tails, topology.heads
    matrix[tails, heads] -= weights
    matrix[heads, tails] -= weights
    diag = np.zeros(n)
    np.add.at(diag, tails, weights)
    np.add.at(diag, heads, weights)
    matrix[np.arange(n), np.arange(n)] = diag
    matrix.setflags(write=False)
    return LaplacianMatrix(matrix=matrix, num_boundary=topology.num_boundary)


def harmonic_extensions(laplacian: LaplacianMatrix) -> HarmonicExtensionSet:
    """Solve the interior system for every canonical boundary datum.

    Raises
    ------
    SingularInteriorBlockError
        If the interior block cannot be Cholesky-factored.
    """
    m = laplacian.num_boundary
    try:
        factor = cho_factor(laplacian.interior_block, lower=True)
    except np.linalg.LinAlgError as exc:
        raise SingularInteriorBlockError(str(exc)) from exc
    interior = cho_solve(factor, -laplacian.coupling_block.T)
    potentials = np.vstack([np.eye(m), interior])
    potentials.setflags(write=False)
    return HarmonicExtensionSet(potentials=potentials, num_boundary=m)


def response_matrix(laplacian: LaplacianMatrix) -> np.ndarray:
    """Boundary response matrix, the Schur complement of the interior block.

    The result is explicitly symmetrized; rows sum to zero up to rounding.

    Raises
    ------
    SingularInteriorBlockError
        If the interior block cannot be Cholesky-factored.
    """
    m = laplacian.num_boundary
    try:
        factor = cho_factor(laplacian.interior_block, lower=True)
    except np.linalg.LinAlgError as exc:
        raise SingularInteriorBlockError(str(exc)) from exc
    coupling = laplacian.coupling_block
    solved = cho_solve(factor, coupling.T)
    response = laplacian.boundary_block - coupling @ solved
    response = 0.5 * (response + response.T)
    response.setflags(write=False)
    return response


def response_from_conductance(
    topology: SpiderTopology, conductance: np.ndarray
) -> np.ndarray:
    """Boundary response evaluated through the forward kernel.

    Agrees with ``response_matrix(assemble_laplacian(...))`` to tight
    tolerance; this path skips the full Laplacian and is the one solvers use.
    """
    weights = _as_weights(topology, conductance)
    try:
        response, _, _ = forward_core(
            topology.num_boundary,
            topology.num_vertices,
            topology.tails,
            topology.heads,
            weights,
            False,
        )
    except np.linalg.LinAlgError as exc:
        raise SingularInteriorBlockError(str(exc)) from exc
    return response


def forward_with_diffs(
    topology: SpiderTopology, conductance: np.ndarray
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Kernel evaluation returning (response, interior potentials, per-edge
    potential differences). The differences are the raw material of the
    sensitivity Jacobian."""
    weights = _as_weights(topology, conductance)
    try:
        return forward_core(
            topology.num_boundary,
            topology.num_vertices,
            topology.tails,
            topology.heads,
            weights,
            True,
        )
    except np.linalg.LinAlgError as exc:
        raise SingularInteriorBlockError(str(exc)) from exc


def sensitivity_jacobian(
    topology: SpiderTopology, conductance: np.ndarray
) -> np.ndarray:
    """Derivative of each response entry with respect to each conductance.

    Returns
    -------
    ndarray of shape (num_edges, m, m)
        Entry ``[e, s, t]`` is the derivative of response entry ``(s, t)``
        with respect to the conductance of edge ``e``: the product of the
        edge potential drops under boundary data ``e_s`` and ``e_t``.
    """
    _, _, diffs = forward_with_diffs(topology, conductance)
    return diffs[:, :, None] * diffs[:, None, :]


class ConditioningProbe(NamedTuple):
    """Singular-value summary of the flattened sensitivity Jacobian."""

    sigma_min: float
    sigma_max: float
    cond: float


def conditioning_probe(num_radii: int) -> ConditioningProbe:
    """Probe the conditioning of the linearized inverse problem at unit
    conductance.

    The sensitivity Jacobian is flattened to a (num_edges, m*(m+1)/2) matrix
    keeping one copy of each symmetric response entry (upper triangle, row
    major), then decomposed with a dense SVD.
    """
    topology = build_spider(num_radii)
    jac = sensitivity_jacobian(topology, np.ones(topology.num_edges))
    m = topology.num_boundary
    upper = np.triu_indices(m)
    flat = jac[:, upper[0], upper[1]]
    singular = np.linalg.svd(flat, compute_uv=False)
    sigma_max = float(singular[0])
    sigma_min = float(singular[-1])
    return ConditioningProbe(
        sigma_min=sigma_min,
        sigma_max=sigma_max,
        cond=sigma_max / sigma_min,
    )


def response_matrix_violations(
    response: np.ndarray, tol: float = 1e-8
) -> list[str]:
    """Check the structural properties a true boundary response must have.

    Returns human-readable descriptions of violations: asymmetry beyond
    ``tol``, row sums beyond ``tol`` in magnitude, or nonnegative
    off-diagonal entries. An empty list means the matrix looks like a
    response matrix at tolerance ``tol``.
    """
    problems: list[str] = []
    response = np.asarray(response, dtype=float)
    if response.ndim != 2 or response.shape[0] != response.shape[1]:
        return [f"matrix is not square: shape {response.shape}"]
    asym = float(np.abs(response - response.T).max())
    if asym > tol:
        problems.append(f"asymmetry {asym:.3e} exceeds {tol:.1e}")
    rowsum = float(np.abs(response.sum(axis=1)).max())
    if rowsum > tol:
        problems.append(f"row sums reach {rowsum:.3e}, beyond {tol:.1e}")
    off = response[~np.eye(response.shape[0], dtype=bool)]
    if off.size and float(off.max()) >= 0.0:
        problems.append(
            f"off-diagonal entries must be negative; max is {float(off.max()):.3e}"
        )
    return problems
