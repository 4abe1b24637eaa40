"""Pure-numpy forward kernel. Semantics defined here; the compiled kernel
mirrors this function step for step."""

from __future__ import annotations

import numpy as np
from scipy.linalg import cho_factor, cho_solve


def forward_core(
    num_boundary: int,
    num_vertices: int,
    tails: np.ndarray,
    heads: np.ndarray,
    weights: np.ndarray,
    want_diffs: bool,
):
    """Evaluate the boundary response of one weighted spider.

    Parameters
    ----------
    num_boundary, num_vertices:
        Vertex counts; boundary vertices are ``0 .. num_boundary-1``.
    tails, heads:
        Edge endpoint arrays (int64), canonical orientation ``u < v``. A
        boundary vertex can only appear on the tail side, and at most once.
    weights:
        Strictly positive edge conductances (validated by the caller).
    want_diffs:
        Also return per-edge potential differences.

    Returns
    -------
    (response, interior_potentials, edge_diffs)
        ``response``: symmetric (m, m) boundary response matrix.
        ``interior_potentials``: (n - m, m) harmonic interior potentials,
        column t belonging to boundary datum e_t.
        ``edge_diffs``: (E, m) array of u-minus-v potential differences per
        edge and datum, or None when ``want_diffs`` is false.

    Raises
    ------
    numpy.linalg.LinAlgError
        If the interior block is not positive definite.
    """
    m = num_boundary
    ni = num_vertices - m

    diag = np.zeros(num_vertices)
    np.add.at(diag, tails, weights)
    np.add.at(diag, heads, weights)

    interior = np.zeros((ni, ni))
    coupling = np.zeros((m, ni))
    interior[np.arange(ni), np.arange(ni)] = diag[m:]

    from_boundary = tails < m
    bt = tails[from_boundary]
    bh = heads[from_boundary] - m
    coupling[bt, bh] -= weights[from_boundary]

    it = tails[~from_boundary] - m
    ih = heads[~from_boundary] - m
    iw = weights[~from_boundary]
    np.subtract.at(interior, (it, ih), iw)
    np.subtract.at(interior, (ih, it), iw)

    try:
        factor = cho_factor(interior, lower=True)
    except np.linalg.LinAlgError:
        raise np.linalg.LinAlgError("interior block is not positive definite")
    potentials = cho_solve(factor, -coupling.T)

    response = coupling @ potentials
    response[np.arange(m), np.arange(m)] += diag[:m]
    response = 0.5 * (response + response.T)

    if not want_diffs:
        return response, potentials, None

    full = np.vstack([np.eye(m), potentials])
    edge_diffs = full[tails] - full[heads]
    return response, potentials, edge_diffs
