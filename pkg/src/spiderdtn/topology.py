"""Well-connected spider graphs: construction, canonical indexing, and random
piecewise-constant conductance instances.

A spider with ``num_radii = m`` boundary vertices (``m = 4*ell + 3`` for some
``ell >= 0``) has ``ell`` concentric circles of ``m`` vertices each plus a
center vertex. Vertices are numbered 0-based in boundary-first order:

* boundary vertices ``0 .. m-1``, one per radius, in circular order;
* circle ``k`` (``k = 1`` outermost to ``ell`` innermost), radius ``j``:
  vertex ``m + (k-1)*m + j``;
* the center is the last vertex, ``num_vertices - 1``.

Edges are listed radial-first, then circular. Radius ``j`` contributes its
``ell + 1`` edges outward to inward (boundary to circle 1, circle 1 to
circle 2, ..., circle ``ell`` to center), for all radii in order; then circle
``k = 1 .. ell`` contributes edges ``(j, j+1 mod m)`` for ``j = 0 .. m-1``.
Each edge is stored with ``u < v``. This ordering is part of the public
contract: edge indices are the positions used by conductance vectors and
partition files, and they are stable across runs.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property, lru_cache
from math import comb
from typing import NamedTuple

import numpy as np

from .seeding import make_rng

RADIAL = "radial"
CIRCULAR = "circular"

# Rejection rounds before random_partition switches to the exact
# conditional sampler. See random_partition for why both exist.
_REJECTION_ROUNDS = 512


class Edge(NamedTuple):
    """Undirected edge with canonical orientation ``u < v``."""

    u: int
    v: int
    kind: str
    index: int


@dataclass(frozen=True)
class SpiderTopology:
    """Immutable description of one spider graph.

    Instances should be built with :func:`build_spider`; the constructor does
    not re-validate the counts.
    """

    num_radii: int
    num_circles: int
    num_vertices: int
    edges: tuple[Edge, ...]

    @property
    def num_boundary(self) -> int:
        """Boundary vertex count; equal to the number of radii."""
        return self.num_radii

    @property
    def num_interior(self) -> int:
        return self.num_vertices - self.num_radii

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    @property
    def center(self) -> int:
        return self.num_vertices - 1

    @cached_property
    def tails(self) -> np.ndarray:
        """Edge tail vertices (``u`` side), int64, read-only."""
        arr = np.array([e.u for e in self.edges], dtype=np.int64)
        arr.setflags(write=False)
        return arr

    @cached_property
    def heads(self) -> np.ndarray:
        """Edge head vertices (``v`` side), int64, read-only."""
        arr = np.array([e.v for e in self.edges], dtype=np.int64)
        arr.setflags(write=False)
        return arr

    @cached_property
    def boundary_edge_indices(self) -> np.ndarray:
        """For each boundary vertex ``j``, the index of its unique incident
        edge. Read-only int64 array of length ``num_radii``."""
        per_radius = self.num_circles + 1
        arr = np.arange(self.num_radii, dtype=np.int64) * per_radius
        arr.setflags(write=False)
        return arr

    def degrees(self) -> np.ndarray:
        """Vertex degrees in canonical order."""
        both = np.concatenate([self.tails, self.heads])
        return np.bincount(both, minlength=self.num_vertices)


def build_spider(num_radii: int) -> SpiderTopology:
    """Construct the well-connected spider with ``num_radii`` radii.

    Parameters
    ----------
    num_radii:
        Boundary vertex count. Must be of the form ``4*ell + 3`` with
        ``ell >= 0``, i.e. one of 3, 7, 11, 15, ...

    Returns
    -------
    SpiderTopology
        Graph with ``num_radii * (ell + 1) + 1`` vertices and
        ``num_radii * (num_radii - 1) / 2`` edges in canonical order.

    Raises
    ------
    ValueError
        If ``num_radii`` is not of the required form.
    """
    m = num_radii
    if m < 3 or (m - 3) % 4 != 0:
        raise ValueError(
            f"radius count must be 4*ell + 3 for some ell >= 0 "
            f"(3, 7, 11, ...); got {m}"
        )
    ell = (m - 3) // 4
    n = m * (ell + 1) + 1
    center = n - 1

    def circle_vertex(k: int, j: int) -> int:
        # circle k in 1..ell, radius j in 0..m-1
        return m + (k - 1) * m + j

    edges: list[Edge] = []

    def add(a: int, b: int, kind: str) -> None:
        u, v = (a, b) if a < b else (b, a)
        edges.append(Edge(u, v, kind, len(edges)))

    # Radial edges, radius by radius, outward to inward.
    for j in range(m):
        chain = [j] + [circle_vertex(k, j) for k in range(1, ell + 1)] + [center]
        for a, b in zip(chain[:-1], chain[1:]):
            add(a, b, RADIAL)

    # Circular edges, circle by circle.
    for k in range(1, ell + 1):
        for j in range(m):
            add(circle_vertex(k, j), circle_vertex(k, (j + 1) % m), CIRCULAR)

    return SpiderTopology(
        num_radii=m,
        num_circles=ell,
        num_vertices=n,
        edges=tuple(edges),
    )


@dataclass(frozen=True, eq=False)
class EdgePartition:
    """Partition of edge indices into ``num_blocks`` nonempty blocks.

    ``block_of[e]`` is the 1-based block label of edge ``e``. The label array
    is stored read-only.
    """

    num_blocks: int
    block_of: np.ndarray

    def __post_init__(self) -> None:
        labels = np.ascontiguousarray(self.block_of, dtype=np.int64)
        if labels.ndim != 1:
            raise ValueError("block labels must form a one-dimensional array")
        if self.num_blocks < 1:
            raise ValueError(f"block count must be positive, got {self.num_blocks}")
        if labels.size < self.num_blocks:
            raise ValueError(
                f"{self.num_blocks} blocks cannot all be nonempty with only "
                f"{labels.size} edges"
            )
        if labels.min() < 1 or labels.max() > self.num_blocks:
            raise ValueError(
                f"block labels must lie in 1..{self.num_blocks}"
            )
        counts = np.bincount(labels, minlength=self.num_blocks + 1)[1:]
        if (counts == 0).any():
            empty = int(np.flatnonzero(counts == 0)[0]) + 1
            raise ValueError(f"block {empty} is empty")
        labels.setflags(write=False)
        object.__setattr__(self, "block_of", labels)

    @property
    def num_edges(self) -> int:
        return int(self.block_of.size)

    def sizes(self) -> np.ndarray:
        """Edge count per block, index 0 holding block 1."""
        return np.bincount(self.block_of, minlength=self.num_blocks + 1)[1:]

    def members(self, block: int) -> np.ndarray:
        """Edge indices belonging to 1-based ``block``."""
        if not 1 <= block <= self.num_blocks:
            raise ValueError(f"block must lie in 1..{self.num_blocks}, got {block}")
        return np.flatnonzero(self.block_of == block)


@lru_cache(maxsize=None)
def _cover_count(remaining: int, uncovered: int, num_blocks: int) -> int:
    """Number of ways to label ``remaining`` edges with ``num_blocks`` labels
    so that ``uncovered`` specific labels each appear at least once.

    Exact integer inclusion-exclusion; Python big ints keep this correct for
    counts far beyond float range.
    """
    if uncovered > remaining:
        return 0
    total = 0
    for i in range(uncovered + 1):
        term = comb(uncovered, i) * (num_blocks - i) ** remaining
        total += -term if i % 2 else term
    return total


def _randbelow(rng: np.random.Generator, bound: int) -> int:
    """Uniform integer in ``[0, bound)`` for arbitrarily large ``bound``,
    drawn from whole bytes so the stream usage is well-defined."""
    nbits = max((bound - 1).bit_length(), 1)
    nbytes = (nbits + 7) // 8
    shift = nbytes * 8 - nbits
    while True:
        value = int.from_bytes(rng.bytes(nbytes), "big") >> shift
        if value < bound:
            return value


def _surjective_labels_exact(
    num_edges: int, num_blocks: int, rng: np.random.Generator
) -> np.ndarray:
    """Sample edge labels uniformly over all surjective labelings.

    Sequential conditional sampling: at each position, the probability of a
    label is proportional to the exact count of surjective completions. This
    is the same distribution the rejection path draws from, without the
    rejection.
    """
    labels = np.empty(num_edges, dtype=np.int64)
    unused = list(range(1, num_blocks + 1))
    used: list[int] = []
    for pos in range(num_edges):
        remaining = num_edges - pos - 1
        w_new = _cover_count(remaining, len(unused) - 1, num_blocks) if unused else 0
        w_old = _cover_count(remaining, len(unused), num_blocks)
        total = len(unused) * w_new + len(used) * w_old
        pick = _randbelow(rng, total)
        if pick < len(unused) * w_new:
            label = unused.pop(pick // w_new)
            used.append(label)
        else:
            pick -= len(unused) * w_new
            label = used[pick // w_old]
        labels[pos] = label
    return labels


def random_partition(
    topology: SpiderTopology, num_blocks: int, seed: int
) -> EdgePartition:
    """Draw a random partition of the edges into ``num_blocks`` nonempty
    blocks, uniformly over all surjective label assignments.

    Labels are drawn i.i.d. uniform over ``1..num_blocks`` conditioned on
    every block being hit. The implementation first tries plain rejection
    (redraw until all blocks are nonempty), which is fast when the block
    count is small relative to the edge count; if the acceptance probability is too
    low it switches to an exact conditional sampler over the same
    distribution, so the law of the result never depends on the path taken.

    Raises
    ------
    ValueError
        If ``num_blocks`` is not between 1 and the edge count.
    """
    num_edges = topology.num_edges
    if not 1 <= num_blocks <= num_edges:
        raise ValueError(
            f"block count must lie in 1..{num_edges} for this topology, "
            f"got {num_blocks}"
        )
    rng = make_rng(seed)
    if num_blocks == 1:
        labels = np.ones(num_edges, dtype=np.int64)
    elif num_blocks == num_edges:
        # Conditioning on surjectivity leaves a uniform random bijection.
        labels = rng.permutation(num_edges).astype(np.int64) + 1
    else:
        labels = None
        for _ in range(_REJECTION_ROUNDS):
            draw = rng.integers(1, num_blocks + 1, size=num_edges, dtype=np.int64)
            hit = np.bincount(draw, minlength=num_blocks + 1)[1:]
            if (hit > 0).all():
                labels = draw
                break
        if labels is None:
            labels = _surjective_labels_exact(num_edges, num_blocks, rng)
    return EdgePartition(num_blocks=num_blocks, block_of=labels)


def sample_pc_conductance(
    partition: EdgePartition, low: float, high: float, seed: int
) -> tuple[np.ndarray, np.ndarray]:
    """Sample a piecewise-constant conductance vector on ``partition``.

    Block values are i.i.d. uniform on ``[low, high]``; every edge inherits
    the value of its block.

    Returns
    -------
    (conductance, block_values)
        ``conductance`` has one entry per edge; ``block_values[b-1]`` is the
        value shared by block ``b``.

    Raises
    ------
    ValueError
        Unless ``0 < low <= high``.
    """
    if not (0.0 < low <= high):
        raise ValueError(
            f"conductance interval must satisfy 0 < low <= high, "
            f"got [{low}, {high}]"
        )
    rng = make_rng(seed)
    block_values = rng.uniform(low, high, size=partition.num_blocks)
    conductance = block_values[partition.block_of - 1]
    return conductance, block_values
