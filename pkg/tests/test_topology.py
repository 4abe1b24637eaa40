from collections import Counter, deque

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import spiderdtn as sp
from spiderdtn.seeding import make_rng
from spiderdtn.topology import CIRCULAR, RADIAL, _surjective_labels_exact


@pytest.mark.parametrize("num_radii", [3, 7, 11, 15, 19])
def test_structural_counts(num_radii):
    topo = sp.build_spider(num_radii)
    ell = (num_radii - 3) // 4
    assert topo.num_circles == ell
    assert topo.num_vertices == num_radii * (ell + 1) + 1
    assert topo.num_vertices == (num_radii**2 + num_radii + 4) // 4
    assert topo.num_edges == num_radii * (num_radii - 1) // 2
    kinds = Counter(e.kind for e in topo.edges)
    assert kinds[RADIAL] == num_radii * (ell + 1)
    assert kinds.get(CIRCULAR, 0) == num_radii * ell


@pytest.mark.parametrize("bad", [0, 1, 2, 4, 5, 6, 8, 10, -3])
def test_invalid_radius_count_rejected(bad):
    with pytest.raises(ValueError):
        sp.build_spider(bad)


@pytest.mark.parametrize("num_radii", [3, 7, 11])
def test_degrees(num_radii):
    topo = sp.build_spider(num_radii)
    degrees = topo.degrees()
    m = num_radii
    assert (degrees[:m] == 1).all()
    assert degrees[topo.center] == m
    # every circle vertex touches two circular and two radial edges
    circle = degrees[m : topo.num_vertices - 1]
    assert (circle == 4).all()


def test_edge_ordering_contract():
    topo = sp.build_spider(7)
    # radial edges come first, listed radius by radius outward to inward
    assert [e.kind for e in topo.edges[:14]] == [RADIAL] * 14
    assert [e.kind for e in topo.edges[14:]] == [CIRCULAR] * 7
    for e in topo.edges:
        assert e.u < e.v
        assert e.index == topo.edges.index(e)
    # radius 0: boundary 0 to circle vertex 7, then 7 to the center 14
    assert (topo.edges[0].u, topo.edges[0].v) == (0, 7)
    assert (topo.edges[1].u, topo.edges[1].v) == (7, 14)
    # circle edges wrap around
    assert (topo.edges[14].u, topo.edges[14].v) == (7, 8)
    assert (topo.edges[20].u, topo.edges[20].v) == (7, 13)


def test_boundary_edge_indices():
    topo = sp.build_spider(11)
    for j, edge_index in enumerate(topo.boundary_edge_indices):
        edge = topo.edges[edge_index]
        assert edge.u == j
        assert edge.kind == RADIAL


@pytest.mark.parametrize("num_radii", [3, 7, 15])
def test_connected(num_radii):
    topo = sp.build_spider(num_radii)
    adj = [[] for _ in range(topo.num_vertices)]
    for e in topo.edges:
        adj[e.u].append(e.v)
        adj[e.v].append(e.u)
    seen = {0}
    queue = deque([0])
    while queue:
        v = queue.popleft()
        for w in adj[v]:
            if w not in seen:
                seen.add(w)
                queue.append(w)
    assert len(seen) == topo.num_vertices


def test_arrays_read_only():
    topo = sp.build_spider(7)
    with pytest.raises(ValueError):
        topo.tails[0] = 5
    part = sp.random_partition(topo, 3, 0)
    with pytest.raises(ValueError):
        part.block_of[0] = 2


@given(
    num_radii=st.sampled_from([3, 7, 11]),
    seed=st.integers(0, 2**32),
    data=st.data(),
)
@settings(max_examples=40, deadline=None)
def test_random_partition_properties(num_radii, seed, data):
    topo = sp.build_spider(num_radii)
    num_blocks = data.draw(st.integers(1, topo.num_edges))
    part = sp.random_partition(topo, num_blocks, seed)
    assert part.block_of.shape == (topo.num_edges,)
    assert part.block_of.min() >= 1
    assert part.block_of.max() <= num_blocks
    assert (part.sizes() > 0).all()
    again = sp.random_partition(topo, num_blocks, seed)
    assert np.array_equal(part.block_of, again.block_of)


def test_partition_special_cases():
    topo = sp.build_spider(7)
    one = sp.random_partition(topo, 1, 9)
    assert (one.block_of == 1).all()
    full = sp.random_partition(topo, topo.num_edges, 9)
    assert sorted(full.block_of) == list(range(1, topo.num_edges + 1))


def test_partition_out_of_range():
    topo = sp.build_spider(3)
    with pytest.raises(ValueError):
        sp.random_partition(topo, 0, 1)
    with pytest.raises(ValueError):
        sp.random_partition(topo, topo.num_edges + 1, 1)


def test_partition_rejection_fallback():
    # 20 blocks over 21 edges: rejection alone essentially never succeeds,
    # so this exercises the exact conditional sampler
    topo = sp.build_spider(7)
    part = sp.random_partition(topo, 20, 77)
    assert (part.sizes() > 0).all()
    assert part.sizes().sum() == topo.num_edges
    again = sp.random_partition(topo, 20, 77)
    assert np.array_equal(part.block_of, again.block_of)


def test_exact_sampler_uniform_over_surjections():
    # 3 edges, 2 blocks: exactly 6 surjective labelings, each with
    # probability 1/6; 1200 draws should spread evenly
    counts = Counter()
    for k in range(1200):
        labels = _surjective_labels_exact(3, 2, make_rng(sp.derive_seed(99, k)))
        counts[tuple(labels)] += 1
    assert len(counts) == 6
    assert min(counts.values()) > 120
    assert max(counts.values()) < 280


def test_edge_partition_validation():
    with pytest.raises(ValueError):
        sp.EdgePartition(2, np.array([1, 1, 1]))  # block 2 empty
    with pytest.raises(ValueError):
        sp.EdgePartition(2, np.array([1, 2, 3]))  # label out of range
    with pytest.raises(ValueError):
        sp.EdgePartition(4, np.array([1, 2, 3]))  # more blocks than edges
    part = sp.EdgePartition(2, np.array([2, 1, 1]))
    assert part.sizes().tolist() == [2, 1]
    assert part.members(1).tolist() == [1, 2]


def test_sample_pc_conductance():
    topo = sp.build_spider(7)
    part = sp.random_partition(topo, 4, 3)
    c, values = sp.sample_pc_conductance(part, 0.5, 2.0, 17)
    assert c.shape == (topo.num_edges,)
    assert values.shape == (4,)
    assert ((values >= 0.5) & (values <= 2.0)).all()
    for block in range(1, 5):
        members = part.members(block)
        assert (c[members] == values[block - 1]).all()
    c2, _ = sp.sample_pc_conductance(part, 0.5, 2.0, 17)
    assert np.array_equal(c, c2)


def test_sample_pc_degenerate_interval():
    topo = sp.build_spider(3)
    part = sp.random_partition(topo, 2, 0)
    c, values = sp.sample_pc_conductance(part, 3.5, 3.5, 1)
    assert (c == 3.5).all()
    assert (values == 3.5).all()


@pytest.mark.parametrize("low,high", [(0.0, 1.0), (-1.0, 1.0), (2.0, 1.0)])
def test_sample_pc_invalid_interval(low, high):
    topo = sp.build_spider(3)
    part = sp.random_partition(topo, 2, 0)
    with pytest.raises(ValueError):
        sp.sample_pc_conductance(part, low, high, 1)
