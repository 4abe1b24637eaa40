import pytest

import spiderdtn as sp


@pytest.fixture
def make_instance():
    """Factory for seeded random instances: returns (topology, partition,
    conductance, response)."""

    def make(num_radii=7, num_blocks=3, seed=101, low=1.0, high=100.0):
        topology = sp.build_spider(num_radii)
        partition = sp.random_partition(
            topology, num_blocks, sp.derive_seed(seed, "partition")
        )
        conductance, _ = sp.sample_pc_conductance(
            partition, low, high, sp.derive_seed(seed, "values")
        )
        response = sp.response_from_conductance(topology, conductance)
        return topology, partition, conductance, response

    return make
