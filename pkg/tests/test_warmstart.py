import numpy as np
import pytest

import spiderdtn as sp


@pytest.mark.parametrize("num_radii", [7, 11])
def test_unit_response_against_inverse_block(num_radii):
    # At unit conductance every boundary vertex couples to exactly one
    # interior vertex (its first circle neighbour) with weight one and the
    # boundary block is the identity, so the response reduces to
    # I - inv(interior block) restricted to the first m interior rows/cols.
    topo = sp.build_spider(num_radii)
    lap = sp.assemble_laplacian(topo, np.ones(topo.num_edges))
    m = topo.num_boundary
    alt = np.eye(m) - np.linalg.inv(lap.interior_block)[:m, :m]
    unit = sp.unit_response(topo)
    assert np.abs(unit - alt).max() <= 1e-12


def test_unit_response_is_cached():
    topo = sp.build_spider(7)
    assert sp.unit_response(topo) is sp.unit_response(topo)
    assert not sp.unit_response(topo).flags.writeable


@pytest.mark.parametrize("num_radii", [3, 7, 11, 15])
@pytest.mark.parametrize("level", [0.5, 1.0, 37.2])
def test_constant_fit_recovers_constants(num_radii, level):
    topo = sp.build_spider(num_radii)
    data = sp.response_from_conductance(
        topo, np.full(topo.num_edges, level)
    )
    assert abs(sp.constant_fit(data, topo) - level) <= 1e-8 * level


def test_constant_fit_clips_to_zero():
    topo = sp.build_spider(7)
    data = -sp.unit_response(topo)
    assert sp.constant_fit(data, topo) == 0.0


def test_constant_fit_projected_cross_check(make_instance):
    topo, _, _, response = make_instance()
    exact = sp.constant_fit(response, topo, method="exact")
    iterative = sp.constant_fit(response, topo, method="projected")
    assert abs(exact - iterative) <= 1e-10 * max(1.0, exact)


def test_constant_fit_rejects_unknown_method():
    topo = sp.build_spider(3)
    with pytest.raises(ValueError, match="method"):
        sp.constant_fit(np.eye(3), topo, method="newton")


def test_initial_voltages_are_harmonic():
    topo = sp.build_spider(7)
    voltages = sp.initial_voltages(topo)
    lap = sp.assemble_laplacian(topo, np.ones(topo.num_edges))
    m = topo.num_boundary
    assert np.array_equal(voltages[:m], np.eye(m))
    assert np.abs((lap.matrix @ voltages)[m:]).max() <= 1e-12


def test_initial_guess_bundles_fit_and_voltages(make_instance):
    topo, _, _, response = make_instance()
    guess = sp.initial_guess(response, topo)
    assert guess.conductance == sp.constant_fit(response, topo)
    assert np.array_equal(guess.voltages, sp.initial_voltages(topo))
    assert guess.voltages.shape == (topo.num_vertices, topo.num_boundary)
