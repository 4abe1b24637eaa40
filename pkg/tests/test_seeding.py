"""Seed derivation must stay fixed forever: these frozen values pin the
hash scheme so result files stay reproducible across releases."""

from spiderdtn import derive_seed, make_rng


def test_frozen_derivations():
    assert derive_seed(0) == 9523843951405948789
    assert derive_seed(0, 7, 3, 0) == 10455732069234826982
    assert derive_seed(42, "partition") == 5929674941495708374


def test_distinct_tokens_distinct_seeds():
    seeds = {
        derive_seed(0),
        derive_seed(1),
        derive_seed(0, 0),
        derive_seed(0, 1),
        derive_seed(0, "partition"),
        derive_seed(0, "values"),
        derive_seed(0, 7, 3),
        derive_seed(0, 7, 3, 0),
    }
    assert len(seeds) == 8


def test_generator_reproducible():
    a = make_rng(1234).integers(0, 10**9, 8)
    b = make_rng(1234).integers(0, 10**9, 8)
    assert (a == b).all()


def test_generator_stream_frozen():
    assert make_rng(derive_seed(0)).integers(0, 1000, 4).tolist() == [
        944,
        600,
        920,
        302,
    ]
