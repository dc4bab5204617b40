import pytest

from macsearch.oracle import (
    OracleRefused, brute_kt_core, build_running_example_fixture, oracle_chain_at, oracle_enumerate,
    random_instance,
)


def test_fixture_is_self_consistent():
    # construction asserts every quoted fact; a tampered attribute must trip it
    build_running_example_fixture()
    from macsearch.oracle import RUNNING_EXAMPLE_ATTRIBUTES
    bad = list(RUNNING_EXAMPLE_ATTRIBUTES)
    bad[6] = (9.0, 9.0, 9.0)
    with pytest.raises(AssertionError, match="fixture"):
        build_running_example_fixture(bad)


def test_chain_ranking(example):
    rsn, _, ids = example
    Q = sorted(ids(2, 3, 6))
    r = oracle_chain_at(rsn, Q, 3, 9, (0.25, 0.3))
    assert r.chain[0] == ids(1, 2, 3, 4, 5, 6, 7)
    assert r.top(2)[0] == r.nc


def test_enumeration_contains_chain(example):
    rsn, _, ids = example
    Q = sorted(ids(2, 3, 6))
    cores = oracle_enumerate(rsn, Q, 3, 9)
    assert ids(2, 3, 6, 7) in cores and ids(1, 2, 3, 4, 5, 6, 7) in cores
    assert all(c <= brute_kt_core(rsn, Q, 3, 9) for c in cores)


def test_enumeration_refuses_large_cores():
    from macsearch.synth import generate_road_social
    rsn = generate_road_social(200, 2, seed=1, avg_degree=10)
    with pytest.raises(OracleRefused):
        oracle_enumerate(rsn, [0], 1, float("inf"))


def test_random_instances_are_reproducible():
    a, b = random_instance(17), random_instance(17)
    assert a["Q"] == b["Q"] and a["bounds"] == b["bounds"]
    assert a["rsn"].social.edges == b["rsn"].social.edges
