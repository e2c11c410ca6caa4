import pytest
from hypothesis import given, strategies as st

from vocalsync.model import AgentParams, SimConfig, validate_config
from vocalsync.topology import (
    build_chain,
    build_complete,
    build_ring,
    build_star,
    edges_of,
    from_edge_list,
)


def test_chain_3():
    t = build_chain(3)
    assert t.sources_of(0) == frozenset()
    assert t.sources_of(1) == frozenset([0])
    assert t.sources_of(2) == frozenset([1])


def test_chain_8_has_master_and_seven_edges():
    t = build_chain(8)
    assert t.sources_of(0) == frozenset()
    assert t.n_edges() == 7


def test_chain_2():
    t = build_chain(2)
    assert dict(t.listens_to) == {0: frozenset(), 1: frozenset([0])}


def test_chain_rejects_n_below_2():
    with pytest.raises(ValueError):
        build_chain(1)


def test_ring_8():
    t = build_ring(8)
    assert t.n_edges() == 8
    for k in range(8):
        assert t.sources_of(k) == frozenset([(k - 1) % 8])


def test_ring_2_mutual():
    t = build_ring(2)
    assert t.sources_of(0) == frozenset([1])
    assert t.sources_of(1) == frozenset([0])


@given(n=st.integers(min_value=2, max_value=40))
def test_ring_in_degrees_sum_to_n(n):
    t = build_ring(n)
    assert t.n_edges() == n
    out_degree = {k: 0 for k in range(n)}
    for listener in range(n):
        for src in t.sources_of(listener):
            out_degree[src] += 1
    assert all(d == 1 for d in out_degree.values())


def test_star_4():
    t = build_star(4)
    assert dict(t.listens_to) == {
        0: frozenset(), 1: frozenset([0]), 2: frozenset([0]), 3: frozenset([0])
    }


def test_complete_3_has_6_edges():
    assert build_complete(3).n_edges() == 6


def test_from_edge_list_rejects_self_edge():
    with pytest.raises(ValueError, match="self-edge"):
        from_edge_list(2, [(0, 0)])


def test_from_edge_list_rejects_unknown_ids():
    with pytest.raises(ValueError, match="unknown agent id"):
        from_edge_list(2, [(0, 5)])


@given(
    n=st.integers(min_value=1, max_value=12),
    data=st.data(),
)
def test_edge_list_round_trip(n, data):
    possible = [(a, b) for a in range(n) for b in range(n) if a != b]
    edges = data.draw(st.lists(st.sampled_from(possible), unique=True) if possible
                      else st.just([]))
    t = from_edge_list(n, edges)
    assert from_edge_list(n, edges_of(t)) == t


@pytest.mark.parametrize("build,n", [
    (build_chain, 8), (build_ring, 8), (build_star, 5), (build_complete, 4),
])
def test_constructors_pass_model_validation(build, n):
    t = build(n)
    params = [AgentParams(id=k) for k in range(n)]
    assert validate_config(params, t, SimConfig()) == []
