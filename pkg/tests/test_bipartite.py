import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from esdp.bipartite import (
    BipartiteGraph,
    ResourceModel,
    build_random_graph,
    is_feasible,
    sample_resource_model,
)


def test_default_sized_graph_has_servable_ports():
    g = build_random_graph(8, 40, 0.1, seed=3)
    assert all(len(p) >= 1 for p in g.port_edges)
    assert 10 <= g.num_edges <= 70


def test_expected_edge_count_over_many_seeds():
    sizes = [build_random_graph(8, 40, 0.1, seed=s).num_edges for s in range(200)]
    # 32 expected, plus a small repair term when a port draws nothing (0.9^40 ~ 1.5%)
    assert abs(np.mean(sizes) - 32.1) < 1.0


def test_probability_one_is_complete():
    g = build_random_graph(3, 3, 1.0, seed=11)
    assert g.num_edges == 9
    assert g.edges == tuple((l, r) for l in range(3) for r in range(3))


def test_probability_zero_forces_one_edge_per_port():
    g = build_random_graph(2, 5, 0.0, seed=1)
    assert g.num_edges == 2
    assert [len(p) for p in g.port_edges] == [1, 1]


def test_edges_sorted_and_inverse_maps_consistent():
    g = build_random_graph(5, 12, 0.4, seed=7)
    assert list(g.edges) == sorted(g.edges)
    for i, (l, r) in enumerate(g.edges):
        assert i in g.port_edges[l]
        assert i in g.server_edges[r]
    assert sum(map(len, g.port_edges)) == g.num_edges == sum(map(len, g.server_edges))


def test_same_seed_serializes_identically():
    a = json.dumps(build_random_graph(8, 40, 0.1, seed=5).to_dict())
    b = json.dumps(build_random_graph(8, 40, 0.1, seed=5).to_dict())
    assert a == b
    g = BipartiteGraph.from_dict(json.loads(a))
    assert json.dumps(g.to_dict()) == a


def test_duplicate_edges_rejected():
    with pytest.raises(ValueError):
        BipartiteGraph(2, 2, ((0, 1), (0, 1)))


@pytest.mark.parametrize("args", [(0, 3, 0.5), (2, 0, 0.5), (2, 2, 1.5), (2, 2, -0.1)])
def test_bad_graph_arguments(args):
    with pytest.raises(ValueError):
        build_random_graph(*args, seed=0)


def test_feasibility_examples():
    rm = ResourceModel([[1, 1, 1]], [2])
    assert is_feasible([0, 0, 0], rm)
    assert not is_feasible([1, 1, 1], rm)
    assert is_feasible([1, 0, 1], rm)
    rm2 = ResourceModel([[1, 2], [2, 1]], [2, 2])
    assert not is_feasible([1, 1], rm2)
    assert is_feasible([0, 1], rm2)


def test_feasibility_dimension_mismatch():
    rm = ResourceModel([[1, 1, 1]], [2])
    with pytest.raises(ValueError):
        is_feasible([1, 0], rm)


def test_edge_without_requirement_is_malformed():
    with pytest.raises(ValueError):
        ResourceModel([[1, 0], [2, 0]], [3, 3])


def test_sampled_capacities_admit_every_single_edge():
    rng = np.random.default_rng(0)
    rm = sample_resource_model(30, 3, rng)
    assert rm.requirements.min() >= 1 and rm.requirements.max() <= 2
    for e in range(rm.num_edges):
        x = np.zeros(rm.num_edges, dtype=int)
        x[e] = 1
        assert is_feasible(x, rm)


def test_resource_model_round_trip():
    rm = sample_resource_model(7, 2, np.random.default_rng(1))
    back = ResourceModel.from_dict(json.loads(json.dumps(rm.to_dict())))
    assert np.array_equal(back.requirements, rm.requirements)
    assert np.array_equal(back.capacities, rm.capacities)


@st.composite
def feasible_case(draw):
    n = draw(st.integers(1, 8))
    k = draw(st.integers(1, 3))
    a = np.array(draw(st.lists(st.lists(st.integers(1, 3), min_size=n, max_size=n),
                               min_size=k, max_size=k)))
    c = np.array(draw(st.lists(st.integers(0, 6), min_size=k, max_size=k)))
    x = np.array(draw(st.lists(st.integers(0, 1), min_size=n, max_size=n)))
    return ResourceModel(a, c), x


@settings(max_examples=200, deadline=None)
@given(feasible_case())
def test_subsets_of_feasible_vectors_are_feasible(case):
    rm, x = case
    if not is_feasible(x, rm):
        return
    for e in np.flatnonzero(x):
        y = x.copy()
        y[e] = 0
        assert is_feasible(y, rm)


@settings(max_examples=200, deadline=None)
@given(feasible_case())
def test_adding_an_edge_breaks_exactly_the_overfull_rows(case):
    rm, x = case
    if not is_feasible(x, rm):
        return
    for e in np.flatnonzero(x == 0):
        y = x.copy()
        y[e] = 1
        over = rm.usage(y) > rm.capacities
        assert is_feasible(y, rm) == (not over.any())
        # only rows this edge consumes can overflow
        assert not (over & (rm.requirements[:, e] == 0)).any()
