import dataclasses
import math

import numpy as np
import pytest

from esdp.config import ConfigError, SimConfig
from esdp.instance import build_instance
from esdp.simulator import aggregate, run, run_replications, theorem1_probability

SMALL = SimConfig(horizon=60, num_ports=4, num_servers=10, edge_prob=0.3, replications=2,
                  mc_samples=100_000, policies=("esdp", "hswf", "lcf", "lwtf", "oracle"))


@pytest.fixture(scope="module")
def small_run():
    return run(SMALL)


def test_zero_horizon_rejected():
    with pytest.raises(ConfigError, match="horizon"):
        dataclasses.replace(SMALL, horizon=0)


def test_single_slot_without_arrivals_is_all_zero():
    res = run(dataclasses.replace(SMALL, horizon=1, arrival_prob=0.0))
    assert res.horizon == 1
    for series in (res.sw, res.regret, res.cum_sw, res.cum_regret, res.avg_sw, res.oracle_value):
        assert not np.any(series)


def test_oracle_has_zero_regret(small_run):
    assert not small_run.regret[small_run.row("oracle")].any()


def test_regret_nonnegative_and_cumulative_nondecreasing(small_run):
    assert (small_run.regret >= 0).all()
    assert (np.diff(small_run.cum_regret, axis=1) >= 0).all()


def test_cumulative_series_are_prefix_sums(small_run):
    assert np.array_equal(small_run.cum_sw[:, -1], np.cumsum(small_run.sw, axis=1)[:, -1])
    recs = [small_run.record(t) for t in range(1, small_run.horizon + 1)]
    for p in small_run.policies:
        total = math.fsum(r.sw[p] for r in recs)
        assert total == pytest.approx(small_run.cum_sw[small_run.row(p), -1], abs=1e-9)


def test_decisions_respect_arrivals_and_capacity(small_run):
    inst = build_instance(SMALL)
    rm, g = inst.resources, inst.graph
    for i in range(len(small_run.policies)):
        for j in range(small_run.horizon):
            x = small_run.decisions[i, j]
            assert (rm.usage(x) <= rm.capacities).all()
            assert not x[~g.arrival_mask(small_run.arrivals[j])].any()


def test_policy_list_does_not_change_streams(small_run):
    alone = run(dataclasses.replace(SMALL, policies=("lcf",)))
    assert np.array_equal(alone.arrivals, small_run.arrivals)
    assert np.array_equal(alone.oracle_value, small_run.oracle_value)
    # a baseline's trajectory depends only on its own feedback
    assert np.array_equal(alone.sw[0], small_run.sw[small_run.row("lcf")])


def test_run_is_deterministic(small_run):
    again = run(SMALL)
    assert np.array_equal(again.sw, small_run.sw)
    assert np.array_equal(again.decisions, small_run.decisions)
    assert not again.wall_ns.any()


def test_timing_is_opt_in():
    res = run(dataclasses.replace(SMALL, horizon=5, record_timing=True))
    assert (res.wall_ns > 0).all()


def test_stats_trace():
    res = run(dataclasses.replace(SMALL, horizon=4, trace_stats=True))
    assert len(res.stats_trace) == 4
    assert sum(res.stats_trace[-1]["counts"]) == res.decisions[res.row("esdp")].sum()


def test_replications_differ():
    a, b = run_replications(dataclasses.replace(SMALL, horizon=20))
    assert a.meta["instance_seed"] != b.meta["instance_seed"]


def test_aggregate_single_replication(small_run):
    s = aggregate([small_run])
    assert np.array_equal(s.mean["cum_sw"], small_run.cum_sw)
    assert not s.std["cum_sw"].any()
    i = small_run.row("lcf")
    e = small_run.row("esdp")
    valid = small_run.cum_sw[i] > 0
    assert np.allclose(s.ratio["lcf"][valid], small_run.cum_sw[e][valid] / small_run.cum_sw[i][valid])


def test_aggregate_identical_runs(small_run):
    s = aggregate([small_run, run(SMALL)])
    assert all(not s.std[k].any() for k in s.std)


def test_aggregate_rejects_mismatched_horizons(small_run):
    short = run(dataclasses.replace(SMALL, horizon=10))
    with pytest.raises(ValueError, match="horizon"):
        aggregate([small_run, short])
    with pytest.raises(ValueError):
        aggregate([])


@pytest.mark.parametrize("probs, expected", [
    ([1.0] * 5, 1.0),
    ([0.9] * 8, 0.8078867967299912),      # exp(-0.64 / 3)
    ([0.0] * 3, 0.049787068367863944),    # exp(-3)
])
def test_theorem1_probability(probs, expected):
    assert theorem1_probability(probs) == pytest.approx(expected, rel=1e-12)


def test_theorem1_probability_in_metadata(small_run):
    assert small_run.meta["theorem1_probability"] == pytest.approx(theorem1_probability([0.9] * 4))
