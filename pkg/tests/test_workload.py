import numpy as np
import pytest
from scipy.stats import norm

from esdp.workload import (
    ArrivalModel,
    ValuationModel,
    compute_true_net_means,
    sample_arrivals,
    sample_net_valuations,
    sample_valuation_model,
)


def clamped_normal_mean(mu, sigma, cost):
    """Closed-form E[clamp(N(mu, sigma) - cost, 0, 1)]; independent of the sampler."""
    m = mu - cost
    a, b = (0 - m) / sigma, (1 - m) / sigma
    inside = m * (norm.cdf(b) - norm.cdf(a)) + sigma * (norm.pdf(a) - norm.pdf(b))
    return inside + norm.sf(b)


def test_certain_and_impossible_arrivals():
    rng = np.random.default_rng(0)
    assert sample_arrivals(ArrivalModel(np.ones(5)), rng).tolist() == [1] * 5
    assert sample_arrivals(ArrivalModel(np.zeros(5)), rng).tolist() == [0] * 5


def test_arrival_frequency():
    rng = np.random.default_rng(1)
    am = ArrivalModel(np.full(4, 0.9))
    draws = np.array([sample_arrivals(am, rng) for _ in range(100_000)])
    assert np.abs(draws.mean(axis=0) - 0.9).max() < 0.01


def test_bad_arrival_probability():
    with pytest.raises(ValueError):
        ArrivalModel([0.5, 1.2])


def test_noise_free_valuations_are_exact():
    vm = ValuationModel([0.8, 0.1], [0.0, 0.0], [0.3, 0.9])
    rng = np.random.default_rng(2)
    for _ in range(5):
        z = sample_net_valuations(vm, rng)
        assert z[0] == pytest.approx(0.5, abs=1e-15)
        assert z[1] == 0.0


def test_noise_free_ground_truth():
    vm = compute_true_net_means(ValuationModel([0.8, 0.1, 1.0], [0, 0, 0], [0.3, 0.9, 0.0]), 100_000, seed=0)
    assert vm.true_net_means.tolist() == pytest.approx([0.5, 0.0, 1.0], abs=1e-15)


def test_ground_truth_against_closed_form():
    vm = compute_true_net_means(ValuationModel([0.6, 0.5], [0.3, 0.25], [0.2, 0.0]), 1_000_000, seed=4)
    expected = [clamped_normal_mean(0.6, 0.3, 0.2), clamped_normal_mean(0.5, 0.25, 0.0)]
    assert vm.true_net_means == pytest.approx(expected, abs=0.002)
    assert 0.49 < vm.true_net_means[1] < 0.51


def test_sample_mean_matches_ground_truth():
    vm = compute_true_net_means(ValuationModel([0.6], [0.3], [0.2]), 200_000, seed=5)
    z = sample_net_valuations(vm, np.random.default_rng(6), size=1_000_000)
    assert abs(z.mean() - vm.true_net_means[0]) < 0.005


def test_identical_edges_share_ground_truth():
    vm = compute_true_net_means(ValuationModel([0.7, 0.7], [0.35, 0.35], [0.4, 0.4]), 400_000, seed=9)
    assert abs(vm.true_net_means[0] - vm.true_net_means[1]) < 0.005


def test_too_few_monte_carlo_samples():
    with pytest.raises(ValueError):
        compute_true_net_means(ValuationModel([0.5], [0.1], [0.1]), 1000, seed=0)


def test_valuations_in_unit_interval_and_converge():
    rng = np.random.default_rng(7)
    vm = compute_true_net_means(sample_valuation_model(12, 3, rng), 200_000, seed=8)
    z = sample_net_valuations(vm, np.random.default_rng(10), size=100_000)
    assert z.min() >= 0.0 and z.max() <= 1.0
    assert np.abs(z.mean(axis=0) - vm.true_net_means).max() < 0.01


def test_sampled_model_ranges():
    vm = sample_valuation_model(500, 3, np.random.default_rng(3))
    assert vm.raw_means.min() >= 0.1 and vm.raw_means.max() <= 1.0
    assert np.allclose(vm.raw_stds, vm.raw_means / 2)
    # averaging K = 3 draws of N(0.5, 0.1) shrinks the spread to 0.1 / sqrt(3)
    assert abs(vm.edge_costs.mean() - 0.5) < 0.02
    assert abs(vm.edge_costs.std() - 0.1 / np.sqrt(3)) < 0.01


def test_sum_aggregation_and_unknown_aggregation():
    vm = sample_valuation_model(200, 3, np.random.default_rng(3), cost_aggregation="sum")
    assert vm.edge_costs.max() <= 1.0
    with pytest.raises(ValueError):
        sample_valuation_model(5, 3, np.random.default_rng(3), cost_aggregation="max")


def test_model_round_trip():
    vm = compute_true_net_means(sample_valuation_model(4, 3, np.random.default_rng(1)), 100_000, seed=2)
    back = ValuationModel.from_dict(vm.to_dict())
    assert np.array_equal(back.true_net_means, vm.true_net_means)
    assert np.array_equal(back.edge_costs, vm.edge_costs)
