"""Job arrivals, noisy channel valuations and per-channel supply costs."""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

COST_AGGREGATIONS = ("mean", "sum")


@dataclass(frozen=True)
class ArrivalModel:
    arrival_probs: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.arrival_probs, dtype=float).reshape(-1)
        if ((p < 0) | (p > 1)).any():
            raise ValueError("arrival probabilities must lie in [0, 1]")
        object.__setattr__(self, "arrival_probs", p)

    @property
    def num_ports(self) -> int:
        return self.arrival_probs.shape[0]


@dataclass(frozen=True)
class ValuationModel:
    """Gaussian raw valuations per channel minus a fixed aggregated supply cost.

    ``true_net_means`` holds the mean of the clamped net valuation and is the
    ground truth used by the omniscient oracle; it stays ``None`` until
    :func:`compute_true_net_means` fills it in.
    """

    raw_means: np.ndarray
    raw_stds: np.ndarray
    edge_costs: np.ndarray
    true_net_means: np.ndarray | None = None

    def __post_init__(self):
        for name in ("raw_means", "raw_stds", "edge_costs"):
            object.__setattr__(self, name, np.asarray(getattr(self, name), dtype=float).reshape(-1))
        n = self.raw_means.shape[0]
        if self.raw_stds.shape[0] != n or self.edge_costs.shape[0] != n:
            raise ValueError("valuation vectors must share length |E|")
        if (self.raw_stds < 0).any():
            raise ValueError("standard deviations must be nonnegative")
        if self.true_net_means is not None:
            m = np.asarray(self.true_net_means, dtype=float).reshape(-1)
            if m.shape[0] != n or ((m < 0) | (m > 1)).any():
                raise ValueError("true_net_means must be a [0, 1] vector of length |E|")
            object.__setattr__(self, "true_net_means", m)

    @property
    def num_edges(self) -> int:
        return self.raw_means.shape[0]

    def to_dict(self) -> dict:
        d = {
            "raw_means": self.raw_means.tolist(),
            "raw_stds": self.raw_stds.tolist(),
            "edge_costs": self.edge_costs.tolist(),
        }
        if self.true_net_means is not None:
            d["true_net_means"] = self.true_net_means.tolist()
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ValuationModel":
        return cls(d["raw_means"], d["raw_stds"], d["edge_costs"], d.get("true_net_means"))


def sample_valuation_model(
    num_edges: int,
    num_resource_types: int,
    rng: np.random.Generator,
    mean_bounds=(0.1, 1.0),
    cost_mean: float = 0.5,
    cost_std: float = 0.1,
    cost_aggregation: str = "mean",
) -> ValuationModel:
    """Raw means uniform in ``mean_bounds`` with std = mean / 2; costs from K normal draws."""
    if cost_aggregation not in COST_AGGREGATIONS:
        raise ValueError(f"cost_aggregation must be one of {COST_AGGREGATIONS}, got {cost_aggregation!r}")
    mu = rng.uniform(mean_bounds[0], mean_bounds[1], size=num_edges)
    draws = rng.normal(cost_mean, cost_std, size=(num_resource_types, num_edges))
    agg = draws.mean(axis=0) if cost_aggregation == "mean" else draws.sum(axis=0)
    return ValuationModel(mu, mu / 2.0, np.clip(agg, 0.0, 1.0))


def sample_arrivals(am: ArrivalModel, rng: np.random.Generator) -> np.ndarray:
    """Independent Bernoulli(rho_l) job indicator per port."""
    return (rng.random(am.num_ports) < am.arrival_probs).astype(np.int8)


def sample_net_valuations(vm: ValuationModel, rng: np.random.Generator, size=None) -> np.ndarray:
    """clamp(N(mu_e, sigma_e) - cost_e, 0, 1) for every edge.

    With ``size`` given, returns ``size`` independent rows.
    """
    shape = (vm.num_edges,) if size is None else (size, vm.num_edges)
    raw = rng.normal(vm.raw_means, vm.raw_stds, size=shape)
    return np.clip(raw - vm.edge_costs, 0.0, 1.0)


def compute_true_net_means(vm: ValuationModel, num_samples: int = 200_000, seed=0,
                           chunk: int = 50_000) -> ValuationModel:
    """Monte Carlo estimate of each edge's clamped net-valuation mean.

    Returns a copy of ``vm`` with ``true_net_means`` set. Noise-free edges get
    their exact value.
    """
    if num_samples < 100_000:
        raise ValueError("num_samples must be at least 1e5")
    rng = np.random.default_rng(seed)
    total = np.zeros(vm.num_edges)
    left = num_samples
    while left > 0:
        n = min(chunk, left)
        total += sample_net_valuations(vm, rng, size=n).sum(axis=0)
        left -= n
    means = total / num_samples
    exact = vm.raw_stds == 0
    means[exact] = np.clip(vm.raw_means[exact] - vm.edge_costs[exact], 0.0, 1.0)
    return replace(vm, true_net_means=np.clip(means, 0.0, 1.0))
