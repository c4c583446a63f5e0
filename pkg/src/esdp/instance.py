"""A complete problem instance: graph, resources, arrivals and valuations."""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .bipartite import BipartiteGraph, ResourceModel, build_random_graph, sample_resource_model
from .workload import ArrivalModel, ValuationModel, compute_true_net_means, sample_valuation_model

FORMAT_VERSION = 1


@dataclass(frozen=True)
class ProblemInstance:
    graph: BipartiteGraph
    resources: ResourceModel
    arrivals: ArrivalModel
    valuations: ValuationModel
    seed: list | None = None

    def __post_init__(self):
        if self.resources.num_edges != self.graph.num_edges:
            raise ValueError("resource model and graph disagree on |E|")
        if self.valuations.num_edges != self.graph.num_edges:
            raise ValueError("valuation model and graph disagree on |E|")
        if self.arrivals.num_ports != self.graph.num_ports:
            raise ValueError("arrival model and graph disagree on |L|")

    @property
    def true_means(self) -> np.ndarray:
        if self.valuations.true_net_means is None:
            raise ValueError("instance has no ground-truth means")
        return self.valuations.true_net_means

    def to_dict(self) -> dict:
        d = {"format": FORMAT_VERSION, "seed": self.seed}
        d.update(self.graph.to_dict())
        d.update(self.resources.to_dict())
        d["arrival_probs"] = self.arrivals.arrival_probs.tolist()
        d.update(self.valuations.to_dict())
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ProblemInstance":
        return cls(
            BipartiteGraph.from_dict(d),
            ResourceModel.from_dict(d),
            ArrivalModel(d["arrival_probs"]),
            ValuationModel.from_dict(d),
            d.get("seed"),
        )

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=1, sort_keys=True) + "\n"

    def save(self, path):
        Path(path).write_text(self.dumps())

    @classmethod
    def load(cls, path) -> "ProblemInstance":
        return cls.from_dict(json.loads(Path(path).read_text()))


def stream(seed: int, replication: int, purpose: int) -> np.random.SeedSequence:
    """Independent, policy-agnostic random stream for one purpose of one replication."""
    return np.random.SeedSequence(seed, spawn_key=(replication, purpose))


# purposes 0-3 build the instance; the simulator uses the rest
GRAPH, RESOURCES, VALUATIONS, MONTE_CARLO, ARRIVAL_STREAM, VALUE_STREAM = range(6)


def build_instance(cfg, replication: int = 0) -> ProblemInstance:
    """Sample the instance of one replication from a :class:`~esdp.config.SimConfig`."""
    graph = build_random_graph(cfg.num_ports, cfg.num_servers, cfg.edge_prob,
                               stream(cfg.seed, replication, GRAPH))
    rm = sample_resource_model(
        graph.num_edges, cfg.num_resource_types,
        np.random.default_rng(stream(cfg.seed, replication, RESOURCES)),
        req_bounds=(cfg.req_lo, cfg.req_hi), cap_bounds=(cfg.cap_lo, cfg.cap_hi),
        capacity_scale=cfg.capacity_scale,
    )
    vm = sample_valuation_model(
        graph.num_edges, cfg.num_resource_types,
        np.random.default_rng(stream(cfg.seed, replication, VALUATIONS)),
        mean_bounds=(cfg.mean_lo, cfg.mean_hi), cost_mean=cfg.cost_mean,
        cost_std=cfg.cost_std, cost_aggregation=cfg.cost_aggregation,
    )
    vm = compute_true_net_means(vm, cfg.mc_samples, stream(cfg.seed, replication, MONTE_CARLO))
    am = ArrivalModel(np.full(cfg.num_ports, cfg.arrival_prob))
    return ProblemInstance(graph, rm, am, vm, [cfg.seed, replication])
