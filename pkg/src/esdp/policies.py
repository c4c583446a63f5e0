"""Dispatch policies: ESDP, three greedy baselines and the omniscient oracle.

Every policy exposes ``decide(t, arrivals) -> PolicyDecision`` and
``observe(t, arrivals, x, values)``; the latter receives the full valuation
vector but only reads the entries of selected channels.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .bipartite import BipartiteGraph, ResourceModel
from .knapdp import NEG_INF, BudgetedInstance, max_weight_feasible, solve_family
from .stats import EdgeStats, Schedules, scale

POLICY_NAMES = ("esdp", "hswf", "lcf", "lwtf", "oracle")


@dataclass
class PolicyDecision:
    x: np.ndarray
    diagnostics: dict = field(default_factory=dict)


@dataclass
class ESDPState:
    stats: EdgeStats
    sched: Schedules
    t: int = 0


def esdp_decide(state: ESDPState, arrivals, rm: ResourceModel, graph: BipartiteGraph,
                t: int | None = None) -> PolicyDecision:
    """Solve the budgeted family on the full capacity polytope, pick the best
    budget by s + sqrt(objective(s)), then drop channels of ports without a job."""
    t = state.t + 1 if t is None else t
    scaled = scale(state.stats, state.sched, t)
    fam = solve_family(BudgetedInstance.from_scaled(rm, scaled))
    s_star, index = best_budget(fam.objectives)
    x = fam.vector(s_star)
    x[~graph.arrival_mask(arrivals)] = 0
    return PolicyDecision(x, {"s_star": s_star, "index": index, "xi": scaled.xi})


def best_budget(objectives) -> tuple[int, float]:
    """Budget maximising s + sqrt(objective(s)) over feasible s; smallest s on ties."""
    objectives = np.asarray(objectives)
    ok = np.flatnonzero(objectives != NEG_INF)
    assert ok.size and ok[0] == 0, "budget s = 0 is always met by the empty vector"
    score = ok + np.sqrt(objectives[ok].astype(float))
    j = int(np.argmax(score))
    return int(ok[j]), float(score[j])


class BaselineState:
    """Running averages of observed values and per-port waiting counters.

    Deliberately holds no variance information.
    """

    def __init__(self, num_edges: int, num_ports: int):
        self.counts = np.zeros(num_edges, dtype=np.int64)
        self.sums = np.zeros(num_edges)
        self.waiting = np.zeros(num_ports, dtype=np.int64)

    @property
    def estimates(self) -> np.ndarray:
        est = np.zeros_like(self.sums)
        seen = self.counts > 0
        est[seen] = self.sums[seen] / self.counts[seen]
        return est

    def observe(self, arrivals, x, values, graph: BipartiteGraph):
        x = np.asarray(x).astype(bool)
        self.counts[x] += 1
        self.sums[x] += np.asarray(values, dtype=float)[x]
        served = np.zeros(graph.num_ports, dtype=bool)
        served[graph.edge_ports[x]] = True
        arrived = np.asarray(arrivals).astype(bool)
        self.waiting[served] = 0
        self.waiting[arrived & ~served] += 1


def _greedy_fill(ports, channel, rm: ResourceModel) -> np.ndarray:
    """Walk ports in order and dispatch each one's channel if it still fits."""
    x = np.zeros(rm.num_edges, dtype=np.int8)
    free = rm.capacities.copy()
    for l in ports:
        need = rm.requirements[:, channel[l]]
        if (need <= free).all():
            x[channel[l]] = 1
            free = free - need
    return x


def _pick_channel(graph: BipartiteGraph, arrivals, score):
    """Highest-scoring channel of every arrived port (lowest edge index on ties)."""
    pick = {}
    for l in np.flatnonzero(np.asarray(arrivals)):
        edges = graph.port_edges[l]
        if edges:
            pick[int(l)] = edges[int(np.argmax(score[list(edges)]))]
    return pick


def hswf_decide(state: BaselineState, arrivals, rm: ResourceModel, graph: BipartiteGraph) -> PolicyDecision:
    est = state.estimates
    best = _pick_channel(graph, arrivals, est)
    order = sorted(best, key=lambda l: (-est[best[l]], l))
    return PolicyDecision(_greedy_fill(order, best, rm), {"ranks": order})


def lcf_decide(state: BaselineState, arrivals, rm: ResourceModel, graph: BipartiteGraph,
               edge_costs=None) -> PolicyDecision:
    costs = np.asarray(edge_costs, dtype=float)
    cheapest = _pick_channel(graph, arrivals, -costs)
    order = sorted(cheapest, key=lambda l: (costs[cheapest[l]], l))
    return PolicyDecision(_greedy_fill(order, cheapest, rm), {"ranks": order})


def lwtf_decide(state: BaselineState, arrivals, rm: ResourceModel, graph: BipartiteGraph) -> PolicyDecision:
    best = _pick_channel(graph, arrivals, state.estimates)
    order = sorted(best, key=lambda l: (-state.waiting[l], l))
    return PolicyDecision(_greedy_fill(order, best, rm), {"ranks": order})


def oracle_decide(true_means, arrivals, rm: ResourceModel, graph: BipartiteGraph) -> PolicyDecision:
    x, value = max_weight_feasible(true_means, rm, graph.arrival_mask(arrivals))
    return PolicyDecision(x, {"value": value})


class Policy:
    name = ""

    def __init__(self, graph: BipartiteGraph, rm: ResourceModel):
        self.graph = graph
        self.rm = rm

    def decide(self, t: int, arrivals) -> PolicyDecision:
        raise NotImplementedError

    def observe(self, t: int, arrivals, x, values):
        pass


class ESDP(Policy):
    name = "esdp"

    def __init__(self, graph, rm, sched: Schedules):
        super().__init__(graph, rm)
        self.state = ESDPState(EdgeStats(graph.num_edges, sched), sched)

    def decide(self, t, arrivals):
        return esdp_decide(self.state, arrivals, self.rm, self.graph, t)

    def observe(self, t, arrivals, x, values):
        self.state.stats.update(x, values, t)
        self.state.t = t


class _Baseline(Policy):
    def __init__(self, graph, rm):
        super().__init__(graph, rm)
        self.state = BaselineState(graph.num_edges, graph.num_ports)

    def observe(self, t, arrivals, x, values):
        self.state.observe(arrivals, x, values, self.graph)


class HSWF(_Baseline):
    name = "hswf"

    def decide(self, t, arrivals):
        return hswf_decide(self.state, arrivals, self.rm, self.graph)


class LCF(_Baseline):
    name = "lcf"

    def __init__(self, graph, rm, edge_costs):
        super().__init__(graph, rm)
        self.edge_costs = np.asarray(edge_costs, dtype=float)

    def decide(self, t, arrivals):
        return lcf_decide(self.state, arrivals, self.rm, self.graph, self.edge_costs)


class LWTF(_Baseline):
    name = "lwtf"

    def decide(self, t, arrivals):
        return lwtf_decide(self.state, arrivals, self.rm, self.graph)


class Oracle(Policy):
    name = "oracle"

    def __init__(self, graph, rm, true_means):
        super().__init__(graph, rm)
        self.true_means = np.asarray(true_means, dtype=float)

    def decide(self, t, arrivals):
        return oracle_decide(self.true_means, arrivals, self.rm, self.graph)


def make_policy(name: str, graph, rm, *, sched=None, edge_costs=None, true_means=None) -> Policy:
    if name == "esdp":
        return ESDP(graph, rm, sched)
    if name == "hswf":
        return HSWF(graph, rm)
    if name == "lcf":
        return LCF(graph, rm, edge_costs)
    if name == "lwtf":
        return LWTF(graph, rm)
    if name == "oracle":
        return Oracle(graph, rm, true_means)
    raise ValueError(f"unknown policy {name!r}; choose from {', '.join(POLICY_NAMES)}")


def optimistic_index(means, var, x) -> float:
    """Optimistic index means^T x + sqrt(var^T x)."""
    x = np.asarray(x, dtype=float)
    return float(np.asarray(means) @ x + math.sqrt(float(np.asarray(var) @ x)))
