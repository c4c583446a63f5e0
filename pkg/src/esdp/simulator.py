"""Slot-by-slot simulation of several policies on common random numbers."""
from __future__ import annotations

import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .bipartite import is_feasible
from .config import SimConfig
from .instance import ARRIVAL_STREAM, VALUE_STREAM, ProblemInstance, build_instance, stream
from .knapdp import exact_m_bound, max_weight_feasible
from .policies import make_policy
from .stats import Schedules, default_m_bound
from .workload import sample_arrivals, sample_net_valuations

log = logging.getLogger(__name__)


class ConstraintViolation(RuntimeError):
    """A policy returned a vector breaking capacity or the arrival mask."""


@dataclass
class SlotRecord:
    t: int
    arrivals: np.ndarray
    decisions: dict
    sw: dict
    oracle_value: float
    regret: dict


@dataclass
class RunResult:
    """Per-slot series of one replication; row p of each matrix belongs to ``policies[p]``."""

    policies: tuple
    sw: np.ndarray
    value: np.ndarray
    regret: np.ndarray
    oracle_value: np.ndarray
    wall_ns: np.ndarray
    arrivals: np.ndarray
    decisions: np.ndarray
    meta: dict = field(default_factory=dict)
    stats_trace: list = field(default_factory=list)

    @property
    def horizon(self) -> int:
        return self.sw.shape[1]

    @property
    def cum_sw(self) -> np.ndarray:
        return np.cumsum(self.sw, axis=1)

    @property
    def cum_regret(self) -> np.ndarray:
        return np.cumsum(self.regret, axis=1)

    @property
    def avg_sw(self) -> np.ndarray:
        return self.cum_sw / np.arange(1, self.horizon + 1)

    def row(self, policy: str) -> int:
        return self.policies.index(policy)

    def record(self, t: int) -> SlotRecord:
        j = t - 1
        return SlotRecord(
            t=t,
            arrivals=self.arrivals[j],
            decisions={p: self.decisions[i, j] for i, p in enumerate(self.policies)},
            sw={p: float(self.sw[i, j]) for i, p in enumerate(self.policies)},
            oracle_value=float(self.oracle_value[j]),
            regret={p: float(self.regret[i, j]) for i, p in enumerate(self.policies)},
        )


def theorem1_probability(arrival_probs) -> float:
    """exp(-(|L| - sum rho)^2 / 3), the bound attached to the all-ports-arrive event."""
    p = np.asarray(arrival_probs, dtype=float)
    return math.exp(-((p.size - p.sum()) ** 2) / 3.0)


def make_schedules(cfg: SimConfig, inst: ProblemInstance) -> Schedules:
    if cfg.exact_m_bound:
        m = exact_m_bound(inst.resources)
    else:
        m = default_m_bound(inst.graph.num_edges, cfg.alpha)
    return Schedules(m_bound=m, delta_variant=cfg.delta_variant, g_variant=cfg.g_variant,
                     alpha=cfg.alpha, ucb_multiplier=cfg.ucb_multiplier)


def run(cfg: SimConfig, replication: int = 0, instance: ProblemInstance | None = None) -> RunResult:
    """Simulate every policy in ``cfg.policies`` over one horizon.

    Arrivals and the full valuation vector are drawn once per slot from
    streams that do not depend on which policies run; each policy only sees
    the values of the channels it selected.
    """
    if instance is None:
        instance = ProblemInstance.load(cfg.instance_file) if cfg.instance_file else build_instance(cfg, replication)
    graph, rm, truth = instance.graph, instance.resources, instance.true_means
    sched = make_schedules(cfg, instance)
    policies = [
        make_policy(name, graph, rm, sched=sched, edge_costs=instance.valuations.edge_costs, true_means=truth)
        for name in cfg.policies
    ]
    arr_rng = np.random.default_rng(stream(cfg.seed, replication, ARRIVAL_STREAM))
    val_rng = np.random.default_rng(stream(cfg.seed, replication, VALUE_STREAM))

    T, P, E = cfg.horizon, len(policies), graph.num_edges
    sw = np.zeros((P, T))
    value = np.zeros((P, T))
    regret = np.zeros((P, T))
    oracle_value = np.zeros(T)
    wall = np.zeros((P, T), dtype=np.int64)
    arrivals_log = np.zeros((T, graph.num_ports), dtype=np.int8)
    decisions = np.zeros((P, T, E), dtype=np.int8)
    stats_trace = []

    for t in range(1, T + 1):
        j = t - 1
        arrivals = sample_arrivals(instance.arrivals, arr_rng)
        z = sample_net_valuations(instance.valuations, val_rng)
        arrivals_log[j] = arrivals
        mask = graph.arrival_mask(arrivals)
        x_star, _ = max_weight_feasible(truth, rm, mask)
        best = float(truth @ x_star)
        oracle_value[j] = best
        for i, pol in enumerate(policies):
            t0 = time.perf_counter_ns()
            x = pol.decide(t, arrivals).x
            if cfg.record_timing:
                wall[i, j] = time.perf_counter_ns() - t0
            if not is_feasible(x, rm) or (x[~mask] != 0).any():
                raise ConstraintViolation(
                    f"policy {pol.name} at slot {t}: x={x.tolist()} usage={rm.usage(x).tolist()} "
                    f"capacities={rm.capacities.tolist()} arrivals={arrivals.tolist()}")
            decisions[i, j] = x
            sw[i, j] = float(z @ x)
            value[i, j] = float(truth @ x)
            gap = best - value[i, j]
            if gap < -1e-9:
                raise ConstraintViolation(f"policy {pol.name} beat the oracle at slot {t} by {-gap}")
            regret[i, j] = max(gap, 0.0)
            pol.observe(t, arrivals, x, z)
            if cfg.trace_stats and pol.name == "esdp":
                stats_trace.append(pol.state.stats.snapshot())

    meta = {
        "replication": replication,
        "instance_seed": instance.seed,
        "num_edges": E,
        "capacities": rm.capacities.tolist(),
        "m_bound": sched.m_bound,
        "theorem1_probability": theorem1_probability(instance.arrivals.arrival_probs),
    }
    return RunResult(tuple(cfg.policies), sw, value, regret, oracle_value, wall,
                     arrivals_log, decisions, meta, stats_trace)


def _run_one(args):
    cfg, r = args
    return run(cfg, r)


def run_replications(cfg: SimConfig) -> list[RunResult]:
    jobs = [(cfg, r) for r in range(cfg.replications)]
    if cfg.workers > 1 and cfg.replications > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            return list(pool.map(_run_one, jobs))
    return [_run_one(j) for j in jobs]


@dataclass
class Summary:
    policies: tuple
    mean: dict
    std: dict
    ratio: dict
    meta: dict

    def final(self, series: str) -> dict:
        return {p: float(self.mean[series][i, -1]) for i, p in enumerate(self.policies)}


SERIES = ("sw", "cum_sw", "avg_sw", "regret", "cum_regret")


def aggregate(results: list[RunResult]) -> Summary:
    """Seed mean and standard deviation of every series, plus ESDP/baseline ASW ratios."""
    if not results:
        raise ValueError("nothing to aggregate")
    T, pols = results[0].horizon, results[0].policies
    for r in results:
        if r.horizon != T:
            raise ValueError(f"mismatched horizons: {r.horizon} vs {T}")
        if r.policies != pols:
            raise ValueError("results cover different policy lists")
    mean, std = {}, {}
    for name in SERIES:
        stack = np.stack([getattr(r, name) for r in results])
        mean[name] = stack.mean(axis=0)
        std[name] = stack.std(axis=0)
    ratio = {}
    if "esdp" in pols:
        top = mean["cum_sw"][pols.index("esdp")]
        for i, p in enumerate(pols):
            if p == "esdp":
                continue
            den = mean["cum_sw"][i]
            ratio[p] = np.divide(top, den, out=np.full(T, np.nan), where=den > 0)
    meta = {
        "replications": len(results),
        "horizon": T,
        "theorem1_probability": results[0].meta.get("theorem1_probability"),
        "mean_wall_ns": {p: float(np.mean([r.wall_ns[i].mean() for r in results])) for i, p in enumerate(pols)},
        "instances": [r.meta for r in results],
    }
    return Summary(pols, mean, std, ratio, meta)
