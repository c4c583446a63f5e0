"""Per-channel bandit statistics, exploration schedules and their integer scale-ups."""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np


def _loglog(t):
    return math.log(math.log(t + 1) + 1)


def _delta_inv_loglog(t):
    if t < 1:
        raise ValueError("the 'inv-loglog' delta variant is undefined at t = 0")
    return 1.0 / _loglog(t)


DELTA_VARIANTS = {
    "loglog": lambda t: 1.0 / (_loglog(t) + 1.0),
    "inv-log": lambda t: 1.0 / (math.log(t + 1) + 1.0),
    "inv-loglog": _delta_inv_loglog,
    "logloglog": lambda t: 1.0 / (math.log(_loglog(t) + 1) + 1.0),
}

G_VARIANTS = {
    "default": lambda t, m: math.log(t + 1) + 4.0 * _loglog(t) * m,
    "loglog-only": lambda t, m: 4.0 * _loglog(t) * m,
    "ln-only": lambda t, m: math.log(t + 1),
}


def default_m_bound(num_edges: int, alpha: float) -> int:
    """Cardinality bound ceil(alpha * |E|), at least 1."""
    return max(1, math.ceil(alpha * num_edges))


@dataclass(frozen=True)
class Schedules:
    """Choice of the delta(t) and g(t) sequences plus the solution-size bound."""

    m_bound: int
    delta_variant: str = "loglog"
    g_variant: str = "default"
    alpha: float = 0.5
    ucb_multiplier: float = 1.0

    def __post_init__(self):
        if self.delta_variant not in DELTA_VARIANTS:
            raise ValueError(f"unknown delta variant {self.delta_variant!r}; "
                             f"choose from {sorted(DELTA_VARIANTS)}")
        if self.g_variant not in G_VARIANTS:
            raise ValueError(f"unknown g variant {self.g_variant!r}; choose from {sorted(G_VARIANTS)}")
        if self.m_bound < 1:
            raise ValueError("m_bound must be >= 1")
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError("alpha must lie in [0, 1]")
        if self.ucb_multiplier <= 0:
            raise ValueError("ucb_multiplier must be positive")


def eval_delta(sched: Schedules, t: int) -> float:
    if t < 0:
        raise ValueError("slot index must be >= 0")
    return DELTA_VARIANTS[sched.delta_variant](t)


def eval_g(sched: Schedules, t: int) -> float:
    if t < 0:
        raise ValueError("slot index must be >= 0")
    return G_VARIANTS[sched.g_variant](t, sched.m_bound)


class EdgeStats:
    """Selection counts, empirical means and variance proxies for every channel.

    ``var_proxy`` is ``inf`` for channels that were never selected.
    """

    def __init__(self, num_edges: int, sched: Schedules):
        self.sched = sched
        self.counts = np.zeros(num_edges, dtype=np.int64)
        self.value_sums = np.zeros(num_edges)
        self.means = np.zeros(num_edges)
        self.var_proxy = np.full(num_edges, np.inf)
        self.t = 0

    @property
    def num_edges(self) -> int:
        return self.counts.shape[0]

    def variance_at(self, t: int) -> np.ndarray:
        g = eval_g(self.sched, t) * self.sched.ucb_multiplier ** 2
        out = np.full(self.num_edges, np.inf)
        seen = self.counts > 0
        out[seen] = g / (2.0 * self.counts[seen])
        return out

    def update(self, x, observed, t: int) -> "EdgeStats":
        """Fold in the observations of the selected channels at slot ``t``.

        Only entries of ``observed`` where ``x`` is 1 are read.
        """
        x = np.asarray(x).astype(bool)
        if x.shape != (self.num_edges,):
            raise ValueError("decision vector length mismatch")
        if x.any():
            obs = np.asarray(observed, dtype=float)[x]
            if ((obs < 0) | (obs > 1)).any():
                raise ValueError("observed valuations must lie in [0, 1]")
            self.counts[x] += 1
            self.value_sums[x] += obs
        seen = self.counts > 0
        self.means = np.zeros(self.num_edges)
        self.means[seen] = self.value_sums[seen] / self.counts[seen]
        self.var_proxy = self.variance_at(t)
        self.t = t
        return self

    def snapshot(self) -> dict:
        return {
            "t": self.t,
            "counts": self.counts.tolist(),
            "means": self.means.tolist(),
        }


@dataclass(frozen=True)
class ScaledStats:
    xi: int
    scaled_means: np.ndarray
    scaled_vars: np.ndarray
    s_max: int
    sentinel: int


def _ceil_product(k: int, v: np.ndarray) -> np.ndarray:
    """Exact ceil(k * v) for nonnegative floats ``v``.

    Float products that land within rounding distance of an integer are
    re-evaluated in rational arithmetic.
    """
    p = k * v
    out = np.ceil(p).astype(np.int64)
    near = np.flatnonzero(np.abs(p - np.rint(p)) < 1e-9 * max(1.0, float(np.max(p, initial=0.0))))
    for i in near:
        out[i] = math.ceil(Fraction(k) * Fraction(float(v[i])))
    return out


def scale_arrays(counts, means, xi: int, g: float, m_bound: int) -> ScaledStats:
    """Scale-ups for a given scaling size ``xi`` and exploration level ``g``."""
    counts = np.asarray(counts)
    means = np.asarray(means, dtype=float)
    n = counts.shape[0]
    sentinel = 2 * n * math.ceil(xi * xi * g)
    seen = counts > 0
    up = np.zeros(n, dtype=np.int64)
    up[seen] = _ceil_product(xi, means[seen])
    var = np.full(n, sentinel, dtype=np.int64)
    var[seen] = np.ceil(xi * xi * (g / (2.0 * counts[seen]))).astype(np.int64)
    return ScaledStats(xi=xi, scaled_means=up, scaled_vars=var, s_max=xi * m_bound, sentinel=sentinel)


def scaling_size(sched: Schedules, t: int) -> int:
    return math.ceil(sched.m_bound / eval_delta(sched, t))


def scale(stats: EdgeStats, sched: Schedules, t: int) -> ScaledStats:
    """Integer scale-ups of the statistics for the decision at slot ``t``.

    Unexplored channels get mean 0 and a finite variance sentinel that beats
    any combination of explored channels.
    """
    g = eval_g(sched, t) * sched.ucb_multiplier ** 2
    return scale_arrays(stats.counts, stats.means, scaling_size(sched, t), g, sched.m_bound)
