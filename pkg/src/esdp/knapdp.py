"""Budgeted 0/1 programs over the capacity polytope A x <= c.

For every budget s in {0..s_max} the family problem is

    maximise  var^T x   subject to  A x <= c,  means^T x >= s,  x binary

where ``means``/``var`` are the integer scaled statistics. :func:`solve_family`
fills the table V(s, c', i) = best objective using only edges i..|E|-1 with
residual capacity c' and remaining budget s, one edge layer at a time.

Ties between taking and skipping an edge go to skipping, so every returned
vector is the lexicographically smallest optimum (edge 0 most significant).
The brute-force oracles apply the same rule.
"""
from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass

import numpy as np

from .bipartite import ResourceModel

log = logging.getLogger(__name__)

# -inf for integer tables; far enough from int64 min that one addition cannot wrap.
NEG_INF = np.iinfo(np.int64).min // 4

MAX_BRUTE_EDGES = 20


class InstanceTooLarge(ValueError):
    pass


@dataclass(frozen=True)
class BudgetedInstance:
    requirements: np.ndarray
    capacities: np.ndarray
    scaled_means: np.ndarray
    scaled_vars: np.ndarray
    s_max: int

    def __post_init__(self):
        rm = ResourceModel(self.requirements, self.capacities)
        object.__setattr__(self, "requirements", rm.requirements)
        object.__setattr__(self, "capacities", rm.capacities)
        for name in ("scaled_means", "scaled_vars"):
            v = np.asarray(getattr(self, name))
            if v.shape != (rm.num_edges,):
                raise ValueError(f"{name} must have length {rm.num_edges}")
            if not np.issubdtype(v.dtype, np.integer):
                if not np.array_equal(v, np.round(v)):
                    raise ValueError(f"{name} must be integral")
            v = v.astype(np.int64)
            if (v < 0).any():
                raise ValueError(f"{name} must be nonnegative")
            object.__setattr__(self, name, v)
        if self.s_max < 0:
            raise ValueError("s_max must be >= 0")

    @property
    def num_edges(self) -> int:
        return self.requirements.shape[1]

    @classmethod
    def from_scaled(cls, rm: ResourceModel, scaled) -> "BudgetedInstance":
        return cls(rm.requirements, rm.capacities, scaled.scaled_means, scaled.scaled_vars, scaled.s_max)


class CapacityGrid:
    """All residual-capacity points 0 <= c' <= c, flattened in lexicographic order."""

    def __init__(self, requirements: np.ndarray, capacities: np.ndarray):
        self.shape = tuple(int(c) + 1 for c in capacities)
        self.size = int(np.prod(self.shape, dtype=np.int64))
        points = np.indices(self.shape).reshape(len(self.shape), -1)  # K x G
        self.full = self.size - 1
        # per edge: can it be taken at c', and where does the clipped residual land
        self.valid = np.empty((requirements.shape[1], self.size), dtype=bool)
        self.after = np.empty((requirements.shape[1], self.size), dtype=np.int64)
        for i in range(requirements.shape[1]):
            rest = points - requirements[:, i : i + 1]
            self.valid[i] = (rest >= 0).all(axis=0)
            self.after[i] = np.ravel_multi_index(np.maximum(rest, 0), self.shape)


@dataclass
class DPTable:
    """values[i, s, g]: best objective from edge i on; take[i, s, g]: take edge i there."""

    values: np.ndarray
    take: np.ndarray


class FamilySolution:
    """Optimal vectors and objectives for every budget s in 0..s_max.

    ``objectives[s]`` is ``NEG_INF`` when no vector meets the budget.
    Indexing ``sol[s]`` yields ``(x, objective)`` or ``None`` if infeasible.
    """

    def __init__(self, objectives, vectors=None, table=None, grid=None, inst=None):
        self.objectives = np.asarray(objectives, dtype=np.int64)
        self._vectors = vectors
        self.table = table
        self._grid = grid
        self._inst = inst

    @property
    def s_max(self) -> int:
        return self.objectives.shape[0] - 1

    @property
    def feasible(self) -> np.ndarray:
        return self.objectives != NEG_INF

    def vectors(self) -> np.ndarray:
        """(s_max+1) x |E| matrix of optimal vectors; rows of infeasible s are zero."""
        if self._vectors is None:
            self._vectors = self._backtrack(np.arange(self.s_max + 1))
        return self._vectors

    def vector(self, s: int) -> np.ndarray | None:
        if not self.feasible[s]:
            return None
        if self._vectors is not None:
            return self._vectors[s].copy()
        return self._backtrack(np.array([s]))[0]

    def _backtrack(self, budgets: np.ndarray) -> np.ndarray:
        inst, grid, take = self._inst, self._grid, self.table.take
        n = inst.num_edges
        out = np.zeros((budgets.shape[0], n), dtype=np.int8)
        rows = self.table.values.shape[1]
        live = self.feasible[budgets] & (budgets < rows)
        s = np.where(live, budgets, 0)
        g = np.full(budgets.shape[0], grid.full, dtype=np.int64)
        for i in range(n):
            bit = take[i, s, g] & live
            out[:, i] = bit
            s = np.where(bit, np.maximum(s - inst.scaled_means[i], 0), s)
            g = np.where(bit, grid.after[i][g], g)
        return out

    def __len__(self):
        return self.objectives.shape[0]

    def __getitem__(self, s: int):
        if not 0 <= s <= self.s_max:
            raise IndexError(s)
        x = self.vector(s)
        return None if x is None else (x, int(self.objectives[s]))

    def __iter__(self):
        for s in range(len(self)):
            yield self[s]


def solve_family(inst: BudgetedInstance, debug: bool = False) -> FamilySolution:
    """Solve every budgeted problem s = 0..s_max with one shared table.

    Budgets above sum(scaled_means) cannot be met by any vector; the table
    stops there and the remaining budgets are reported infeasible.
    """
    n = inst.num_edges
    grid = CapacityGrid(inst.requirements, inst.capacities)
    rows = min(inst.s_max, int(inst.scaled_means.sum())) + 1
    budgets = np.arange(rows)

    values = np.empty((n + 1, rows, grid.size), dtype=np.int64)
    take = np.zeros((n, rows, grid.size), dtype=bool)
    values[n] = NEG_INF
    values[n, 0] = 0
    for i in range(n - 1, -1, -1):
        skip = values[i + 1]
        # one flat gather of V(max(s - up_i, 0), after_i(c'), i + 1)
        src = (np.maximum(budgets - inst.scaled_means[i], 0) * grid.size)[:, None] + grid.after[i]
        took = skip.ravel().take(src)
        alive = took != NEG_INF
        took += inst.scaled_vars[i]
        # a clipped residual hides a deficit: such takes are not allowed
        bit = take[i]
        np.greater(took, skip, out=bit)
        bit &= alive
        bit &= grid.valid[i]
        np.copyto(values[i], skip)
        np.copyto(values[i], took, where=bit)

    objectives = np.full(inst.s_max + 1, NEG_INF, dtype=np.int64)
    objectives[:rows] = values[0, :, grid.full]
    sol = FamilySolution(objectives, table=DPTable(values, take), grid=grid, inst=inst)
    if debug:
        for s in range(rows):
            log.debug("s=%d objective=%s", s, "infeasible" if objectives[s] == NEG_INF else objectives[s])
    return sol


def solve_family_reference(inst: BudgetedInstance) -> FamilySolution:
    """Plain-loop rendering of the DP with explicit per-state vectors.

    Iterates s ascending, c' lexicographically ascending and edges descending,
    stores a whole vector per state and undoes a take whose reconstructed
    vector breaks A x <= c'. Quadratic in |E| per state; meant for tests.
    """
    n = inst.num_edges
    a = inst.requirements
    cap = tuple(int(c) for c in inst.capacities)
    up, var = inst.scaled_means, inst.scaled_vars
    V: dict = {}
    X: dict = {}
    points = list(itertools.product(*(range(c + 1) for c in cap)))
    objectives = np.full(inst.s_max + 1, NEG_INF, dtype=np.int64)
    vectors = np.zeros((inst.s_max + 1, n), dtype=np.int8)
    for s in range(inst.s_max + 1):
        for cp in points:
            V[s, cp, n] = 0 if s == 0 else NEG_INF
            X[s, cp, n] = (0,) * n
            for i in range(n - 1, -1, -1):
                if not any(cp):
                    V[s, cp, i] = V[s, cp, i + 1]
                    X[s, cp, i] = X[s, cp, i + 1]
                    continue
                s2 = max(s - int(up[i]), 0)
                c2 = tuple(max(c - int(a[k, i]), 0) for k, c in enumerate(cp))
                sub = V[s2, c2, i + 1]
                took = NEG_INF if sub == NEG_INF else sub + int(var[i])
                V[s, cp, i] = max(took, V[s, cp, i + 1])
                X[s, cp, i] = X[s, cp, i + 1]
                if V[s, cp, i] != V[s, cp, i + 1]:
                    x = list(X[s2, c2, i + 1])
                    x[i] = 1
                    used = a @ np.array(x, dtype=np.int64)
                    if (used > np.array(cp)).any():
                        V[s, cp, i] = V[s, cp, i + 1]
                    else:
                        X[s, cp, i] = tuple(x)
        objectives[s] = V[s, cap, 0]
        if objectives[s] != NEG_INF:
            vectors[s] = X[s, cap, 0]
    return FamilySolution(objectives, vectors=vectors)


def _all_vectors(n: int) -> np.ndarray:
    """Every binary vector of length n, in lexicographic order (edge 0 most significant)."""
    codes = np.arange(1 << n, dtype=np.int64)
    shifts = np.arange(n - 1, -1, -1, dtype=np.int64)
    return ((codes[:, None] >> shifts) & 1).astype(np.int8)


def brute_force_family(inst: BudgetedInstance) -> FamilySolution:
    """Exhaustive enumeration; same lexicographic tie rule as :func:`solve_family`."""
    n = inst.num_edges
    if n > MAX_BRUTE_EDGES:
        raise InstanceTooLarge(f"brute force refuses |E| = {n} > {MAX_BRUTE_EDGES}")
    xs = _all_vectors(n).astype(np.int64)
    fits = (xs @ inst.requirements.T <= inst.capacities).all(axis=1)
    ups = xs @ inst.scaled_means
    objs = xs @ inst.scaled_vars
    objectives = np.full(inst.s_max + 1, NEG_INF, dtype=np.int64)
    vectors = np.zeros((inst.s_max + 1, n), dtype=np.int8)
    for s in range(inst.s_max + 1):
        ok = fits & (ups >= s)
        if not ok.any():
            continue
        j = int(np.argmax(np.where(ok, objs, NEG_INF)))
        objectives[s] = objs[j]
        vectors[s] = xs[j]
    return FamilySolution(objectives, vectors=vectors)


def max_weight_feasible(weights, rm: ResourceModel, allowed=None):
    """Exact max of weights^T x over A x <= c with x_e = 0 wherever ``allowed`` is 0.

    Returns ``(x, value)``. Ties prefer leaving an edge out.
    """
    w = np.asarray(weights, dtype=float)
    n = rm.num_edges
    if w.shape != (n,):
        raise ValueError(f"weights must have length {n}")
    if not np.isfinite(w).all():
        raise ValueError("weights must be finite")
    allowed = np.ones(n, dtype=bool) if allowed is None else np.asarray(allowed).astype(bool)
    grid = CapacityGrid(rm.requirements, rm.capacities)
    values = np.zeros(grid.size)
    take = np.zeros((n, grid.size), dtype=bool)
    for i in range(n - 1, -1, -1):
        if not allowed[i] or w[i] <= 0:
            continue
        took = values[grid.after[i]] + w[i]
        bit = grid.valid[i] & (took > values)
        take[i] = bit
        values = np.where(bit, took, values)
    x = np.zeros(n, dtype=np.int8)
    g = grid.full
    for i in range(n):
        if take[i, g]:
            x[i] = 1
            g = grid.after[i][g]
    return x, float(w @ x)


def max_weight_feasible_brute(weights, rm: ResourceModel, allowed=None):
    w = np.asarray(weights, dtype=float)
    n = rm.num_edges
    if n > MAX_BRUTE_EDGES:
        raise InstanceTooLarge(f"brute force refuses |E| = {n} > {MAX_BRUTE_EDGES}")
    allowed = np.ones(n, dtype=bool) if allowed is None else np.asarray(allowed).astype(bool)
    xs = _all_vectors(n)
    ok = (xs.astype(np.int64) @ rm.requirements.T <= rm.capacities).all(axis=1)
    ok &= ~(xs[:, ~allowed].any(axis=1))
    vals = np.where(ok, xs @ w, -np.inf)
    j = int(np.argmax(vals))
    return xs[j].copy(), float(vals[j])


def exact_m_bound(rm: ResourceModel) -> int:
    """Largest number of channels that fit together, at least 1."""
    x, _ = max_weight_feasible(np.ones(rm.num_edges), rm)
    return max(1, int(x.sum()))


def random_budgeted_instance(rng, max_edges=10, max_types=2, max_cap=3, max_scaled_mean=8,
                             max_scaled_var=40) -> BudgetedInstance:
    """Small random instance for cross-checking the DP against enumeration.

    Every edge consumes at least one unit of some resource; the budget ceiling
    is drawn past the total scaled mean so infeasible budgets are exercised too.
    """
    n = int(rng.integers(0, max_edges + 1))
    k = int(rng.integers(1, max_types + 1))
    a = rng.integers(0, 3, size=(k, n))
    if n:
        a[rng.integers(k, size=n), np.arange(n)] = rng.integers(1, 3, size=n)
    c = rng.integers(0, max_cap + 1, size=k)
    up = rng.integers(0, max_scaled_mean + 1, size=n)
    var = rng.integers(0, max_scaled_var + 1, size=n)
    s_max = int(rng.integers(0, max_scaled_mean * 3 + 2))
    return BudgetedInstance(a, c, up, var, s_max)


def cross_check(num_instances: int, seed: int = 0, **kw) -> list[int]:
    """Indices of random instances where the DP and enumeration disagree."""
    rng = np.random.default_rng(seed)
    bad = []
    for i in range(num_instances):
        inst = random_budgeted_instance(rng, **kw)
        fast, ref = solve_family(inst), brute_force_family(inst)
        if not np.array_equal(fast.objectives, ref.objectives):
            bad.append(i)
    return bad
