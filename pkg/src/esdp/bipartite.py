"""Port/server bipartite graph, resource requirements and feasibility."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class BipartiteGraph:
    """Ports (job types) on the left, servers on the right, channels as edges.

    Edge ``i`` of ``edges`` is coordinate ``i`` of every decision vector.
    """

    num_ports: int
    num_servers: int
    edges: tuple[tuple[int, int], ...]
    port_edges: tuple[tuple[int, ...], ...] = field(init=False, repr=False)
    server_edges: tuple[tuple[int, ...], ...] = field(init=False, repr=False)

    def __post_init__(self):
        edges = tuple((int(l), int(r)) for l, r in self.edges)
        if len(set(edges)) != len(edges):
            raise ValueError("duplicate channel in edge list")
        by_port = [[] for _ in range(self.num_ports)]
        by_server = [[] for _ in range(self.num_servers)]
        for i, (l, r) in enumerate(edges):
            if not (0 <= l < self.num_ports and 0 <= r < self.num_servers):
                raise ValueError(f"edge {i} = {(l, r)} out of range")
            by_port[l].append(i)
            by_server[r].append(i)
        object.__setattr__(self, "edges", edges)
        object.__setattr__(self, "port_edges", tuple(tuple(p) for p in by_port))
        object.__setattr__(self, "server_edges", tuple(tuple(s) for s in by_server))

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    @property
    def edge_ports(self) -> np.ndarray:
        """Port id of every edge, as an int array of length |E|."""
        return np.array([l for l, _ in self.edges], dtype=np.int64)

    def arrival_mask(self, arrivals) -> np.ndarray:
        """Edges whose port has a job this slot."""
        arrivals = np.asarray(arrivals, dtype=bool)
        if arrivals.shape != (self.num_ports,):
            raise ValueError(f"arrivals must have length {self.num_ports}")
        if self.num_edges == 0:
            return np.zeros(0, dtype=bool)
        return arrivals[self.edge_ports]

    def to_dict(self) -> dict:
        return {
            "ports": self.num_ports,
            "servers": self.num_servers,
            "edges": [list(e) for e in self.edges],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "BipartiteGraph":
        return cls(int(d["ports"]), int(d["servers"]), tuple(tuple(e) for e in d["edges"]))


@dataclass(frozen=True)
class ResourceModel:
    """Requirement matrix A (K x |E|) and capacity vector c (K)."""

    requirements: np.ndarray
    capacities: np.ndarray

    def __post_init__(self):
        a = np.array(self.requirements, dtype=np.int64, ndmin=2)
        c = np.array(self.capacities, dtype=np.int64).reshape(-1)
        if a.shape[0] != c.shape[0]:
            raise ValueError(f"requirements have {a.shape[0]} rows but {c.shape[0]} capacities")
        if (a < 0).any() or (c < 0).any():
            raise ValueError("requirements and capacities must be nonnegative")
        if a.shape[1] and (a.max(axis=0) < 1).any():
            bad = int(np.flatnonzero(a.max(axis=0) < 1)[0])
            raise ValueError(f"edge {bad} consumes no resource")
        a.setflags(write=False)
        c.setflags(write=False)
        object.__setattr__(self, "requirements", a)
        object.__setattr__(self, "capacities", c)

    @property
    def num_resource_types(self) -> int:
        return self.capacities.shape[0]

    @property
    def num_edges(self) -> int:
        return self.requirements.shape[1]

    def usage(self, x) -> np.ndarray:
        x = np.asarray(x)
        if x.shape != (self.num_edges,):
            raise ValueError(f"decision vector has shape {x.shape}, expected ({self.num_edges},)")
        return self.requirements @ x.astype(np.int64)

    def to_dict(self) -> dict:
        return {
            "requirements": self.requirements.tolist(),
            "capacities": self.capacities.tolist(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ResourceModel":
        reqs = d["requirements"]
        caps = d["capacities"]
        # K rows survive even with zero edges
        a = np.array(reqs, dtype=np.int64).reshape(len(caps), -1)
        return cls(a, np.array(caps, dtype=np.int64))


def is_feasible(x, rm: ResourceModel) -> bool:
    """True iff A x <= c componentwise. ``x`` must be a 0/1 vector of length |E|."""
    x = np.asarray(x)
    if x.shape != (rm.num_edges,):
        raise ValueError(f"decision vector has shape {x.shape}, expected ({rm.num_edges},)")
    if not np.isin(x, (0, 1)).all():
        raise ValueError("decision vector must be binary")
    return bool((rm.usage(x) <= rm.capacities).all())


def build_random_graph(num_ports: int, num_servers: int, edge_prob: float, seed) -> BipartiteGraph:
    """Sample each (port, server) pair independently with probability ``edge_prob``.

    Ports left without any channel get one uniformly chosen server so that every
    port can be served. Edges are returned in lexicographic (port, server) order.
    """
    if num_ports < 1 or num_servers < 1:
        raise ValueError("need at least one port and one server")
    if not 0.0 <= edge_prob <= 1.0:
        raise ValueError(f"edge_prob must lie in [0, 1], got {edge_prob}")
    rng = np.random.default_rng(seed)
    present = rng.random((num_ports, num_servers)) < edge_prob
    for l in range(num_ports):
        if not present[l].any():
            present[l, rng.integers(num_servers)] = True
    edges = tuple((int(l), int(r)) for l, r in zip(*np.nonzero(present)))
    return BipartiteGraph(num_ports, num_servers, edges)


def sample_resource_model(
    num_edges: int,
    num_resource_types: int,
    rng: np.random.Generator,
    req_bounds=(1, 2),
    cap_bounds=(1, 2),
    capacity_scale: float = 1.0,
) -> ResourceModel:
    """Draw integer requirements and capacities uniformly within the given bounds.

    Each capacity is raised to the largest single-edge requirement of its type so
    that every channel can be dispatched on its own.
    """
    lo, hi = int(np.floor(req_bounds[0])), int(np.ceil(req_bounds[1]))
    if lo < 1 or hi < lo:
        raise ValueError(f"bad requirement bounds {req_bounds}")
    a = rng.integers(lo, hi + 1, size=(num_resource_types, num_edges))
    clo, chi = int(np.floor(cap_bounds[0])), int(np.ceil(cap_bounds[1]))
    if clo < 0 or chi < clo:
        raise ValueError(f"bad capacity bounds {cap_bounds}")
    c = rng.integers(clo, chi + 1, size=num_resource_types)
    c = np.ceil(c * capacity_scale).astype(np.int64)
    if num_edges:
        c = np.maximum(c, a.max(axis=1))
    return ResourceModel(a, c)
