"""Flat ``key = value`` experiment configuration with typed validation."""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass, fields
from pathlib import Path

from .policies import POLICY_NAMES
from .stats import DELTA_VARIANTS, G_VARIANTS
from .workload import COST_AGGREGATIONS


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class SimConfig:
    horizon: int = 2000
    seed: int = 0
    replications: int = 10
    policies: tuple = ("esdp", "hswf", "lcf", "lwtf")
    # graph and resources
    num_ports: int = 8
    num_servers: int = 40
    edge_prob: float = 0.1
    num_resource_types: int = 3
    req_lo: int = 1
    req_hi: int = 2
    cap_lo: int = 1
    cap_hi: int = 2
    capacity_scale: float = 1.0
    # workload
    arrival_prob: float = 0.9
    mean_lo: float = 0.1
    mean_hi: float = 1.0
    cost_mean: float = 0.5
    cost_std: float = 0.1
    cost_aggregation: str = "mean"
    mc_samples: int = 200_000
    # schedules
    alpha: float = 0.5
    delta_variant: str = "loglog"
    g_variant: str = "default"
    ucb_multiplier: float = 1.0
    exact_m_bound: bool = False
    # execution and output
    workers: int = 1
    record_timing: bool = False
    trace_stats: bool = False
    instance_file: str = ""

    def __post_init__(self):
        try:
            self._check()
        except ConfigError:
            raise
        except (TypeError, ValueError) as exc:
            raise ConfigError(str(exc)) from exc

    def _check(self):
        def need(cond, key, msg):
            if not cond:
                raise ConfigError(f"{key}: {msg}")

        need(self.horizon >= 1, "horizon", "must be >= 1")
        need(self.replications >= 1, "replications", "must be >= 1")
        need(self.num_ports >= 1, "num_ports", "must be >= 1")
        need(self.num_servers >= 1, "num_servers", "must be >= 1")
        need(0 <= self.edge_prob <= 1, "edge_prob", "must lie in [0, 1]")
        need(0 <= self.arrival_prob <= 1, "arrival_prob", "must lie in [0, 1]")
        need(self.num_resource_types >= 1, "num_resource_types", "must be >= 1")
        need(1 <= self.req_lo <= self.req_hi, "req_lo", "need 1 <= req_lo <= req_hi")
        need(0 <= self.cap_lo <= self.cap_hi, "cap_lo", "need 0 <= cap_lo <= cap_hi")
        need(self.capacity_scale > 0, "capacity_scale", "must be positive")
        need(0 <= self.mean_lo <= self.mean_hi, "mean_lo", "need 0 <= mean_lo <= mean_hi")
        need(self.cost_std >= 0, "cost_std", "must be >= 0")
        need(self.cost_aggregation in COST_AGGREGATIONS, "cost_aggregation",
             f"must be one of {', '.join(COST_AGGREGATIONS)}")
        need(self.mc_samples >= 100_000, "mc_samples", "must be >= 100000")
        need(0 <= self.alpha <= 1, "alpha", "must lie in [0, 1]")
        need(self.delta_variant in DELTA_VARIANTS, "delta_variant",
             f"must be one of {', '.join(DELTA_VARIANTS)}")
        need(self.g_variant in G_VARIANTS, "g_variant", f"must be one of {', '.join(G_VARIANTS)}")
        need(self.ucb_multiplier > 0, "ucb_multiplier", "must be positive")
        need(self.workers >= 1, "workers", "must be >= 1")
        need(len(self.policies) >= 1, "policies", "need at least one policy")
        for p in self.policies:
            need(p in POLICY_NAMES, "policies", f"unknown policy {p!r}; choose from {', '.join(POLICY_NAMES)}")
        need(len(set(self.policies)) == len(self.policies), "policies", "duplicate policy")


FIELD_TYPES = {f.name: type(f.default) for f in fields(SimConfig)}


def _coerce(key: str, raw: str):
    if key not in FIELD_TYPES:
        raise ConfigError(f"{key}: unknown configuration key")
    kind = FIELD_TYPES[key]
    raw = raw.strip()
    try:
        if kind is bool:
            low = raw.lower()
            if low in ("1", "true", "yes", "on"):
                return True
            if low in ("0", "false", "no", "off"):
                return False
            raise ValueError(raw)
        if kind is tuple:
            return tuple(p.strip() for p in raw.split(",") if p.strip())
        if kind is int:
            return int(raw)
        if kind is float:
            return float(raw)
        return raw
    except ValueError:
        raise ConfigError(f"{key}: cannot parse {raw!r} as {kind.__name__}") from None


def parse_pairs(lines) -> dict:
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    out = {}
    for n, line in enumerate(lines, 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {n}: expected key = value, got {line!r}")
        key, value = line.split("=", 1)
        out[key.strip()] = value.strip()
    return out


def config_from_pairs(pairs: dict, base: SimConfig | None = None) -> SimConfig:
    values = {k: _coerce(k, v) for k, v in pairs.items()}
    return dataclasses.replace(base or SimConfig(), **values)


def load_config(path=None, overrides=()) -> SimConfig:
    pairs = parse_pairs(Path(path).read_text().splitlines()) if path else {}
    cfg = config_from_pairs(pairs)
    return apply_overrides(cfg, overrides)


def apply_overrides(cfg: SimConfig, overrides) -> SimConfig:
    pairs = {}
    for item in overrides:
        if "=" not in item:
            raise ConfigError(f"override {item!r} is not key=value")
        k, v = item.split("=", 1)
        pairs[k.strip()] = v
    return config_from_pairs(pairs, cfg) if pairs else cfg


def dump_config(cfg: SimConfig) -> str:
    lines = []
    for f in fields(SimConfig):
        v = getattr(cfg, f.name)
        if isinstance(v, tuple):
            v = ",".join(v)
        elif isinstance(v, bool):
            v = "true" if v else "false"
        elif isinstance(v, float):
            v = repr(v)
        lines.append(f"{f.name} = {v}")
    return "\n".join(lines) + "\n"


def config_dict(cfg: SimConfig) -> dict:
    d = dataclasses.asdict(cfg)
    d["policies"] = list(cfg.policies)
    return d
