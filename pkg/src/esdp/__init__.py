"""Online dispatch of gang-scheduled jobs on a bipartite port/server graph,
learned with a combinatorial semi-bandit index and an exact budgeted DP."""
from .bipartite import BipartiteGraph, ResourceModel, is_feasible
from .config import ConfigError, SimConfig, load_config
from .instance import ProblemInstance, build_instance
from .knapdp import BudgetedInstance, brute_force_family, max_weight_feasible, solve_family
from .simulator import RunResult, aggregate, run, run_replications, theorem1_probability
from .stats import EdgeStats, Schedules

__version__ = "0.1.0"

__all__ = [
    "BipartiteGraph", "ResourceModel", "is_feasible", "ConfigError", "SimConfig", "load_config",
    "ProblemInstance", "build_instance", "BudgetedInstance", "brute_force_family",
    "max_weight_feasible", "solve_family", "RunResult", "aggregate", "run", "run_replications",
    "theorem1_probability", "EdgeStats", "Schedules",
]
