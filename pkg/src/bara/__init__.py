"""Reward-budget allocation across federated-learning rounds."""

from .allocator import Allocator, BudgetLedger, Policy, PolicyConfig
from .auction import ClientQuote, rank_clients, run_auction
from .environment import SyntheticWorld, TraceWorld, oracle_best_arm
from .gp import KernelParams
from .harness import RunConfig, batch, regret_series, run

__all__ = [
    "Allocator",
    "BudgetLedger",
    "ClientQuote",
    "KernelParams",
    "Policy",
    "PolicyConfig",
    "RunConfig",
    "SyntheticWorld",
    "TraceWorld",
    "batch",
    "oracle_best_arm",
    "rank_clients",
    "regret_series",
    "run",
    "run_auction",
]

__version__ = "0.1.0"
