"""Per-round budget allocation policies.

Baselines fix a per-round budget limit (EA, MIA, MDA) or draw the participant
count at random (RA).  BARA explores at random for ``warmup_rounds`` rounds, then picks
the count maximising a GP upper confidence bound on the final accuracy that
Newton extrapolation predicts for each count.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Sequence

import numpy as np

from . import gp
from .auction import (
    ClientQuote,
    RankedQuotes,
    budget_for_count,
    rank_clients,
    spend_curve,
    winners_for_budget,
)
from .environment import STREAM_POLICY, stream
from .interpolation import DEFAULT_MAX_NODES, RecordMatrix, final_accuracy_estimate


class Policy(str, Enum):
    EA = "EA"
    MIA = "MIA"
    MDA = "MDA"
    RA = "RA"
    BARA = "BARA"


@dataclass
class PolicyConfig:
    kind: Policy
    max_rounds: int = 200
    warmup_rounds: int = 40
    kernel: gp.KernelParams = field(default_factory=gp.KernelParams)
    explore_scale: float = 0.8
    explore_rate: float = 0.4
    prior_mean: float = 0.0
    max_nodes: int = DEFAULT_MAX_NODES
    # Stage-1 spend per round is capped at this multiple of budget / max_rounds.
    stage1_cap: float | None = 2.0
    seed: int = 0

    def __post_init__(self):
        self.kind = Policy(self.kind)
        if self.max_rounds < 1:
            raise ValueError("max_rounds must be >= 1")
        if not 0 <= self.warmup_rounds < self.max_rounds:
            raise ValueError("warmup_rounds must satisfy 0 <= warmup_rounds < max_rounds")
        if self.max_nodes < 1:
            raise ValueError("max_nodes must be >= 1")


@dataclass
class BudgetLedger:
    total_budget: float
    spent: float = 0.0
    per_round: list[tuple[int, int, float]] = field(default_factory=list)
    per_arm_spend: dict[int, tuple[float, int]] = field(default_factory=dict)

    @property
    def remaining(self) -> float:
        return self.total_budget - self.spent

    def can_afford(self, cost: float) -> bool:
        return math.fsum([*(c for _, _, c in self.per_round), cost]) <= self.total_budget

    def charge(self, round: int, arm: int, cost: float) -> None:
        if not self.can_afford(cost):
            raise ValueError(f"round {round} would exceed the total budget")
        self.per_round.append((round, arm, cost))
        self.spent = math.fsum(c for _, _, c in self.per_round)
        total, count = self.per_arm_spend.get(arm, (0.0, 0))
        self.per_arm_spend[arm] = (total + cost, count + 1)


def round_budget_baseline(kind, t: int, max_rounds: int, budget: float) -> float:
    kind = Policy(kind)
    if not 1 <= t <= max_rounds:
        raise ValueError(f"round {t} outside [1, {max_rounds}]")
    if kind is Policy.EA:
        return budget / max_rounds
    if kind is Policy.MIA:
        return 2.0 * budget * t / max_rounds**2
    if kind is Policy.MDA:
        return -2.0 * budget * t / max_rounds**2 + 2.0 * budget / max_rounds
    raise ValueError(f"{kind.value} has no closed-form round budget")


def estimate_horizon(
    ledger: BudgetLedger, arm: int, current_round_cost: float, max_rounds: int | None = None
) -> int:
    """Rounds affordable with ``arm``: total budget over its average round cost.

    The average covers past rounds that used ``arm`` plus the current cost.
    """
    total, count = ledger.per_arm_spend.get(arm, (0.0, 0))
    mean_cost = (total + current_round_cost) / (count + 1)
    horizon = max(1, math.floor(ledger.total_budget / mean_cost))
    if max_rounds is not None:
        horizon = min(horizon, max_rounds)
    return horizon


class Predictor:
    """Record matrix plus GP inputs accumulated over executed rounds."""

    def __init__(self, n_arms: int, initial_accuracy: float, config: PolicyConfig):
        self.initial_accuracy = initial_accuracy
        self.config = config
        self.matrix = RecordMatrix(n_arms)
        self.gp = gp.GpState(params=config.kernel, prior_mean=config.prior_mean)

    def observe(self, round: int, arm: int, delta: float) -> None:
        self.matrix.record(round, arm, delta)
        self.gp.add(round, arm)

    def arm_estimate(self, arm: int, horizon: int) -> float:
        return final_accuracy_estimate(self.matrix, arm, horizon, self.initial_accuracy, self.config.max_nodes)

    def observation_values(self, ledger: BudgetLedger, costs: np.ndarray) -> np.ndarray:
        """Current final-accuracy estimate for each observation's arm.

        Recomputed from the latest matrix every call, so early observations
        benefit from later records.
        """
        per_arm = {}
        for arm in self.matrix.arms():
            h = estimate_horizon(ledger, arm, float(costs[arm - 1]), self.config.max_rounds)
            per_arm[arm] = self.arm_estimate(arm, h)
        return np.array([per_arm[a] for a in self.gp.arms])

    def posterior(self, ledger: BudgetLedger, costs: np.ndarray, query_round: int) -> gp.Posterior:
        arms = range(1, self.matrix.n_arms + 1)
        values = self.observation_values(ledger, costs)
        return gp.posterior(self.gp, arms, values, query_round=query_round)


class Allocator:
    """One policy instance driving one simulation run."""

    def __init__(self, config: PolicyConfig, n_clients: int, budget: float, initial_accuracy: float = 0.0):
        if n_clients < 2:
            raise ValueError("need at least two clients")
        self.config = config
        self.n_clients = n_clients
        self.budget = budget
        self.rng = stream(config.seed, STREAM_POLICY)
        self.predictor = Predictor(n_clients - 1, initial_accuracy, config)
        self.stopped = False
        self.last_posterior: gp.Posterior | None = None

    def _random_arm(self) -> int:
        return int(self.rng.integers(1, self.n_clients))

    def _stage2_arm(self, t: int, ranked: RankedQuotes, ledger: BudgetLedger) -> int:
        post = self.predictor.posterior(ledger, spend_curve(ranked), query_round=t)
        self.last_posterior = post
        return gp.ucb_select(post, t, self.config.explore_scale, self.config.explore_rate)

    def decide(self, t: int, quotes: Sequence[ClientQuote] | RankedQuotes, ledger: BudgetLedger) -> int:
        """Participant count for round ``t``; 0 means nobody is recruited.

        After a 0, ``self.stopped`` tells whether the run must terminate
        (the total budget cannot cover the chosen count) or merely skip the
        round (the per-round limit is below the cheapest winner).
        """
        cfg = self.config
        ranked = quotes if isinstance(quotes, RankedQuotes) else rank_clients(quotes)
        if len(ranked) != self.n_clients:
            raise ValueError(f"expected {self.n_clients} quotes, got {len(ranked)}")
        kind = cfg.kind
        if kind in (Policy.EA, Policy.MIA, Policy.MDA):
            limit = round_budget_baseline(kind, t, cfg.max_rounds, self.budget)
            n = winners_for_budget(ranked, limit)
        elif kind is Policy.RA:
            n = self._random_arm()
        elif t <= cfg.warmup_rounds:
            n = self._random_arm()
            if cfg.stage1_cap is not None:
                cap = cfg.stage1_cap * self.budget / cfg.max_rounds
                n = min(n, max(1, winners_for_budget(ranked, cap)))
        else:
            n = self._stage2_arm(t, ranked, ledger)
        if n == 0:
            return 0
        if not ledger.can_afford(budget_for_count(ranked, n)):
            self.stopped = True
            return 0
        return n

    def observe(self, t: int, arm: int, delta: float) -> None:
        self.predictor.observe(t, arm, delta)

    def estimate(self, arm: int, horizon: int) -> float:
        return self.predictor.arm_estimate(arm, horizon)
