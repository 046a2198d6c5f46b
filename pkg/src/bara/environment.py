"""Simulated federated-learning worlds.

A world produces the clients' quotes for a round and the accuracy change a
round yields for a given participant count.  ``SyntheticWorld`` uses a
parametric saturating learning curve; ``TraceWorld`` replays a recorded
``(round, arm) -> delta`` table from CSV.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .auction import ClientQuote, rank_clients, spend_curve

# Fixed labels that separate the random streams derived from one seed.
STREAM_BIDS = 0x6269
STREAM_NOISE = 0x6E6F
STREAM_POLICY = 0x706F


def stream(seed: int, label: int, *extra: int) -> np.random.Generator:
    return np.random.default_rng([label, int(seed), *map(int, extra)])


class TraceError(ValueError):
    pass


@dataclass
class SyntheticWorld:
    """Saturating learning curve whose asymptote and rate grow with n.

    asymptote(n) = asymptote_max * (1 - asymptote_gap * exp(-n / asymptote_scale))
    rate(n)      = rate_base + rate_slope * n
    """

    n_clients: int = 20
    bid_low: float = 0.5
    bid_high: float = 1.5
    initial_accuracy: float = 0.1
    noise_std: float = 0.0005
    asymptote_max: float = 0.95
    asymptote_gap: float = 0.5
    asymptote_scale: float = 4.0
    rate_base: float = 0.002
    rate_slope: float = 0.001
    seed: int = 0

    def __post_init__(self):
        if self.n_clients < 2:
            raise ValueError("need at least two clients")
        if not 0 < self.bid_low <= self.bid_high:
            raise ValueError("bid range must satisfy 0 < low <= high")
        if not 0 <= self.initial_accuracy <= 1:
            raise ValueError("initial_accuracy must lie in [0, 1]")
        if self.noise_std < 0:
            raise ValueError("noise_std must be non-negative")
        for n in range(1, self.n_clients):
            if not 0 < self.asymptote(n) <= 1:
                raise ValueError(f"asymptote({n}) outside (0, 1]")
            if not 0 < self.rate(n) < 1:
                raise ValueError(f"rate({n}) outside (0, 1)")

    @property
    def n_arms(self) -> int:
        return self.n_clients - 1

    def asymptote(self, n: int) -> float:
        return self.asymptote_max * (1.0 - self.asymptote_gap * math.exp(-n / self.asymptote_scale))

    def rate(self, n: int) -> float:
        return self.rate_base + self.rate_slope * n

    def sample_quotes(self, t: int) -> list[ClientQuote]:
        bids = stream(self.seed, STREAM_BIDS, t).uniform(self.bid_low, self.bid_high, self.n_clients)
        return [ClientQuote(i, float(b), 1.0) for i, b in enumerate(bids)]

    def step(self, t: int, n: int, current_accuracy: float) -> float:
        if not 1 <= n < self.n_clients:
            raise ValueError(f"arm {n} outside [1, {self.n_clients - 1}]")
        delta = (self.asymptote(n) - current_accuracy) * self.rate(n)
        if self.noise_std > 0:
            delta += self.noise_std * stream(self.seed, STREAM_NOISE, t).standard_normal()
        return min(1.0 - current_accuracy, max(-current_accuracy, delta))


@dataclass
class TraceWorld:
    """Replays recorded per-round accuracy changes for every arm.

    Quotes come from ``bid_log`` when present, otherwise from the same seeded
    uniform draw the synthetic world uses.
    """

    delta_table: dict[tuple[int, int], float]
    n_clients: int
    initial_accuracy: float = 0.1
    bid_log: dict[int, list[ClientQuote]] | None = None
    bid_low: float = 0.5
    bid_high: float = 1.5
    seed: int = 0
    n_rounds: int = field(init=False)

    def __post_init__(self):
        rounds = sorted({t for t, _ in self.delta_table})
        self.n_rounds = rounds[-1] if rounds else 0
        for t in range(1, self.n_rounds + 1):
            for n in range(1, self.n_clients):
                d = self.delta_table.get((t, n))
                if d is None:
                    raise TraceError(f"trace incomplete: missing round {t}, arm {n}")
                if not -1 <= d <= 1:
                    raise TraceError(f"delta {d} at round {t}, arm {n} outside [-1, 1]")

    @property
    def n_arms(self) -> int:
        return self.n_clients - 1

    @classmethod
    def from_csv(cls, path, bids_path=None, n_clients: int | None = None, **kwargs) -> "TraceWorld":
        table = {}
        with open(path, newline="") as fh:
            reader = csv.DictReader(fh)
            if reader.fieldnames != ["round", "arm", "delta_accuracy"]:
                raise TraceError(f"{path}: expected header round,arm,delta_accuracy")
            for row in reader:
                table[(int(row["round"]), int(row["arm"]))] = float(row["delta_accuracy"])
        if n_clients is None:
            n_clients = max(n for _, n in table) + 1
        bid_log = None
        if bids_path is not None:
            bid_log = {}
            with open(bids_path, newline="") as fh:
                reader = csv.DictReader(fh)
                if reader.fieldnames != ["round", "client_id", "bid"]:
                    raise TraceError(f"{bids_path}: expected header round,client_id,bid")
                for row in reader:
                    bid_log.setdefault(int(row["round"]), []).append(
                        ClientQuote(int(row["client_id"]), float(row["bid"]), 1.0)
                    )
        return cls(table, n_clients, bid_log=bid_log, **kwargs)

    def sample_quotes(self, t: int) -> list[ClientQuote]:
        if self.bid_log is not None:
            if t not in self.bid_log:
                raise TraceError(f"trace incomplete: no bids for round {t}")
            return list(self.bid_log[t])
        bids = stream(self.seed, STREAM_BIDS, t).uniform(self.bid_low, self.bid_high, self.n_clients)
        return [ClientQuote(i, float(b), 1.0) for i, b in enumerate(bids)]

    def step(self, t: int, n: int, current_accuracy: float) -> float:
        try:
            return self.delta_table[(t, n)]
        except KeyError:
            raise TraceError(f"trace incomplete: no entry for round {t}, arm {n}") from None


def write_trace_csv(path, delta_table: dict[tuple[int, int], float]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["round", "arm", "delta_accuracy"])
        for (t, n), d in sorted(delta_table.items()):
            w.writerow([t, n, repr(float(d))])


def sample_quotes(world, t: int) -> list[ClientQuote]:
    return world.sample_quotes(t)


def step(world, t: int, n: int, current_accuracy: float) -> float:
    return world.step(t, n, current_accuracy)


def expected_horizons(world, budget: float, max_rounds: int) -> dict[int, int]:
    """Rounds affordable per fixed arm, from the mean spend over the quote stream."""
    rounds = max_rounds
    if isinstance(world, TraceWorld):
        rounds = min(max_rounds, world.n_rounds)
    costs = np.array([spend_curve(rank_clients(world.sample_quotes(t))) for t in range(1, rounds + 1)])
    mean_cost = costs.mean(axis=0)
    cap = rounds
    return {n: int(max(1, min(cap, math.floor(budget / mean_cost[n - 1])))) for n in range(1, world.n_clients)}


def fixed_arm_accuracy(world, n: int, horizon: int) -> float:
    acc = world.initial_accuracy
    for t in range(1, horizon + 1):
        acc += world.step(t, n, acc)
    return acc


def oracle_best_arm(world, budget: float, max_rounds: int) -> tuple[int, float]:
    """Best fixed participant count by exhaustive enumeration.

    Each arm runs for its expected horizon with the budget guard off; ties go
    to the smallest arm.
    """
    horizons = expected_horizons(world, budget, max_rounds)
    best_n, best_a = 0, -math.inf
    for n in range(1, world.n_clients):
        a = fixed_arm_accuracy(world, n, horizons[n])
        if a > best_a:
            best_n, best_a = n, a
    return best_n, best_a


def world_from_config(env_cfg: dict, seed: int, base_dir: Path | None = None):
    """Build a world from the ``environment`` block of a run config."""
    env_cfg = dict(env_cfg)
    kind = env_cfg.pop("kind", "synthetic")
    if kind == "synthetic":
        return SyntheticWorld(seed=seed, **env_cfg)
    if kind == "trace":
        path = Path(env_cfg.pop("path"))
        bids = env_cfg.pop("bids_path", None)
        if base_dir is not None:
            path = base_dir / path if not path.is_absolute() else path
            if bids is not None and not Path(bids).is_absolute():
                bids = base_dir / bids
        return TraceWorld.from_csv(path, bids, seed=seed, **env_cfg)
    raise ValueError(f"unknown environment kind {kind!r}")
