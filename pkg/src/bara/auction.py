"""Reverse auction with (n+1)-th price payments.

Clients are ranked by quality per unit bid.  When the top ``n`` clients win,
each is paid at the price ratio of the first loser, scaled by its own quality.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np


class AuctionError(ValueError):
    pass


@dataclass(frozen=True)
class ClientQuote:
    client_id: int
    bid: float
    quality: float = 1.0

    def __post_init__(self):
        if not (self.bid > 0 and self.quality > 0):
            raise AuctionError("invalid quote")

    @property
    def ratio(self) -> float:
        return self.quality / self.bid


@dataclass(frozen=True)
class RankedQuotes:
    """Quotes sorted by non-increasing quality/bid, ties by ascending id."""

    quotes: tuple[ClientQuote, ...]

    def __len__(self) -> int:
        return len(self.quotes)

    def __getitem__(self, i):
        return self.quotes[i]

    @property
    def ids(self) -> list[int]:
        return [q.client_id for q in self.quotes]

    @property
    def bids(self) -> np.ndarray:
        return np.array([q.bid for q in self.quotes], dtype=float)

    @property
    def qualities(self) -> np.ndarray:
        return np.array([q.quality for q in self.quotes], dtype=float)


@dataclass(frozen=True)
class AuctionOutcome:
    winner_ids: tuple[int, ...]
    payments: tuple[float, ...]
    total_spend: float
    n: int


def rank_clients(quotes: Sequence[ClientQuote]) -> RankedQuotes:
    if len(quotes) == 0:
        raise AuctionError("no quotes")
    for q in quotes:
        if not (q.bid > 0 and q.quality > 0):
            raise AuctionError("invalid quote")
    ordered = sorted(quotes, key=lambda q: (-q.ratio, q.client_id))
    return RankedQuotes(tuple(ordered))


def _check_count(ranked: RankedQuotes, n: int) -> None:
    if not 1 <= n < len(ranked):
        raise AuctionError("count out of range")


def _payments(ranked: RankedQuotes, n: int) -> list[float]:
    price = ranked[n].bid / ranked[n].quality
    return [price * ranked[i].quality for i in range(n)]


def budget_for_count(ranked: RankedQuotes, n: int) -> float:
    """Minimum spend to recruit the top ``n`` ranked clients."""
    _check_count(ranked, n)
    return math.fsum(_payments(ranked, n))


def spend_curve(ranked: RankedQuotes) -> np.ndarray:
    """Spend for every count; element ``n - 1`` holds the spend for ``n`` winners.

    Vectorised companion of :func:`budget_for_count` used by the simulation
    loop, which needs the cost of every arm each round.
    """
    bids, quals = ranked.bids, ranked.qualities
    return np.cumsum(quals)[:-1] * (bids[1:] / quals[1:])


def winners_for_budget(ranked: RankedQuotes, budget_limit: float) -> int:
    """Largest affordable winner count, or 0 if a single winner is unaffordable."""
    if budget_limit <= 0:
        # no count is affordable under a non-positive limit
        return 0
    if len(ranked) < 2:
        raise AuctionError("count out of range")
    best = 0
    for n in range(1, len(ranked)):
        if budget_for_count(ranked, n) <= budget_limit:
            best = n
    return best


def run_auction(quotes: Sequence[ClientQuote] | RankedQuotes, n: int) -> AuctionOutcome:
    ranked = quotes if isinstance(quotes, RankedQuotes) else rank_clients(quotes)
    _check_count(ranked, n)
    pay = _payments(ranked, n)
    return AuctionOutcome(
        winner_ids=tuple(ranked.ids[:n]),
        payments=tuple(pay),
        total_spend=math.fsum(pay),
        n=n,
    )
