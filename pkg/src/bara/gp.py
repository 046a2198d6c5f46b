"""Time-varying Gaussian process over the discrete arm space.

The covariance between an observation of arm ``n`` at round ``t`` and arm
``n2`` at round ``t2`` is a squared-exponential similarity over arms times a
temporal decay ``(1 - forgetting) ** (|t - t2| / 2)``, so stale observations
count for less.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
from scipy.linalg import solve_triangular


class GpError(ValueError):
    pass


@dataclass(frozen=True)
class KernelParams:
    length_scale: float = 0.2
    forgetting: float = 0.001
    noise_variance: float = 0.01

    def __post_init__(self):
        if not self.length_scale > 0:
            raise GpError("length_scale must be positive")
        if not 0 <= self.forgetting < 1:
            raise GpError("forgetting must lie in [0, 1)")
        if not self.noise_variance >= 0:
            raise GpError("noise_variance must be non-negative")


def kernel(params: KernelParams, t: int, n: int, t2: int, n2: int) -> float:
    decay = (1.0 - params.forgetting) ** (abs(t - t2) / 2.0)
    return decay * math.exp(-((n - n2) ** 2) / (2.0 * params.length_scale**2))


def kernel_matrix(params: KernelParams, rounds_a, arms_a, rounds_b, arms_b) -> np.ndarray:
    ra, na = np.asarray(rounds_a, float)[:, None], np.asarray(arms_a, float)[:, None]
    rb, nb = np.asarray(rounds_b, float)[None, :], np.asarray(arms_b, float)[None, :]
    decay = (1.0 - params.forgetting) ** (np.abs(ra - rb) / 2.0)
    return decay * np.exp(-((na - nb) ** 2) / (2.0 * params.length_scale**2))


@dataclass
class Posterior:
    arms: np.ndarray
    mean: np.ndarray
    std: np.ndarray

    def __post_init__(self):
        self.arms = np.asarray(self.arms, dtype=int)
        self.mean = np.asarray(self.mean, dtype=float)
        self.std = np.asarray(self.std, dtype=float)


@dataclass
class GpState:
    """Observed (round, arm) inputs with a cached Cholesky factor of K + s2*I.

    Observation values are supplied at query time because they are
    re-estimated every round.  The factor is extended by one row per new
    observation, which costs O(T^2) instead of refactorising.
    """

    params: KernelParams = field(default_factory=KernelParams)
    prior_mean: float = 0.0
    rounds: list[int] = field(default_factory=list)
    arms: list[int] = field(default_factory=list)
    _chol: np.ndarray = field(default_factory=lambda: np.zeros((0, 0)), repr=False)

    def __len__(self) -> int:
        return len(self.rounds)

    @property
    def gram_factor(self) -> np.ndarray:
        """Lower Cholesky factor of ``K_t + noise_variance * I``."""
        return self._chol

    def add(self, round: int, arm: int) -> None:
        if self.rounds and round <= self.rounds[-1]:
            raise GpError("observation rounds must be strictly increasing")
        p = self.params
        m = len(self.rounds)
        cross = kernel_matrix(p, self.rounds, self.arms, [round], [arm])[:, 0]
        row = solve_triangular(self._chol, cross, lower=True) if m else np.zeros(0)
        pivot = 1.0 + p.noise_variance - float(row @ row)
        if not pivot > 1e-14:
            raise GpError("singular kernel matrix")
        chol = np.zeros((m + 1, m + 1))
        chol[:m, :m] = self._chol
        chol[m, :m] = row
        chol[m, m] = math.sqrt(pivot)
        self._chol = chol
        self.rounds.append(int(round))
        self.arms.append(int(arm))

    @classmethod
    def from_observations(
        cls,
        observations: Iterable[tuple[int, int]],
        params: KernelParams | None = None,
        prior_mean: float = 0.0,
    ) -> "GpState":
        state = cls(params=params or KernelParams(), prior_mean=prior_mean)
        for t, n in observations:
            state.add(t, n)
        return state


def posterior(
    state: GpState,
    targets: Sequence[int],
    observation_values: Sequence[float],
    query_round: int | None = None,
) -> Posterior:
    """Posterior mean and stddev at ``targets`` for round ``query_round``.

    ``query_round`` defaults to one past the last observed round.
    """
    arms = np.asarray(list(targets), dtype=int)
    values = np.asarray(observation_values, dtype=float)
    if len(values) != len(state):
        raise GpError("need one value per observation")
    if len(state) == 0:
        return Posterior(arms, np.full(len(arms), state.prior_mean), np.ones(len(arms)))
    if query_round is None:
        query_round = state.rounds[-1] + 1
    L = state.gram_factor
    cross = kernel_matrix(state.params, state.rounds, state.arms, [query_round] * len(arms), arms)
    w = solve_triangular(L, cross, lower=True)
    alpha = solve_triangular(L, values - state.prior_mean, lower=True)
    mean = state.prior_mean + w.T @ alpha
    var = 1.0 - np.einsum("ij,ij->j", w, w)
    return Posterior(arms, mean, np.sqrt(np.clip(var, 0.0, None)))


def exploration_weight(t: float, scale: float = 0.8, rate: float = 0.4) -> float:
    """Multiplier on the posterior std: scale * ln(rate * t), floored at 0."""
    return max(0.0, scale * math.log(rate * t))


def ucb_select(post: Posterior, next_round: int, scale: float = 0.8, rate: float = 0.4) -> int:
    """Arm maximising mean + exploration_weight * std; the smallest arm wins ties."""
    scores = post.mean + exploration_weight(next_round, scale, rate) * post.std
    best = np.flatnonzero(scores == scores.max())
    return int(post.arms[best].min())
