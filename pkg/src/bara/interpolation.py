"""Sparse record matrix of accuracy improvements and its Newton completion.

Each executed round contributes exactly one observed improvement, in the
column of the arm (participant count) used that round.  Unobserved cells of a
column are filled by evaluating the Newton divided-difference polynomial
through the column's most recent observations.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

DEFAULT_MAX_NODES = 5


class InterpolationError(ValueError):
    pass


class RecordMatrix:
    """Observed improvements keyed by round, one arm per round."""

    def __init__(self, n_arms: int):
        if n_arms < 1:
            raise InterpolationError("need at least one arm")
        self.n_arms = n_arms
        self.entries: dict[tuple[int, int], float] = {}
        self.max_round = 0
        self._columns: dict[int, tuple[list[int], list[float]]] = {}

    def __len__(self) -> int:
        return len(self.entries)

    def __repr__(self) -> str:
        return f"RecordMatrix(n_arms={self.n_arms}, records={len(self)}, max_round={self.max_round})"

    def record(self, round: int, arm: int, delta: float) -> "RecordMatrix":
        if round <= self.max_round:
            raise InterpolationError("round already recorded")
        if not 1 <= arm <= self.n_arms:
            raise InterpolationError(f"arm {arm} outside [1, {self.n_arms}]")
        if not -1.0 <= delta <= 1.0:
            raise InterpolationError(f"delta {delta} outside [-1, 1]")
        self.entries[(round, arm)] = float(delta)
        rounds, values = self._columns.setdefault(arm, ([], []))
        rounds.append(round)
        values.append(float(delta))
        self.max_round = round
        return self

    def column(self, arm: int) -> tuple[np.ndarray, np.ndarray]:
        rounds, values = self._columns.get(arm, ([], []))
        return np.array(rounds, dtype=float), np.array(values, dtype=float)

    def count(self, arm: int) -> int:
        return len(self._columns.get(arm, ((), ()))[0])

    def arms(self) -> list[int]:
        return sorted(self._columns)


def record(matrix: RecordMatrix, round: int, arm: int, delta: float) -> RecordMatrix:
    return matrix.record(round, arm, delta)


def divided_differences(points: Sequence[tuple[float, float]]) -> np.ndarray:
    """Newton coefficients ``y[t1], y[t1,t2], ..., y[t1..tJ]``."""
    if len(points) == 0:
        raise InterpolationError("no points")
    nodes = np.array([p[0] for p in points], dtype=float)
    if len(np.unique(nodes)) != len(nodes):
        raise InterpolationError("degenerate nodes")
    table = np.array([p[1] for p in points], dtype=float)
    coefs = [table[0]]
    for order in range(1, len(nodes)):
        # table[i] holds y[t_i .. t_{i+order-1}]; fold in one more node
        table = (table[:-1] - table[1:]) / (nodes[:-order] - nodes[order:])
        coefs.append(table[0])
    return np.array(coefs)


def newton_eval(coefs: np.ndarray, nodes: np.ndarray, x) -> np.ndarray:
    """Evaluate the Newton form at ``x`` by nested multiplication."""
    x = np.asarray(x, dtype=float)
    out = np.full_like(x, coefs[-1], dtype=float)
    for k in range(len(coefs) - 2, -1, -1):
        out = coefs[k] + (x - nodes[k]) * out
    return out


def extrapolate_column(
    matrix: RecordMatrix, arm: int, horizon: int, max_nodes: int = DEFAULT_MAX_NODES
) -> np.ndarray:
    """Estimated improvements for rounds ``1..horizon`` of one arm's column.

    Recorded cells keep their recorded value; the rest come from the Newton
    polynomial through the ``max_nodes`` most recent records.  Output is
    clamped to [-1, 1].
    """
    rounds, values = matrix.column(arm)
    if len(rounds) == 0:
        raise InterpolationError("no observations for arm")
    if horizon < 1:
        return np.zeros(0)
    nodes, ys = rounds[-max_nodes:], values[-max_nodes:]
    coefs = divided_differences(list(zip(nodes, ys)))
    taus = np.arange(1, horizon + 1, dtype=float)
    est = newton_eval(coefs, nodes, taus)
    known = rounds <= horizon
    est[rounds[known].astype(int) - 1] = values[known]
    return np.clip(est, -1.0, 1.0)


def final_accuracy_estimate(
    matrix: RecordMatrix,
    arm: int,
    horizon: int,
    initial_accuracy: float,
    max_nodes: int = DEFAULT_MAX_NODES,
) -> float:
    """``initial_accuracy`` plus the completed column summed to ``horizon``, clamped to [0, 1]."""
    if horizon <= 0:
        return float(initial_accuracy)
    total = initial_accuracy + float(np.sum(extrapolate_column(matrix, arm, horizon, max_nodes)))
    return float(min(1.0, max(0.0, total)))
