"""Experiment orchestration: the round loop, regret, batches and CSV output."""

from __future__ import annotations

import csv
import json
import logging
import math
import statistics
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Iterable, Sequence

from .allocator import Allocator, BudgetLedger, Policy, PolicyConfig, estimate_horizon
from .auction import rank_clients, run_auction
from .environment import oracle_best_arm, world_from_config
from .gp import KernelParams

log = logging.getLogger(__name__)

ROUNDS_COLUMNS = ["run_id", "round", "policy", "arm", "spend", "accuracy", "delta", "regret_avg"]
SUMMARY_COLUMNS = ["policy", "seed", "final_accuracy", "rounds_executed", "total_spend"]
AGGREGATE_COLUMNS = ["policy", "runs", "failures", "mean_final_accuracy", "std_final_accuracy"]

ALL_POLICIES = [p.value for p in Policy]


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    environment: dict = field(default_factory=lambda: {"kind": "synthetic"})
    policy: str = "BARA"
    policies: list[str] = field(default_factory=lambda: list(ALL_POLICIES))
    max_rounds: int = 200
    budget: float = 1500.0
    warmup_rounds: int = 40
    kernel: KernelParams = field(default_factory=KernelParams)
    explore_scale: float = 0.8
    explore_rate: float = 0.4
    prior_mean: float = 0.0
    max_nodes: int = 5
    stage1_cap: float | None = 2.0
    seeds: list[int] = field(default_factory=lambda: list(range(10)))
    output: str | None = None
    base_dir: str | None = None

    def __post_init__(self):
        if isinstance(self.kernel, dict):
            self.kernel = KernelParams(**self.kernel)
        self.seeds = [int(s) for s in self.seeds]
        self.validate()

    def validate(self) -> None:
        for p in [self.policy, *self.policies]:
            if p not in ALL_POLICIES:
                raise ConfigError(f"unknown policy {p!r}")
        if self.budget <= 0:
            raise ConfigError("budget must be positive")
        if self.max_rounds < 1 or not 0 <= self.warmup_rounds < self.max_rounds:
            raise ConfigError("need max_rounds >= 1 and 0 <= warmup_rounds < max_rounds")
        if self.max_nodes < 1:
            raise ConfigError("max_nodes must be >= 1")
        if not isinstance(self.environment, dict) or self.environment.get("kind", "synthetic") not in (
            "synthetic",
            "trace",
        ):
            raise ConfigError("environment.kind must be 'synthetic' or 'trace'")
        if self.environment.get("kind") == "trace" and "path" not in self.environment:
            raise ConfigError("trace environment needs a path")
        try:
            self.world(0)
        except (ValueError, TypeError, OSError) as exc:
            raise ConfigError(f"invalid environment: {exc}") from exc

    @classmethod
    def from_dict(cls, data: dict, base_dir=None) -> "RunConfig":
        known = set(cls.__dataclass_fields__)
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        data = dict(data)
        if base_dir is not None and data.get("base_dir") is None:
            data["base_dir"] = str(base_dir)
        return cls(**data)

    @classmethod
    def from_json(cls, path) -> "RunConfig":
        path = Path(path)
        with open(path) as fh:
            return cls.from_dict(json.load(fh), base_dir=path.parent)

    def to_dict(self) -> dict:
        return asdict(self)

    def world(self, seed: int):
        base = Path(self.base_dir) if self.base_dir else None
        return world_from_config(self.environment, seed, base)

    def policy_config(self, seed: int, policy: str | None = None) -> PolicyConfig:
        return PolicyConfig(
            kind=policy or self.policy,
            max_rounds=self.max_rounds,
            warmup_rounds=self.warmup_rounds,
            kernel=self.kernel,
            explore_scale=self.explore_scale,
            explore_rate=self.explore_rate,
            prior_mean=self.prior_mean,
            max_nodes=self.max_nodes,
            stage1_cap=self.stage1_cap,
            seed=seed,
        )


@dataclass
class RoundLog:
    round: int
    arm: int
    spend: float
    accuracy: float
    delta: float
    remaining_budget: float
    # final-accuracy estimate for the chosen arm after this round's record
    estimate: float
    regret_avg: float = math.nan


@dataclass
class RunResult:
    policy: str
    seed: int
    initial_accuracy: float
    rounds: list[RoundLog]
    final_accuracy: float
    rounds_executed: int
    total_spend: float
    regret_series: list[float] = field(default_factory=list)

    @property
    def run_id(self) -> str:
        return f"{self.policy}-{self.seed}"

    @property
    def arm_series(self) -> list[int]:
        return [r.arm for r in self.rounds]


def run(config: RunConfig, seed: int, oracle: tuple[int, float] | None = None) -> RunResult:
    """Simulate one policy for one seed until max_rounds or budget exhaustion."""
    world = config.world(seed)
    pconf = config.policy_config(seed)
    alloc = Allocator(pconf, world.n_clients, config.budget, initial_accuracy=world.initial_accuracy)
    ledger = BudgetLedger(config.budget)
    acc = world.initial_accuracy
    logs: list[RoundLog] = []
    for t in range(1, config.max_rounds + 1):
        ranked = rank_clients(world.sample_quotes(t))
        n = alloc.decide(t, ranked, ledger)
        if n == 0:
            if alloc.stopped:
                log.debug("%s seed %d: budget guard stops at round %d", pconf.kind.value, seed, t)
                break
            continue
        outcome = run_auction(ranked, n)
        horizon = estimate_horizon(ledger, n, outcome.total_spend, config.max_rounds)
        ledger.charge(t, n, outcome.total_spend)
        delta = world.step(t, n, acc)
        acc += delta
        alloc.observe(t, n, delta)
        logs.append(
            RoundLog(
                round=t,
                arm=n,
                spend=outcome.total_spend,
                accuracy=acc,
                delta=delta,
                remaining_budget=ledger.remaining,
                estimate=alloc.estimate(n, horizon),
            )
        )
    result = RunResult(
        policy=pconf.kind.value,
        seed=seed,
        initial_accuracy=world.initial_accuracy,
        rounds=logs,
        final_accuracy=acc,
        rounds_executed=len(logs),
        total_spend=ledger.spent,
    )
    if oracle is not None:
        attach_regret(result, oracle)
    return result


def regret_series(result: RunResult, oracle: tuple[int, float]) -> list[float]:
    """Cumulative regret divided by the number of executed rounds so far."""
    _, best = oracle
    out, total = [], 0.0
    for k, r in enumerate(result.rounds, start=1):
        total += best - r.estimate
        out.append(total / k)
    return out


def attach_regret(result: RunResult, oracle: tuple[int, float]) -> RunResult:
    result.regret_series = regret_series(result, oracle)
    for r, g in zip(result.rounds, result.regret_series):
        r.regret_avg = g
    return result


def compute_oracle(config: RunConfig, seed: int) -> tuple[int, float]:
    return oracle_best_arm(config.world(seed), config.budget, config.max_rounds)


@dataclass
class BatchResult:
    results: list[RunResult]
    failures: list[tuple[str, int, str]]
    oracles: dict[int, tuple[int, float]]

    def by_policy(self) -> dict[str, list[RunResult]]:
        out: dict[str, list[RunResult]] = {}
        for r in self.results:
            out.setdefault(r.policy, []).append(r)
        return out

    def aggregate(self) -> list[dict]:
        rows = []
        groups = self.by_policy()
        policies = list(dict.fromkeys([*groups, *(p for p, _, _ in self.failures)]))
        for p in policies:
            finals = [r.final_accuracy for r in groups.get(p, [])]
            rows.append(
                {
                    "policy": p,
                    "runs": len(finals),
                    "failures": sum(1 for f in self.failures if f[0] == p),
                    "mean_final_accuracy": statistics.fmean(finals) if finals else math.nan,
                    "std_final_accuracy": statistics.stdev(finals) if len(finals) > 1 else 0.0,
                }
            )
        return rows


def _run_one(args):
    config, seed, oracle = args
    try:
        return run(config, seed, oracle), None
    except Exception as exc:  # reported per run, the batch carries on
        return None, f"{type(exc).__name__}: {exc}"


def batch(
    configs: RunConfig | Sequence[RunConfig],
    seeds: Iterable[int] | None = None,
    out_dir=None,
    workers: int = 1,
) -> BatchResult:
    """Run every (policy, seed) pair, one config per policy.

    A single config expands to one run per entry of ``config.policies``.
    """
    if isinstance(configs, RunConfig):
        configs = [replace(configs, policy=p) for p in configs.policies]
    configs = list(configs)
    if not configs:
        raise ConfigError("need at least one config")
    seeds = list(configs[0].seeds if seeds is None else seeds)
    if not seeds:
        raise ConfigError("need at least one seed")

    oracles = {s: compute_oracle(configs[0], s) for s in seeds}
    jobs = [(c, s, oracles[s]) for c in configs for s in seeds]
    if workers > 1:
        with ProcessPoolExecutor(workers) as pool:
            outcomes = list(pool.map(_run_one, jobs))
    else:
        outcomes = [_run_one(j) for j in jobs]

    results, failures = [], []
    for (c, s, _), (res, err) in zip(jobs, outcomes):
        if err is None:
            results.append(res)
        else:
            log.error("run %s-%d failed: %s", c.policy, s, err)
            failures.append((c.policy, s, err))
    out = BatchResult(results, failures, oracles)
    if out_dir is not None:
        write_outputs(out, out_dir)
    return out


def _fmt(x) -> str:
    if isinstance(x, float):
        return repr(x)
    return str(x)


def write_csv(path: Path, columns: list[str], rows: Iterable[dict]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for row in rows:
            w.writerow([_fmt(row[c]) for c in columns])


def round_rows(results: Iterable[RunResult]):
    for res in results:
        for r in res.rounds:
            yield {
                "run_id": res.run_id,
                "round": r.round,
                "policy": res.policy,
                "arm": r.arm,
                "spend": r.spend,
                "accuracy": r.accuracy,
                "delta": r.delta,
                "regret_avg": r.regret_avg,
            }


def summary_rows(results: Iterable[RunResult]):
    for res in results:
        yield {
            "policy": res.policy,
            "seed": res.seed,
            "final_accuracy": res.final_accuracy,
            "rounds_executed": res.rounds_executed,
            "total_spend": res.total_spend,
        }


def write_outputs(result: BatchResult, out_dir) -> Path:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_csv(out / "rounds.csv", ROUNDS_COLUMNS, round_rows(result.results))
    write_csv(out / "summary.csv", SUMMARY_COLUMNS, summary_rows(result.results))
    write_csv(out / "aggregate.csv", AGGREGATE_COLUMNS, result.aggregate())
    report = {
        "aggregate": result.aggregate(),
        "oracles": {str(s): {"arm": n, "final_accuracy": a} for s, (n, a) in result.oracles.items()},
        "failures": [{"policy": p, "seed": s, "error": e} for p, s, e in result.failures],
    }
    with open(out / "results.json", "w") as fh:
        json.dump(report, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return out
