"""Per-figure CSV tables and matplotlib renderings of a batch.

fig1: final accuracy per policy (mean, stddev over seeds)
fig2: BARA's participant count per round against the oracle count
fig3: BARA's running-average regret per round
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .harness import BatchResult, write_csv

FIG1_COLUMNS = ["policy", "runs", "mean_final_accuracy", "std_final_accuracy"]
FIG2_COLUMNS = ["seed", "round", "arm", "oracle_arm"]
FIG3_COLUMNS = ["seed", "round", "regret_avg"]


def fig1_rows(result: BatchResult) -> list[dict]:
    return [{c: row[c] for c in FIG1_COLUMNS} for row in result.aggregate()]


def fig2_rows(result: BatchResult, policy: str = "BARA") -> list[dict]:
    rows = []
    for res in result.by_policy().get(policy, []):
        best_arm = result.oracles[res.seed][0]
        rows += [{"seed": res.seed, "round": r.round, "arm": r.arm, "oracle_arm": best_arm} for r in res.rounds]
    return rows


def fig3_rows(result: BatchResult, policy: str = "BARA") -> list[dict]:
    rows = []
    for res in result.by_policy().get(policy, []):
        rows += [{"seed": res.seed, "round": r.round, "regret_avg": r.regret_avg} for r in res.rounds]
    return rows


def _series_mean(rows, key):
    # mean over seeds at each round that at least one seed reached
    by_round: dict[int, list[float]] = {}
    for r in rows:
        by_round.setdefault(r["round"], []).append(r[key])
    rounds = np.array(sorted(by_round))
    return rounds, np.array([np.mean(by_round[t]) for t in rounds])


def render_figures(result: BatchResult, out_dir, fmt: str = "png") -> list[Path]:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    from matplotlib.ticker import MaxNLocator

    out = Path(out_dir)
    paths = []

    rows = fig1_rows(result)
    fig, ax = plt.subplots(figsize=(5, 3.2))
    ax.bar([r["policy"] for r in rows], [r["mean_final_accuracy"] for r in rows],
           yerr=[r["std_final_accuracy"] for r in rows], capsize=3, color="0.6")
    ax.set_ylabel("final accuracy")
    lows = [r["mean_final_accuracy"] - r["std_final_accuracy"] for r in rows if r["runs"]]
    if lows:
        ax.set_ylim(max(0.0, min(lows) - 0.05), None)
    fig.tight_layout()
    paths.append(out / f"fig1_final_accuracy.{fmt}")
    fig.savefig(paths[-1])
    plt.close(fig)

    rows = fig2_rows(result)
    fig, ax = plt.subplots(figsize=(5, 3.2))
    for seed in sorted({r["seed"] for r in rows}):
        mine = [r for r in rows if r["seed"] == seed]
        ax.plot([r["round"] for r in mine], [r["arm"] for r in mine], lw=0.6, alpha=0.6)
    for best_arm in sorted({r["oracle_arm"] for r in rows}):
        ax.axhline(best_arm, color="k", ls="--", lw=0.8)
    ax.set_xlabel("round")
    ax.set_ylabel("participants")
    ax.yaxis.set_major_locator(MaxNLocator(integer=True))
    fig.tight_layout()
    paths.append(out / f"fig2_arms.{fmt}")
    fig.savefig(paths[-1])
    plt.close(fig)

    rows = fig3_rows(result)
    fig, ax = plt.subplots(figsize=(5, 3.2))
    if rows:
        rounds, mean = _series_mean(rows, "regret_avg")
        ax.plot(rounds, mean, color="k")
    ax.set_xlabel("round")
    ax.set_ylabel("average regret")
    fig.tight_layout()
    paths.append(out / f"fig3_regret.{fmt}")
    fig.savefig(paths[-1])
    plt.close(fig)
    return paths


def write_plotdata(result: BatchResult, out_dir, figures: bool = True) -> list[Path]:
    """Write fig1..fig3 CSVs, plus rendered images unless ``figures`` is off."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    tables = [
        ("fig1_final_accuracy.csv", FIG1_COLUMNS, fig1_rows(result)),
        ("fig2_arms.csv", FIG2_COLUMNS, fig2_rows(result)),
        ("fig3_regret.csv", FIG3_COLUMNS, fig3_rows(result)),
    ]
    paths = []
    for name, cols, rows in tables:
        write_csv(out / name, cols, rows)
        paths.append(out / name)
    if figures:
        paths += render_figures(result, out)
    return paths
