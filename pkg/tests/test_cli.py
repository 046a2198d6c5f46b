import csv
import json
from pathlib import Path

import pytest

from bara.cli import main
from bara.harness import ROUNDS_COLUMNS, SUMMARY_COLUMNS, RunConfig


@pytest.fixture
def config(tmp_path):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps({"max_rounds": 25, "warmup_rounds": 5, "budget": 180.0, "seeds": [0, 1]}))
    return path


def header(path):
    with open(path) as fh:
        return next(csv.reader(fh))


class TestCli:
    def test_run(self, config, tmp_path, capsys):
        assert main(["run", "--config", str(config), "--policy", "EA", "--seed", "3", "--out", str(tmp_path / "o")]) == 0
        assert capsys.readouterr().out.startswith("EA-3: final_accuracy=")
        assert header(tmp_path / "o" / "rounds.csv") == ROUNDS_COLUMNS
        assert header(tmp_path / "o" / "summary.csv") == SUMMARY_COLUMNS

    def test_batch(self, config, tmp_path, capsys):
        assert main(["batch", "--config", str(config), "--out", str(tmp_path / "b")]) == 0
        out = capsys.readouterr().out
        assert out.count("runs=2") == 5
        with open(tmp_path / "b" / "summary.csv") as fh:
            assert len(list(csv.DictReader(fh))) == 10

    def test_oracle(self, config, tmp_path, capsys):
        assert main(["oracle", "--config", str(config), "--seed", "0", "--seed", "4", "--out", str(tmp_path)]) == 0
        rows = json.loads((tmp_path / "oracle.json").read_text())
        assert [r["seed"] for r in rows] == [0, 4]
        assert "best_arm=" in capsys.readouterr().out

    def test_plotdata(self, config, tmp_path):
        out = tmp_path / "p"
        assert main(["plotdata", "--config", str(config), "--out", str(out), "--quiet"]) == 0
        for name in ("fig1_final_accuracy", "fig2_arms", "fig3_regret"):
            assert (out / f"{name}.csv").exists()
            assert (out / f"{name}.png").stat().st_size > 0
        assert header(out / "fig2_arms.csv") == ["seed", "round", "arm", "oracle_arm"]

    def test_plotdata_csv_only(self, config, tmp_path, capsys):
        out = tmp_path / "p"
        assert main(["plotdata", "--config", str(config), "--out", str(out), "--no-figures", "--quiet"]) == 0
        assert capsys.readouterr().out == ""
        assert not list(out.glob("*.png"))
        with open(out / "fig1_final_accuracy.csv") as fh:
            assert [r["policy"] for r in csv.DictReader(fh)] == ["EA", "MIA", "MDA", "RA", "BARA"]

    def test_bad_config(self, tmp_path, capsys):
        path = tmp_path / "bad.json"
        path.write_text(json.dumps({"bogus": 1}))
        assert main(["run", "--config", str(path)]) == 2
        assert "unknown config keys" in capsys.readouterr().err

    def test_missing_config(self, tmp_path):
        assert main(["batch", "--config", str(tmp_path / "nope.json")]) == 2

    def test_shipped_config_loads(self):
        cfg = RunConfig.from_json(Path(__file__).parents[1] / "configs" / "default.json")
        assert (cfg.max_rounds, cfg.budget, cfg.warmup_rounds, cfg.seeds) == (200, 1500.0, 40, list(range(10)))
