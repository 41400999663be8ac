import json
import math
import os

import pytest

import spygame


def small_config(out):
    c = spygame.default_experiment()
    c["locations"] = ["bank", "school"]
    c["trials"] = 1
    c["output_dir"] = str(out)
    c["fsync"] = False
    return c


def test_default_experiment_schedules_168_games():
    games = spygame.schedule(spygame.default_experiment())
    assert len(games) == 168
    assert len({g["game_id"] for g in games}) == 168


def test_run_replay_and_metrics(tmp_path):
    summary = spygame.run_experiment(small_config(tmp_path / "runs"))
    assert summary["completed"] == 16
    logs = sorted(p for p in os.listdir(tmp_path / "runs") if p.endswith(".jsonl"))
    assert len(logs) == 16
    first = tmp_path / "runs" / logs[0]
    assert spygame.replay(str(first))["identical"]
    lines = spygame.load_game(str(first))
    assert lines[0]["type"] == "header"
    assert lines[-1]["type"] == "outcome"

    report = spygame.metrics(str(tmp_path / "runs"))
    assert report["total"]["games"] == 16
    assert sum(r["games"] for r in report["rows"]) == 16
    assert "WR(%)" in spygame.metrics_table(str(tmp_path / "runs"))
    assert "Spy vs. strong" in spygame.corpus_stats(str(tmp_path / "runs"))


def test_config_file_and_errors(tmp_path):
    cfg = small_config("runs")
    cfg["locations"] = ["beach"]
    path = tmp_path / "exp.json"
    path.write_text(json.dumps(cfg))
    assert spygame.run_experiment(str(path))["completed"] == 8
    assert (tmp_path / "runs" / "run_summary.json").exists()

    cfg["locations"] = ["moon"]
    with pytest.raises(spygame.ConfigError):
        spygame.run_experiment(cfg)

    bad = tmp_path / "bad.jsonl"
    bad.write_text('{"type":"header"}\n')
    with pytest.raises(spygame.SchemaError):
        spygame.replay(str(bad))


def test_kappa_entropy_and_matching():
    assert spygame.fleiss_kappa([[3, 0], [2, 1]]) == pytest.approx(-0.2, abs=1e-12)
    assert spygame.fleiss_kappa([[3, 0], [0, 3]]) == 1.0
    assert spygame.agreement_band(0.5) == "moderate agreement"
    with pytest.raises(spygame.AnnotationError):
        spygame.fleiss_kappa([[1, 0], [0, 1]])
    assert spygame.tally_entropy([1] * 6) == pytest.approx(math.log(6), abs=1e-12)
    assert spygame.tally_entropy([5]) == 0.0
    assert spygame.detect_exposure("life on a SUB is cramped", "submarine")
    assert not spygame.detect_exposure("take the subway", "submarine")
    assert spygame.match_location("The Airplane!", "airplane")
    assert "bank" in spygame.locations()
    with pytest.raises(spygame.DeckError):
        spygame.detect_exposure("x", "moon")


def test_cli_entry_point():
    code, out, _ = spygame.run_cli(["default-config"])
    assert code == 0
    assert json.loads(out)["trials"] == 3
    assert spygame.run_cli(["nope"])[0] == 1
