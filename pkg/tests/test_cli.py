import csv
import json

import pytest

from clonebench.cli import main


def _ini(tmp_path, body, name="exp.ini"):
    p = tmp_path / name
    p.write_text(body)
    return str(p)


def _json(path):
    return json.loads(open(path).read())


def test_run_game_bb84_trivial_json(tmp_path):
    cfg = _ini(tmp_path, "[experiment]\ngame = bb84\nlambda = 1\nstrategy = trivial-B\n")
    out = tmp_path / "r.json"
    assert main(["run-game", "--config", cfg, "--out", str(out)]) == 0
    rep = _json(out)
    assert rep["records"][0]["value"] == pytest.approx(0.5)
    assert rep["config"]["lambda"] == 1
    assert set(rep) >= {"tool", "version", "command", "config", "records", "summary", "generated_at"}


def test_run_game_csv_columns(tmp_path):
    cfg = _ini(tmp_path, "[experiment]\ngame = bb84\nlambda = 2\nstrategy = token-to-B\n[output]\nformat = csv\n")
    out = tmp_path / "r.csv"
    assert main(["run-game", "--config", cfg, "--out", str(out)]) == 0
    rows = list(csv.reader(open(out)))
    assert rows[0] == ["name", "lambda", "value", "stderr", "bound", "bound_source", "pass"]
    assert float(rows[1][2]) == pytest.approx(0.25)


def test_run_game_moe_trivial(tmp_path):
    cfg = _ini(tmp_path, "[experiment]\nkind = moe\nlambda = 1\nstrategy = trivial-B\n")
    out = tmp_path / "m.json"
    assert main(["run-game", "--config", cfg, "--out", str(out)]) == 0
    r = _json(out)["records"][0]
    assert r["value"] == pytest.approx(0.75) and r["pass"] is True
    assert r["bound"] == pytest.approx(0.9204482076)


def test_sampled_run_is_seeded(tmp_path):
    body = "[experiment]\ngame = sde\nlambda = 1\nstrategy = trivial-B\nmode = sampled\ntrials = 500\nseed = 4\n"
    cfg = _ini(tmp_path, body)
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    assert main(["run-game", "--config", cfg, "--out", str(a)]) == 0
    assert main(["run-game", "--config", cfg, "--out", str(b)]) == 0
    assert _json(a)["records"] == _json(b)["records"]
    assert _json(a)["records"][0]["stderr"] > 0


@pytest.mark.parametrize("body", [
    "[experiment\ngame = bb84\n",
    "[other]\nx = 1\n",
    "[experiment]\ngame = nope\n",
    "[experiment]\ngame = bb84\nlambda = zero\n",
    "[experiment]\ngame = bb84\nmode = sampled\n",
    "[experiment]\ngame = bb84\ntrials = 10\n",
    "[experiment]\ngame = bb84\nstrategy = cheat\n",
    "[experiment]\ngame = bb84\n[output]\nformat = xml\n",
])
def test_config_errors_exit_2_without_report(tmp_path, body):
    cfg = _ini(tmp_path, body)
    out = tmp_path / "r.json"
    assert main(["run-game", "--config", cfg, "--out", str(out)]) == 2
    assert not out.exists()


def test_missing_config_file(tmp_path):
    assert main(["run-game", "--config", str(tmp_path / "none.ini")]) == 2


def test_dimension_guard_exit_3(tmp_path, monkeypatch):
    monkeypatch.setenv("CLONEBENCH_MAX_DIM", "16")
    cfg = _ini(tmp_path, "[experiment]\ngame = bb84\nlambda = 6\n")
    out = tmp_path / "r.json"
    assert main(["run-game", "--config", cfg, "--out", str(out)]) == 3
    assert not out.exists()


def test_optimize_zero_iterations_and_strategy_round_trip(tmp_path):
    cfg = _ini(tmp_path, "[experiment]\nkind = moe\nlambda = 1\n[seesaw]\nstarts = 2\nmax_iters = 0\n")
    out = tmp_path / "o.json"
    assert main(["optimize", "--config", cfg, "--seed", "3", "--out", str(out)]) == 0
    rep = _json(out)
    best = rep["records"][0]["value"]
    assert 0 <= best <= rep["records"][0]["bound"]
    strat = tmp_path / "o.json.strategy.json"
    assert strat.exists()
    cfg2 = _ini(tmp_path, f"[experiment]\nkind = moe\nlambda = 1\nstrategy = file:{strat}\n", "replay.ini")
    out2 = tmp_path / "replay.json"
    assert main(["run-game", "--config", cfg2, "--out", str(out2)]) == 0
    assert _json(out2)["records"][0]["value"] == pytest.approx(best, abs=1e-9)


def test_optimize_stdout_embeds_strategy(tmp_path, capsys):
    cfg = _ini(tmp_path, "[experiment]\nkind = moe\nlambda = 1\n[seesaw]\nstarts = 1\nmax_iters = 5\n")
    assert main(["optimize", "--config", cfg]) == 0
    rep = json.loads(capsys.readouterr().out)
    assert "strategy" in rep and rep["info"]["monotone"]


def test_verify_unknown_suite(tmp_path):
    out = tmp_path / "v.json"
    assert main(["verify", "no-such-suite", "--out", str(out)]) == 2
    assert not out.exists()


def test_verify_is_deterministic(tmp_path):
    paths = [tmp_path / "a.json", tmp_path / "b.json"]
    for p in paths:
        assert main(["verify", "triv-sandwich", "--seed", "5", "--out", str(p)]) == 0
    a, b = (_json(p) for p in paths)
    a.pop("generated_at"), b.pop("generated_at")
    assert a == b
    assert a["summary"]["failed"] == 0


def test_negative_seed_rejected():
    assert main(["verify", "min-entropy", "--seed", "-1"]) == 2
