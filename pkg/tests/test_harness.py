import json
from fractions import Fraction as F

import pytest

from kpref import cli
from kpref.adversary import eval_bounds
from kpref.harness import (
    Instance, InstanceError, fraction_str, gen_random, run_duel, sweep,
    sweep_csv, SWEEP_COLUMNS,
)
from kpref.model import Request


EXAMPLE = {
    "metric": {"kind": "uniform", "n": 4},
    "k": 3,
    "initial": [0, 1, 2],
    "requests": [{"loc": 3}, {"loc": 0, "server": 1}],
}


def test_instance_round_trip():
    inst = Instance.from_json(EXAMPLE)
    assert inst.k == 3 and len(inst.requests) == 2
    assert inst.requests[0] == Request(3)
    assert inst.requests[1] == Request(0, 1)
    assert Instance.from_json(inst.to_json()).to_json() == inst.to_json()


def test_instance_rejects_garbage():
    with pytest.raises(InstanceError):
        Instance.from_json({"metric": {"kind": "uniform", "n": 3}, "k": 2,
                            "initial": [0], "requests": []})
    with pytest.raises(InstanceError):
        Instance.from_json({"metric": {"kind": "uniform", "n": 3}, "k": 2,
                            "initial": [0, 1], "requests": [{"loc": 0, "server": 9}]})


def test_line_instance_locations_parse_exactly():
    inst = Instance.from_json({
        "metric": {"kind": "line"}, "k": 2, "initial": [0, "5/2"],
        "requests": [{"loc": "7/2"}]})
    assert inst.initial[2] == F(5, 2)
    assert inst.requests[0].loc == F(7, 2)


def test_gen_random_deterministic():
    a = gen_random(7, 3, "uniform", n_locations=5, n_requests=12, s_target=F(1, 3))
    b = gen_random(7, 3, "uniform", n_locations=5, n_requests=12, s_target=F(1, 3))
    assert a.to_json() == b.to_json()


def test_gen_random_share_extremes():
    allspec = gen_random(3, 3, "uniform", n_requests=15, s_target=1)
    assert all(r.is_specific for r in allspec.requests)
    nospec = gen_random(3, 3, "uniform", n_requests=15, s_target=0)
    assert not any(r.is_specific for r in nospec.requests)


def test_gen_random_explicit_metric_is_metric():
    inst = gen_random(11, 3, "explicit", n_locations=4, n_requests=5)
    assert inst.metric.validate() is None


def test_fraction_str():
    assert fraction_str(F(28, 4)) == "7"
    assert fraction_str(F(15, 4)) == "15/4"
    assert fraction_str(None) == "undefined"
    assert fraction_str(5) == "5"


def test_sweep_rows_and_bounds():
    rows = sweep(3, [F(0), F(1, 2), F(1)], ["conf"], cycles=2)
    assert [r["s"] for r in rows] == ["0", "1/2", "1"]
    for row in rows:
        b = eval_bounds(3, F(row["s"]))
        assert row["lower"] == fraction_str(b.lower)
        assert row["conf_upper"] == fraction_str(b.conf_upper)
        assert row["def_upper"] == fraction_str(b.def_upper)
    assert rows[0]["ratio"] == "3"     # pure-general probe vs conf is exactly k


@pytest.mark.parametrize("k", [2, 3, 4, 5])
def test_sweep_pure_general_ratio_is_k(k):
    rows = sweep(k, [F(0)], ["conf"], cycles=2)
    assert rows[0]["ratio"] == str(k)


def test_sweep_csv_columns_stable():
    rows = sweep(2, [F(0)], ["conf"], cycles=1)
    text = sweep_csv(rows)
    header = text.splitlines()[0]
    assert header.split(",") == SWEEP_COLUMNS


def test_sweep_worker_pool_matches_sequential():
    grid = [F(0), F(1, 2)]
    seq = sweep(3, grid, ["conf"], cycles=1, workers=1)
    par = sweep(3, grid, ["conf"], cycles=1, workers=2)
    assert seq == par


def test_state_cap_env_override(monkeypatch):
    from kpref.offline import StateCapExceeded, opt_cost
    from kpref.metric import UniformMetric
    monkeypatch.setenv("KPREF_STATE_CAP", "50")
    with pytest.raises(StateCapExceeded):
        opt_cost(UniformMetric(5), {1: 0, 2: 1, 3: 2}, [Request(4)])


def test_duel_reproducible():
    a = run_duel("conf", "adaptive-lb:2/5", 3, 3)
    b = run_duel("conf", "adaptive-lb:2/5", 3, 3)
    assert [(r.alg_cost, r.opt_cost, r.g, r.f) for r in a.rows] == \
           [(r.alg_cost, r.opt_cost, r.g, r.f) for r in b.rows]


# ---------------------------------------------------------------------------
# CLI
# ---------------------------------------------------------------------------

def run_cli(capsys, *argv):
    code = cli.main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_cli_duel(capsys):
    code, out, _ = run_cli(capsys, "duel", "--adversary", "conf-killer",
                           "--algo", "conf", "--k", "3", "--cycles", "4")
    assert code == 0
    data = json.loads(out)
    assert data["ratio"] == "7"
    assert data["total_alg_cost"] == 28 and data["total_opt_cost"] == 4


def test_cli_run_and_opt(tmp_path, capsys):
    path = tmp_path / "inst.json"
    path.write_text(json.dumps(EXAMPLE))
    code, out, _ = run_cli(capsys, "run", str(path), "--algo", "conf", "--audit")
    assert code == 0
    data = json.loads(out)
    assert data["total_cost"] == 2
    code, out, _ = run_cli(capsys, "opt", str(path), "--schedule")
    assert code == 0
    data = json.loads(out)
    assert data["cost"] == 1
    assert len(data["schedule"]) == 2


def test_cli_opt_empty_instance(tmp_path, capsys):
    empty = dict(EXAMPLE, requests=[])
    path = tmp_path / "empty.json"
    path.write_text(json.dumps(empty))
    code, out, _ = run_cli(capsys, "opt", str(path))
    assert code == 0 and json.loads(out)["cost"] == 0


def test_cli_gen_validate_round_trip(tmp_path, capsys):
    path = tmp_path / "gen.json"
    code, _, _ = run_cli(capsys, "gen", "--seed", "5", "--k", "3",
                         "--requests", "10", "--out", str(path))
    assert code == 0
    code, out, _ = run_cli(capsys, "validate", str(path))
    assert code == 0 and out.strip() == "ok"


def test_cli_validate_catches_metric_violation(tmp_path, capsys):
    bad = {"metric": {"kind": "explicit", "d": [[0, 5, 1], [5, 0, 1], [1, 1, 0]]},
           "k": 2, "initial": [0, 1], "requests": []}
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(bad))
    code, _, err = run_cli(capsys, "validate", str(path))
    assert code == 1 and "triangle" in err


def test_cli_schema_error_exit_code(tmp_path, capsys):
    path = tmp_path / "broken.json"
    path.write_text(json.dumps({"metric": {"kind": "uniform", "n": 2}, "k": 2,
                                "initial": [0]}))
    code, _, err = run_cli(capsys, "run", str(path), "--algo", "conf")
    assert code == 1 and err


def test_cli_resource_cap_exit_code(tmp_path, capsys):
    inst = {"metric": {"kind": "uniform", "n": 9}, "k": 6,
            "initial": [0, 1, 2, 3, 4, 5],
            "requests": [{"loc": 8}]}
    path = tmp_path / "big.json"
    path.write_text(json.dumps(inst))
    code, _, err = run_cli(capsys, "opt", str(path), "--state-cap", "100")
    assert code == 2 and "cap" in err


def test_cli_sweep(capsys):
    code, out, _ = run_cli(capsys, "sweep", "--k", "3", "--grid", "0,1/2",
                           "--algos", "conf", "--cycles", "1")
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0] == ",".join(SWEEP_COLUMNS)
    assert len(lines) == 3


def test_cli_config_file(tmp_path, capsys):
    cfg = tmp_path / "kpref.toml"
    cfg.write_text('[duel]\nadversary = "conf-killer"\nalgo = "conf"\nk = 3\ncycles = 2\n')
    code, out, _ = run_cli(capsys, "duel", "--adversary", "conf-killer",
                           "--algo", "conf", "--k", "3", "--config", str(cfg))
    assert code == 0
    assert json.loads(out)["cycles"] == 2


def test_cli_combined_algorithm(capsys):
    code, out, _ = run_cli(capsys, "duel", "--adversary", "general-lb",
                           "--algo", "conf+def:1", "--k", "3", "--cycles", "2")
    assert code == 0
    data = json.loads(out)
    assert data["algorithm"] == "conf+def:1"
    assert data["total_opt_cost"] == 2
