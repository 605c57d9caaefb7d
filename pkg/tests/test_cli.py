"""End-to-end checks of the command-line surface.

Everything goes through cli.main(argv) in-process: cheaper than
subprocesses and the exit codes / files are identical.
"""

import json

import numpy as np
import pytest

from eigentrack import cli
from eigentrack.flows import diag_linear_flow, write_flow_file


def run_cli(*argv):
    return cli.main(list(argv))


# --------------------------------------------------------------------------
# run


def test_run_constant3_csv_schema(tmp_path, capsys):
    out = str(tmp_path) + "/"
    rc = run_cli("run", "--flow", "constant3", "--tau", "0.01",
                 "--tf", "1.0", "--output", out)
    assert rc == 0
    assert "wrote" in capsys.readouterr().out

    lines = (tmp_path / "trajectory.csv").read_text().splitlines()
    assert lines[0] == ("t,pair,lambda,x_1,x_2,x_3,"
                       "residual,solve_method,event")
    rows = [ln.split(",") for ln in lines[1:]]
    # 101 instants x 3 pairs
    assert len(rows) == 101 * 3
    assert all(len(r) == 9 for r in rows)
    assert sorted({r[1] for r in rows}) == ["1", "2", "3"]   # 1-based
    assert {r[8] for r in rows} <= {"startup", "predicted",
                                    "restart-triggered"}
    # identity flow: every eigenvalue is 1, so the bordered system is
    # singular and predicted rows must have taken the least-squares path
    predicted = [r for r in rows if r[8] == "predicted"]
    assert predicted and all(r[7] == "least-squares" for r in predicted)
    assert all(abs(float(r[2]) - 1.0) < 1e-9 for r in predicted)


def test_run_report_config_echo(tmp_path):
    out = str(tmp_path) + "/"
    rc = run_cli("run", "--tau", "0.01", "--tf", "1.0", "--output", out)
    assert rc == 0
    payload = json.loads((tmp_path / "report.json").read_text())
    assert payload["command"] == "run"
    assert payload["aborted"] is None
    cfg = payload["config"]
    expected = {"eta", "flow", "jump_threshold", "jumps", "metric", "mu",
                "output", "preset", "randomize_seed", "t0", "tau", "tf",
                "recursion", "derivative"}
    assert set(cfg) == expected
    assert cfg["flow"] == "paper"
    assert cfg["jumps"] == [8.0, 14.5]        # defaults echoed explicitly
    assert cfg["randomize_seed"] == 7
    assert cfg["recursion"] == "IFD5"
    assert cfg["derivative"] == "BDF4pt"
    summ = payload["summary"]
    for key in ("median_residual", "max_residual", "max_orth_deviation",
                "restarts", "metric"):
        assert key in summ
    assert summ["restarts"] == 0              # jumps lie beyond tf=1


def test_run_restarts_recorded(tmp_path):
    out = str(tmp_path) + "/"
    rc = run_cli("run", "--flow", "paper-raw", "--tau", "0.005",
                 "--jumps", "1.0", "--tf", "2.0", "--output", out)
    assert rc == 0
    payload = json.loads((tmp_path / "report.json").read_text())
    assert payload["summary"]["restarts"] == 1
    (t_jump, spike), = payload["restarts"]
    assert t_jump == pytest.approx(1.0)
    assert spike > 300.0
    kinds = {ln.rsplit(",", 1)[1] for ln in
             (tmp_path / "trajectory.csv").read_text().splitlines()[1:]}
    assert "restart-triggered" in kinds


def test_run_empty_jumps_means_smooth(tmp_path):
    out = str(tmp_path) + "/"
    rc = run_cli("run", "--tau", "0.01", "--tf", "1.0",
                 "--jumps", "", "--output", out)
    assert rc == 0
    payload = json.loads((tmp_path / "report.json").read_text())
    assert payload["config"]["jumps"] is None
    assert payload["summary"]["restarts"] == 0


def test_run_flow_file(tmp_path):
    src = diag_linear_flow()
    flow_path = tmp_path / "diag.flow"
    write_flow_file(flow_path, src, t0=0.0, tau=0.01, count=121)
    out = str(tmp_path) + "/"
    rc = run_cli("run", "--flow", str(flow_path), "--tau", "0.01",
                 "--tf", "1.0", "--eta", "4.5", "--output", out)
    assert rc == 0
    payload = json.loads((tmp_path / "report.json").read_text())
    assert payload["summary"]["median_residual"] < 1e-6
    assert payload["config"]["flow"] == str(flow_path)


def test_run_is_deterministic(tmp_path):
    a = str(tmp_path / "a") + "/"
    b = str(tmp_path / "b") + "/"
    for out in (a, b):
        assert run_cli("run", "--tau", "0.005", "--tf", "10.0",
                       "--output", out) == 0
    csv_a = (tmp_path / "a" / "trajectory.csv").read_bytes()
    csv_b = (tmp_path / "b" / "trajectory.csv").read_bytes()
    assert csv_a == csv_b
    # reports agree except for wall-clock timing
    rep_a = json.loads((tmp_path / "a" / "report.json").read_text())
    rep_b = json.loads((tmp_path / "b" / "report.json").read_text())
    for rep in (rep_a, rep_b):
        rep["config"].pop("output")
        for key in ("seconds_per_step", "step_utilization", "idle_fraction"):
            rep["summary"].pop(key)
    assert rep_a == rep_b


def test_run_config_file_merging(tmp_path):
    cfg_path = tmp_path / "cfg.json"
    cfg_path.write_text(json.dumps(
        {"flow": "constant3", "tau": 0.05, "tf": 1.0}))
    out = str(tmp_path) + "/"
    # flag overrides the file value
    rc = run_cli("run", "--config", str(cfg_path), "--tau", "0.02",
                 "--output", out)
    assert rc == 0
    payload = json.loads((tmp_path / "report.json").read_text())
    assert payload["config"]["tau"] == 0.02
    assert payload["config"]["flow"] == "constant3"


@pytest.mark.filterwarnings("ignore:overflow:RuntimeWarning")
@pytest.mark.filterwarnings("ignore:invalid value:RuntimeWarning")
def test_run_abort_writes_partial(tmp_path, capsys):
    out = str(tmp_path) + "/"
    rc = run_cli("run", "--flow", "paper-raw", "--tau", "0.005",
                 "--eta", "2000", "--tf", "2.0", "--output", out)
    assert rc == 3
    err = capsys.readouterr().err
    assert "numerical abort" in err
    payload = json.loads((tmp_path / "report.json").read_text())
    assert payload["aborted"]
    lines = (tmp_path / "trajectory.csv").read_text().splitlines()
    assert len(lines) > 1                     # partial trajectory on disk


# --------------------------------------------------------------------------
# configuration errors -> exit 2


@pytest.mark.parametrize("argv", [
    ("run", "--preset", "ifd9"),
    ("run", "--flow", "constant3", "--jumps", "1.0"),
    ("run", "--tf", "0.0"),
    ("run", "--tau", "-0.01"),
    ("run", "--flow", "/no/such/file.flow"),
    ("run", "--jumps", "3.0,1.0"),
    ("converge", "--taus", "0.01"),
    ("converge", "--taus", "0.01,0.005,0.0025", "--jumps", "1.0"),
])
def test_config_errors_exit_2(argv, tmp_path, capsys):
    rc = run_cli(*argv, "--output", str(tmp_path) + "/")
    assert rc == 2
    assert "error:" in capsys.readouterr().err


def test_unknown_config_key_exit_2(tmp_path, capsys):
    cfg_path = tmp_path / "cfg.json"
    cfg_path.write_text(json.dumps({"flow": "constant3", "bogus": 1}))
    rc = run_cli("run", "--config", str(cfg_path))
    assert rc == 2
    assert "bogus" in capsys.readouterr().err


def test_malformed_config_file_exit_2(tmp_path, capsys):
    cfg_path = tmp_path / "cfg.json"
    cfg_path.write_text("{not json")
    rc = run_cli("run", "--config", str(cfg_path))
    assert rc == 2
    assert "not valid JSON" in capsys.readouterr().err


# --------------------------------------------------------------------------
# formulas


def test_formulas_text(capsys):
    assert run_cli("formulas") == 0
    out = capsys.readouterr().out
    assert "(11,-18,9,-2) over 6*tau" in out
    assert "(25,-48,36,-16,3) over 12*tau" in out
    assert "c=9/4" in out
    assert "c=196/79" in out
    assert "[reconstructed]" in out
    assert "zero-stable" in out
    assert "UNSTABLE" not in out


def test_formulas_json(capsys):
    assert run_cli("formulas", "--json") == 0
    payload = json.loads(capsys.readouterr().out)
    assert [b["name"] for b in payload["backward"]] == ["BDF4pt", "BDF5pt"]
    recs = {r["name"]: r for r in payload["recursions"]}
    assert set(recs) == {"IFD5", "IFD6", "IFD7"}
    assert recs["IFD5"]["c"] == "9/4"
    assert recs["IFD5"]["reconstructed"] is False
    assert recs["IFD7"]["c"] == "196/79"
    assert recs["IFD7"]["reconstructed"] is True
    assert recs["IFD7"]["order"] == 5
    for rec in recs.values():
        assert rec["stable"] is True
        assert max(rec["root_moduli"]) == pytest.approx(1.0, abs=1e-9)


# --------------------------------------------------------------------------
# baseline


def test_baseline_outputs(tmp_path, capsys):
    out = str(tmp_path) + "/"
    rc = run_cli("baseline", "--flow", "diag-linear", "--tau", "0.01",
                 "--tf", "1.0", "--output", out)
    assert rc == 0
    assert "median residual" in capsys.readouterr().out
    lines = (tmp_path / "baseline.csv").read_text().splitlines()
    assert lines[0] == "t,pair,residual"
    assert len(lines) == 1 + 100 * 2          # scored instants x pairs
    payload = json.loads((tmp_path / "report.json").read_text())
    assert payload["command"] == "baseline"
    # hold-the-last-decomposition on diag(2+t, 5): the drifting eigenvalue
    # is off by exactly tau at each scored instant
    t, pair, res = lines[1].split(",")
    assert pair == "1"
    expect = 0.01 / np.hypot(2.0 + 0.01, 5.0)
    assert float(res) == pytest.approx(expect, rel=1e-12)


# --------------------------------------------------------------------------
# converge


def test_converge_outputs(tmp_path, capsys):
    out = str(tmp_path) + "/"
    rc = run_cli("converge", "--flow", "paper-raw", "--tau", "0.01",
                 "--eta", "4.5", "--tf", "2.0", "--output", out,
                 "--taus", "0.01,0.005,0.0025")
    assert rc == 0
    assert "slope" in capsys.readouterr().out
    lines = (tmp_path / "converge.csv").read_text().splitlines()
    assert lines[0] == "tau,eta,median_residual"
    assert len(lines) == 4
    taus = [float(ln.split(",")[0]) for ln in lines[1:]]
    etas = [float(ln.split(",")[1]) for ln in lines[1:]]
    assert taus == [0.01, 0.005, 0.0025]
    # the sweep holds the loop gain eta*tau fixed
    gains = [t * e for t, e in zip(taus, etas)]
    assert gains == pytest.approx([0.045] * 3)
    payload = json.loads((tmp_path / "report.json").read_text())
    assert payload["command"] == "converge"
    assert 2.5 < payload["slope"] < 5.5
    meds = payload["medians"]
    assert meds[0] > meds[1] > meds[2] > 0
