import json
import subprocess
import sys

import pytest
import yaml

from flowshift.cli import build_parser, main

SMALL = {
    "fields": {"rot": {"name": "rigid_rotation"}, "tr": {"name": "translation"}},
    "scalars": {"r2": {"radial": {"a": 1, "b": 1}}},
    "grids": {"c": {"circles": {"radii": [0.5, 1], "n_angles": 4}, "jitter": 0.05},
              "line": {"points": [[0, 0], [1, 1]]}},
    "pairs": {"p": {"field": "rot", "mu": "r2"}},
    "suites": [
        {"name": "bridge", "kind": "bridge", "pair": "p", "grid": "c"},
        {"name": "oracle", "kind": "flow_oracle", "fields": ["rot"], "n_samples": 20},
    ],
}


def write(tmp_path, data, name="c.yaml"):
    path = tmp_path / name
    path.write_text(yaml.safe_dump(data))
    return str(path)


def test_flags_accepted_before_and_after_subcommand():
    p = build_parser()
    a = p.parse_args(["--rtol", "1e-8", "all"])
    b = p.parse_args(["all", "--rtol", "1e-8"])
    assert a.rtol == b.rtol == 1e-8


def test_suite_runs_and_writes_reports(tmp_path, capsys):
    cfg = write(tmp_path, SMALL)
    out = tmp_path / "out"
    assert main(["--config", cfg, "--output-dir", str(out), "suite", "bridge"]) == 0
    rep = json.loads((out / "bridge.json").read_text())
    assert rep["pass"] is True and rep["max_residual"] <= 1e-6 and rep["identity"]
    assert (out / "bridge.csv").read_text().startswith("label,point,residual\n")
    assert "PASS" in capsys.readouterr().out


def test_undefined_field_is_config_error(tmp_path, capsys):
    bad = dict(SMALL, suites=[{"name": "s", "kind": "period", "field": "ghost", "grid": "c"}])
    assert main(["--config", write(tmp_path, bad), "all"]) == 2
    assert "ghost" in capsys.readouterr().err


def test_unknown_suite_name_is_config_error(tmp_path):
    assert main(["--config", write(tmp_path, SMALL), "--output-dir", str(tmp_path), "suite", "nope"]) == 2


def test_empty_suite_list(tmp_path, capsys):
    cfg = write(tmp_path, dict(SMALL, suites=[]))
    assert main(["--config", cfg, "--output-dir", str(tmp_path / "o"), "all"]) == 0
    assert "0/0 suites passed" in capsys.readouterr().out
    assert json.loads((tmp_path / "o" / "summary.json").read_text())["suites"] == 0


def test_failing_suite_sets_exit_code(tmp_path, capsys):
    data = dict(SMALL, suites=SMALL["suites"] + [
        {"name": "tr-period", "kind": "period", "field": "tr", "grid": "line", "t_max": 20}])
    assert main(["--config", write(tmp_path, data), "--output-dir", str(tmp_path / "o"), "all"]) == 1
    out = capsys.readouterr().out
    assert "FAIL  tr-period" in out and "2/3 suites passed" in out


def test_deterministic_csv(tmp_path):
    cfg = write(tmp_path, SMALL)
    for d in ("a", "b"):
        assert main(["--config", cfg, "--output-dir", str(tmp_path / d), "--seed", "7", "all"]) == 0
    for name in ("bridge.csv", "oracle.csv"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_parallel_matches_sequential(tmp_path):
    cfg = write(tmp_path, SMALL)
    assert main(["--config", cfg, "--output-dir", str(tmp_path / "s"), "all"]) == 0
    assert main(["--config", cfg, "--output-dir", str(tmp_path / "p"), "--parallel", "2", "all"]) == 0
    for name in ("bridge.csv", "oracle.csv"):
        assert (tmp_path / "s" / name).read_bytes() == (tmp_path / "p" / name).read_bytes()


def test_seed_changes_jittered_grid(tmp_path):
    cfg = write(tmp_path, SMALL)
    main(["--config", cfg, "--output-dir", str(tmp_path / "a"), "--seed", "1", "suite", "bridge"])
    main(["--config", cfg, "--output-dir", str(tmp_path / "b"), "--seed", "2", "suite", "bridge"])
    assert (tmp_path / "a" / "bridge.csv").read_text() != (tmp_path / "b" / "bridge.csv").read_text()


def test_flow_command(tmp_path, capsys):
    assert main(["--output-dir", str(tmp_path), "flow", "--field", "rotation", "--point", "1", "0",
                 "--time", "pi"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["discrepancy"] < 1e-8
    assert main(["flow", "--field", "blowup", "--point", "1", "--time", "1.1", "--horizon", "-10", "10"]) == 1
    out = json.loads(capsys.readouterr().out)
    assert out["escape"]["reason"] == "BlowUp" and out["horizon"]["escape_hi"] == "BlowUp"
    assert main(["flow", "--field", "rotation", "--point", "1", "--time", "1"]) == 2


@pytest.mark.parametrize("argv, code", [
    (["shift", "--field", "rotation", "--alpha", "2*pi", "--grid", "box5", "--identity"], 0),
    (["shift", "--field", "rotation", "--alpha", "pi", "--grid", "box5", "--identity"], 1),
    (["shift", "--field", "translation", "--alpha", "const_07", "--grid", "box5"], 0),
    (["reparam-check", "--pair", "rotation_r2", "--grid", "unit_circle"], 0),
    (["reparam-check", "--pair", "line_vanishing", "--grid", "line_mixed", "--gammas", "0.5"], 1),
    (["pushforward-check", "--case", "rotation_tenth_x"], 0),
    (["period", "--field", "rotation", "--grid", "unit_circle", "--t-max", "10"], 0),
    (["period", "--field", "translation", "--grid", "translation_points", "--expect", "non_periodic"], 0),
    (["circle-normalize", "--field", "nonlinear", "--grid", "unit_circle", "--t-max", "10"], 0),
    (["circle-normalize", "--field", "translation", "--grid", "translation_points"], 1),
    (["linearize", "--field", "blocks", "--point", "0", "0", "0", "0", "0"], 0),
    (["linearize", "--field", "rotation", "--point", "1", "0"], 2),
    (["period", "--field", "rotation", "--grid", "nowhere"], 2),
])
def test_subcommands(tmp_path, argv, code):
    assert main(["--output-dir", str(tmp_path)] + argv) == code


def test_report_path_option(tmp_path):
    target = tmp_path / "pf.json"
    assert main(["--output-dir", str(tmp_path), "pushforward-check", "--case", "translation_x",
                 "--report", str(target)]) == 0
    rep = json.loads(target.read_text())
    assert rep["pass"] and rep["max_residual"] <= 5e-5


def test_console_entry_point(tmp_path):
    r = subprocess.run([sys.executable, "-m", "flowshift", "--version"], capture_output=True, text=True)
    assert r.returncode == 0 and "flowshift" in r.stdout
