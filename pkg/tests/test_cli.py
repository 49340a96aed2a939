import csv
import json
import subprocess
import sys

import numpy as np
import pytest

from setflow.cli import EXIT_INPUT, EXIT_INVARIANT, EXIT_OK, main

SQUARE = json.dumps({"type": "polygon", "vertices": [[0, 0], [1, 0], [1, 1], [0, 1]]})
DISK = json.dumps({"type": "disk", "radius": 1.0})


def _json_out(capsys):
    return json.loads(capsys.readouterr().out)


def test_spectrum(capsys):
    assert main(["spectrum", "--m", "6"]) == EXIT_OK
    d = _json_out(capsys)
    np.testing.assert_allclose(d["eigenvalues"], [2, 1, -1, -2], atol=1e-12)


def test_spectrum_bad_order(capsys):
    assert main(["spectrum", "--m", "2"]) == EXIT_INPUT
    assert "invalid input" in capsys.readouterr().err


def test_metric(capsys):
    assert main(["metric", "--x", SQUARE, "--y", DISK]) == EXIT_OK
    d = _json_out(capsys)
    assert d["rho"] == pytest.approx(0.14292, abs=1e-4)
    assert d["deficit"]["delta"] == pytest.approx(4 / np.pi - 1)


def test_metric_from_file(tmp_path, capsys):
    f = tmp_path / "sq.json"
    f.write_text(SQUARE)
    out = tmp_path / "m.json"
    assert main(["metric", "--x", str(f), "--y", str(f), "--out", str(out)]) == EXIT_OK
    assert json.loads(out.read_text())["rho"] <= 1e-9


def test_nonconvex_body(capsys):
    bad = json.dumps({"type": "polygon", "vertices": [[0, 0], [2, 0], [1, 0.2], [2, 2], [0, 2]]})
    assert main(["metric", "--x", bad, "--y", DISK]) == EXIT_INPUT


def test_bad_json(capsys):
    assert main(["metric", "--x", "{not json", "--y", DISK]) == EXIT_INPUT


def test_unknown_subcommand(capsys):
    assert main(["frobnicate"]) == EXIT_INPUT


def test_simulate_csv(tmp_path):
    out = tmp_path / "traj.csv"
    rc = main(["simulate", "--body", DISK, "--m", "4", "--T", "1", "--steps", "4", "--modes", "3", "--out", str(out)])
    assert rc == EXIT_OK
    rows = list(csv.DictReader(open(out)))
    assert len(rows) == 5
    assert float(rows[-1]["V"]) == pytest.approx(np.pi * np.e**2)
    assert float(rows[-1]["diam"]) == pytest.approx(2 * np.e)


def test_simulate_stdout(capsys):
    assert main(["simulate", "--body", SQUARE, "--angle", "1.5707963267948966", "--times", "0", "0.5"]) == EXIT_OK
    lines = capsys.readouterr().out.strip().splitlines()
    assert lines[0].startswith("t,V,r,R,diam") and len(lines) == 3


def test_simulate_incompatible_grid(capsys):
    assert main(["simulate", "--body", DISK, "--m", "3", "--integrator", "rk4"]) == EXIT_INPUT


def test_closed_form(capsys):
    body = json.dumps({"type": "random", "seed": 4, "roughness": 0.1})
    assert main(["closed-form", "--m", "4", "--x", body, "--y", DISK, "--t", "0.5", "2", "--geometric"]) == EXIT_OK
    d = _json_out(capsys)
    for row in d["values"]:
        assert row["closed_form"] == pytest.approx(row["expm"], rel=1e-12)
        assert row["closed_form"] == pytest.approx(row["geometric"], rel=1e-12)


def _config(tmp_path, **kw):
    cfg = {
        "m": 4,
        "X0_star": {"type": "random", "roughness": 0.05, "seed": 2},
        "perturbation": {"modes": [3], "amplitudes": [0.05], "phases": [0.0]},
        "T": 6.0,
        "n_times": 13,
        "ladder": [0.01],
    }
    cfg.update(kw)
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(cfg))
    return str(path)


@pytest.mark.parametrize("kind", ["stability", "attraction", "probe"])
def test_experiment(tmp_path, kind):
    cfg = _config(tmp_path) if kind != "probe" else _config(tmp_path, operator={"kind": "rotation", "angle": 2.399963229728653})
    out = tmp_path / f"{kind}.csv"
    assert main(["experiment", kind, "--config", cfg, "--out", str(out)]) == EXIT_OK
    rows = list(csv.DictReader(open(out)))
    assert len(rows) == 13 and set(rows[0]) == {"t", "rho", "delta", "V", "S_cross"}
    summary = json.load(open(tmp_path / f"{kind}.summary.json"))
    assert summary["kind"] == kind


def test_experiment_not_in_manifold(tmp_path, capsys):
    cfg = _config(tmp_path, perturbation={"modes": [4], "amplitudes": [0.01]})
    assert main(["experiment", "attraction", "--config", cfg]) == EXIT_INPUT
    assert main(["experiment", "attraction", "--config", cfg, "--allow-outside"]) == EXIT_OK


def test_seed_env_is_reproducible(tmp_path, monkeypatch):
    cfg = _config(tmp_path, perturbation={"modes": [2], "amplitudes": [0.02]})
    outs = []
    for seed, name in (("5", "a"), ("5", "b"), ("6", "c")):
        monkeypatch.setenv("SETFLOW_SEED", seed)
        out = tmp_path / f"{name}.csv"
        assert main(["experiment", "stability", "--config", cfg, "--out", str(out)]) == EXIT_OK
        outs.append(out.read_text())
    assert outs[0] == outs[1] != outs[2]


def test_invariant_exit_code(monkeypatch, capsys):
    from setflow import cli
    from setflow.errors import ConvexityViolation

    def boom(args):
        raise ConvexityViolation("synthetic")

    monkeypatch.setattr(cli, "cmd_spectrum", boom)
    ap = cli.build_parser()
    for action in ap._subparsers._group_actions[0].choices.values():
        if action.prog.endswith("spectrum"):
            action.set_defaults(func=boom)
    monkeypatch.setattr(cli, "build_parser", lambda: ap)
    assert cli.main(["spectrum", "--m", "4"]) == EXIT_INVARIANT


def test_console_entry_point():
    r = subprocess.run([sys.executable, "-m", "setflow.cli", "spectrum", "--m", "3"], capture_output=True, text=True)
    assert r.returncode == 0
    assert json.loads(r.stdout)["m"] == 3
