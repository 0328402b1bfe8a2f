import json
import subprocess
import sys

import pytest

from ssh_revival import runner
from ssh_revival.cli import main
from ssh_revival.runner import KEYS, ConfigError, ExperimentConfig, parse_config_text

SMALL_POP = ["--set", "params.L=5", "--set", "grid.n_steps=6", "--set", "grid.t_max=4"]


def test_list_experiments(capsys):
    assert main(["list-experiments"]) == 0
    assert capsys.readouterr().out.split() == list(runner.EXPERIMENTS)


def test_validate_even_length(capsys):
    assert main(["validate", "populations", "--set", "params.L=8"]) == 2
    err = capsys.readouterr().err
    assert "odd" in err and "L=8" in err


def test_validate_lists_every_violation(capsys):
    code = main(["validate", "--set", "params.L_list=4,6", "--set", "grid.n_steps=1", "--set", "statistics=anyon"])
    assert code == 2
    err = capsys.readouterr().err
    assert "L=4" in err and "L=6" in err and "n_steps" in err and "statistics" in err


def test_validate_bose_dense_refusal(capsys):
    assert main(["validate", "revival", "--set", "statistics=bose", "--set", "params.L_list=15"]) == 3
    assert "490314" in capsys.readouterr().err


def test_validate_empty_config_echoes_defaults(tmp_path, capsys):
    cfg = tmp_path / "empty.cfg"
    cfg.write_text("")
    assert main(["validate", "--config", str(cfg)]) == 0
    out = capsys.readouterr().out
    for key in KEYS:
        assert f"{key} = " in out
    assert "params.L_list = 51,201,1001" in out


def test_config_file_and_overrides(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# comment\nexperiment = populations\nparams.L = 9  # trailing\n")
    values = parse_config_text(cfg.read_text())
    assert values == {"experiment": "populations", "params.L": "9"}
    resolved = ExperimentConfig.from_mapping({**values, "params.ratio": "0.3"})
    assert (resolved.L, resolved.ratio, resolved.n_steps) == (9, 0.3, 51)
    with pytest.raises(ConfigError):
        parse_config_text("just words")
    with pytest.raises(ConfigError):
        ExperimentConfig.from_mapping({"params.L": "seven"})
    with pytest.raises(ConfigError):
        ExperimentConfig.from_mapping({"params.nope": "1"})


def test_bad_config_exit_codes(tmp_path, capsys):
    assert main(["run", "--config", str(tmp_path / "missing.cfg")]) == 2
    assert main(["run", "--set", "no-equals-sign"]) == 2
    assert main(["run", "--set", "params.bogus=1"]) == 2
    capsys.readouterr()


def test_bose_defaults_follow_statistics():
    cfg = ExperimentConfig.from_mapping({"experiment": "mutual-information", "statistics": "bose"})
    assert cfg.L_list == (11, 15) and cfg.order == 2.0 and cfg.flavor == "conventional"


def test_run_populations_csv_deterministic(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(["run", "populations", *SMALL_POP, "--output", str(a)]) == 0
    assert main(["run", "populations", *SMALL_POP, "--output", str(b), "--threads", "3"]) == 0
    assert a.read_bytes() == b.read_bytes()
    text = a.read_text()
    assert "# version: " in text and "# config.params.L: 5" in text and "wall" not in text
    header = [l for l in text.splitlines() if not l.startswith("#")][0]
    assert header.startswith("gamma_t,t [1/g2],P1_closed")
    assert "P3_qme" in header


def test_run_json_and_sidecar(tmp_path):
    out = tmp_path / "pop.json"
    args = ["run", "populations", *SMALL_POP, "--format", "json", "--output", str(out), "--set", "output.sidecar=true"]
    assert main(args) == 0
    doc = json.loads(out.read_text())
    assert doc["columns"][0] == {"name": "gamma_t", "unit": ""}
    assert len(doc["rows"]) == 6
    assert doc["metadata"]["max_abs_deviation"] <= 0.02
    side = json.loads((tmp_path / "pop.json.meta.json").read_text())
    assert side["wall_time_s"] > 0 and side["status"] == "ok"


def test_run_stdout_and_resource_refusal(capsys):
    assert main(["run", "revival", "--set", "params.L_list=5,7", "--set", "grid.n_steps=5"]) == 0
    out = capsys.readouterr().out
    assert "E_L5 [bits]" in out and "# measure: negativity:fermionic" in out
    assert main(["run", "revival", "--set", "statistics=bose", "--set", "params.L_list=15"]) == 3
    assert "490314" in capsys.readouterr().err


def test_oracle_check_and_mismatch(monkeypatch, capsys):
    args = ["run", "oracle-check", "--set", "params.L_list=3,5", "--set", "params.ratio_list=0.5", "--set", "grid.n_steps=3"]
    assert main(args) == 0
    capsys.readouterr()
    monkeypatch.setattr(runner, "ORACLE_TOL", -1.0)
    assert main(args) == 4
    assert "oracle mismatch" in capsys.readouterr().err


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "ssh_revival", "list-experiments"], capture_output=True, text=True)
    assert proc.returncode == 0 and "revival" in proc.stdout
