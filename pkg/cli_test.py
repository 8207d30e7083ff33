import csv
import io
import json

import pytest

from pathSystems import cli
from pathSystems.errors import ConfigError

SMALL = ["--grid-step", "0.0625", "--grid-max", "48", "--samples", "3", "--t", "0.5",
         "--levels", "3"]


def _run(argv):
    cfg = cli.config_from_args(argv)
    out = io.StringIO()
    report, code = cli.run(cfg, stream=out)
    return report, code, out.getvalue()


@pytest.mark.parametrize("command", sorted(cli.COMMANDS))
def test_every_experiment_passes_on_a_small_grid(command):
    report, code, text = _run([command] + SMALL)
    assert code == cli.EXIT_PASS, report.violations
    assert report.passed
    assert report.rows
    data = json.loads(text)
    assert data["name"] == command
    assert data["params"]["seed"] == cli.settings.DEFAULT_SEED


def test_convergence_table_as_csv(tmp_path):
    target = tmp_path / "table.csv"
    report, code, _ = _run(["converge-log", "--t", "1", "--levels", "10", "--format", "csv",
                            "--out", str(target)])
    assert code == cli.EXIT_PASS
    with open(target, newline="") as fp:
        rows = list(csv.DictReader(fp))
    assert [int(r["n"]) for r in rows] == [2 ** k for k in range(11)]
    assert float(rows[1]["B"]) == pytest.approx(1.297442, abs=1e-6)
    assert abs(float(rows[-1]["B"]) - 1) <= 6e-4


def test_ramp_demo():
    report, code, _ = _run(["cocycle", "--demo", "ramp", "--grid-step", "0.0625",
                            "--grid-max", "48"])
    assert code == cli.EXIT_PASS
    assert len(report.rows) == 16
    assert report.worst <= 1e-12


def test_counterexample_report():
    report, code, _ = _run(["span", "--counterexample"])
    assert code == cli.EXIT_PASS
    values = {r["quantity"]: r["value"] for r in report.rows}
    assert values["witness"] <= 1e-12
    assert values["control"] == pytest.approx(2 ** -0.5)


def test_config_file_sits_between_defaults_and_flags(tmp_path):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps({"samples": 2, "seed": 5, "grid-max": 96}))
    cfg = cli.config_from_args(["cpd", "--config", str(path), "--seed", "7"])
    assert cfg.samples == 2
    assert cfg.seed == 7
    assert cfg.grid_max == 96
    assert cfg.grid_step == cli.settings.DEFAULT_STEP


def test_unknown_config_key(tmp_path):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps({"sampels": 2}))
    with pytest.raises(ConfigError, match="sampels"):
        cli.config_from_args(["cpd", "--config", str(path)])
    assert cli.main(["cpd", "--config", str(path)]) == cli.EXIT_BAD_INPUT


@pytest.mark.parametrize("argv", [
    ["cocycle", "--demo", "spiral"],
    ["cpd", "--t", "0.3"],
    ["gamma", "--samples", "0"],
    ["agree", "--tol", "-1"],
])
def test_bad_input_exit_code(argv):
    assert cli.main(argv) == cli.EXIT_BAD_INPUT


def test_violation_exit_code(monkeypatch):
    def failing(cfg):
        return cli._report(cfg, "cpd", [{"x": 1.0}], 1e-10, [("forced", 1.0, False)])

    monkeypatch.setitem(cli.COMMANDS, "cpd", failing)
    report, code, _ = _run(["cpd"])
    assert code == cli.EXIT_VIOLATION
    assert report.violations == ["forced: 1.000e+00"]
    assert cli.main(["cpd", "--out", "/dev/null"]) == cli.EXIT_VIOLATION


def test_unknown_subcommand_exits():
    with pytest.raises(SystemExit):
        cli.config_from_args(["frobnicate"])


@pytest.mark.parametrize("command", ["cpd", "gamma", "ineq", "agree", "iso"])
def test_same_seed_reports_match_byte_for_byte(command):
    texts = []
    for _ in range(2):
        _, _, text = _run([command] + SMALL)
        data = json.loads(text)
        data.pop("timestamp")
        texts.append(json.dumps(data, sort_keys=True))
    assert texts[0] == texts[1]


def test_agreement_over_fifty_pairs():
    report, code, _ = _run(["agree", "--samples", "50", "--dim", "3", "--t", "1"])
    assert code == cli.EXIT_PASS, report.violations
    assert len(report.rows) == 50


def test_cpd_tolerance_follows_the_gram_scale():
    report, code, _ = _run(["cpd"] + SMALL)
    assert code == cli.EXIT_PASS
    for row in report.rows:
        assert row["tolerance"] >= cli.settings.EIG_TOL
        assert row["min_eig"] >= -row["tolerance"]


def test_programming_errors_are_not_bad_input(monkeypatch):
    def broken(cfg):
        raise TypeError("unsupported operand")

    monkeypatch.setitem(cli.COMMANDS, "cpd", broken)
    with pytest.raises(TypeError):
        cli.main(["cpd"])


def test_mistyped_config_value_is_bad_input(tmp_path):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps({"samples": "3"}))
    with pytest.raises(ConfigError, match="samples"):
        cli.run(cli.config_from_args(["cpd", "--config", str(path)]), stream=io.StringIO())
    assert cli.main(["cpd", "--config", str(path)]) == cli.EXIT_BAD_INPUT
