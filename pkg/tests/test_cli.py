import csv
import io
import json
import math

import pytest

from normlab import bounds, cli
from normlab.config import ConfigError, ExperimentConfig, load_config
from normlab.sweep import HEADER, ReportRow, render_report, run_sweep, sweep_status

GAUSS_INI = """
[symbol]
example = gaussian

[sweep]
n = 1
h = 0.5, 1.0

[output]
format = csv
"""


@pytest.fixture
def ini(tmp_path):
    def write(text, name="run.ini"):
        p = tmp_path / name
        p.write_text(text, encoding="utf-8")
        return str(p)

    return write


# -- config -------------------------------------------------------------------


def test_load_config_fields(ini):
    cfg = load_config(
        ini(
            """
[symbol]
example = lattice
potential = gauss
couplings = geometric:0.5
[sweep]
n = 1, 2
h = 0.05; 0.1
constants = fitted
[window]
x = -5, 5
"""
        )
    )
    assert cfg.example == "lattice" and cfg.potential == "gauss"
    assert cfg.n_values == (1, 2) and cfg.h_values == (0.05, 0.1)
    assert cfg.couplings_for(3) == (0.5, 0.25, 0.125)
    assert cfg.window_x == (-5.0, 5.0) and cfg.constants == "fitted"


@pytest.mark.parametrize(
    "text",
    [
        "[symbol]\nexample = nope\n",
        "[sweep]\nh = -1\n",
        "[sweep]\nn = 4\n",
        "[bogus]\nk = 1\n",
        "[sweep]\nspeed = 3\n",
        "[grid]\ncount = 100\n",
        "[window]\nx = 3, 1\n",
    ],
)
def test_invalid_configs_rejected(ini, text):
    with pytest.raises(ConfigError):
        load_config(ini(text))


def test_symbol_file_resolved_relative_to_config(ini, tmp_path):
    (tmp_path / "f.sym").write_text("exp(-(x1^2 + p1^2))\n", encoding="utf-8")
    cfg = load_config(ini("[symbol]\nexample = file\nfile = f.sym\n"))
    assert cfg.symbol_file == str(tmp_path / "f.sym")


# -- reports ----------------------------------------------------------------


def test_empty_report_is_header_only():
    text = render_report([], "csv")
    assert text == ",".join(HEADER) + "\n"


def test_one_row_two_lines_and_twelve_digits():
    row = ReportRow(1, 0.1, "x", M=1 / 3, rho=(0.5, 2 / 3), delta=(1.0, 1.0), bound=math.pi, norm=0.1, passed="true")
    text = render_report([row], "csv")
    lines = text.splitlines()
    assert len(lines) == 2
    rec = next(csv.DictReader(io.StringIO(text)))
    assert rec["bound"] == "3.14159265359"
    assert rec["rho"] == "0.5;0.666666666667"
    assert rec["seconds"] == ""


def test_json_round_trip():
    row = ReportRow(2, 0.5, "y", M=0.123456789012345, rho=(0.1, 0.2), delta=(0.3, 0.4), bound=2.0, norm=1.5, passed="true", seconds=1.25)
    objs = json.loads(render_report([row], "json", timing=True))
    assert objs[0]["M"] == pytest.approx(row.M, rel=1e-11)
    assert objs[0]["rho"] == [0.1, 0.2]
    assert objs[0]["seconds"] == 1.25
    assert list(objs[0]) == list(HEADER)


def test_sweep_rows_and_status():
    # fitted constants for exp(-(x^2 + xi^2)) have rho delta = 2, so h = 1/4 is admissible and h = 1/2 just misses
    rows = run_sweep(ExperimentConfig(example="gaussian", n_values=(1,), h_values=(0.25, 0.5)))
    assert len(rows) == 2
    r = rows[0]
    assert r.passed == "true" and r.consistent()
    assert r.norm == pytest.approx(1 / 1.25, abs=1e-8)
    assert r.rho[0] * r.delta[0] == pytest.approx(2.0, rel=1e-5)
    assert rows[1].passed == "skip"
    assert sweep_status(rows) == 0


def test_sweep_records_errors_without_dropping_points(tmp_path):
    cfg = ExperimentConfig(example="file", symbol_file=str(tmp_path / "missing.sym"), n_values=(1,), h_values=(0.1, 0.2))
    rows = run_sweep(cfg)
    assert len(rows) == 2 and all(r.error for r in rows)
    assert sweep_status(rows) == 4


def test_precondition_rows_are_skipped():
    cfg = ExperimentConfig(example="lattice", n_values=(2,), h_values=(0.5,), constants="paper", operator=False)
    rows = run_sweep(cfg)
    assert rows[0].passed == "skip" and rows[0].error.startswith("precondition")
    assert sweep_status(rows) == 0


# -- command line -------------------------------------------------------------


def test_sweep_cli_is_byte_identical(ini, tmp_path, capsys):
    cfg = ini(GAUSS_INI)
    outs = []
    for k in range(2):
        path = tmp_path / f"out{k}.csv"
        assert cli.main(["sweep", "--config", cfg, "--out", str(path)]) == 0
        outs.append(path.read_bytes())
    assert outs[0] == outs[1]
    assert outs[0].count(b"\n") == 3


def test_sweep_needs_config(capsys):
    assert cli.main(["sweep"]) == cli.EXIT_CONFIG


def test_bad_symbol_file_is_config_error(tmp_path, capsys):
    p = tmp_path / "bad.sym"
    p.write_text("p1*(x1\n", encoding="utf-8")
    assert cli.main(["norm", "--symbol-file", str(p)]) == cli.EXIT_CONFIG
    assert "byte offset 6" in capsys.readouterr().err


def test_norm_and_constants_commands(capsys):
    assert cli.main(["norm", "--example", "gaussian", "--h", "1", "--format", "json"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["norm"] == pytest.approx(0.5, abs=1e-8)
    assert cli.main(["constants", "--format", "json"]) == 0
    table = json.loads(capsys.readouterr().out)
    assert table["81*pi"] == pytest.approx(81 * math.pi)
    assert table["C_1"] == pytest.approx(4 / math.sqrt(math.pi))


def test_decompose_check_command(capsys):
    assert cli.main(["decompose-check", "--example", "gaussian", "--h", "0.5"]) == 0
    assert "defect" in capsys.readouterr().out
    assert cli.main(["decompose-check", "--example", "gaussian", "--n", "3"]) == cli.EXIT_CONFIG


def test_verify_quick_green(capsys):
    assert cli.main(["verify", "--quick"]) == 0
    out = capsys.readouterr().out
    assert "FAIL" not in out


def test_tampered_constant_is_caught(monkeypatch, capsys):
    monkeypatch.setattr(bounds, "THEOREM_CONSTANT", 8 * math.pi)
    code = cli.main(["verify", "--quick"])
    out = capsys.readouterr().out
    assert code != 0
    assert "FAIL  [5] constant chain" in out
    assert "failing criteria: [5]" in out


def test_bound_check_command(capsys):
    assert cli.main(["bound-check", "--example", "gaussian", "--h", "0.25", "--format", "json"]) == 0
    (row,) = json.loads(capsys.readouterr().out)
    # rho delta = 2 for the fitted Gaussian, so M (1 + 81 pi h rho delta) = 1 + 40.5 pi
    assert row["bound"] == pytest.approx(1 + 40.5 * math.pi, rel=1e-5)
    assert row["norm"] == pytest.approx(0.8, abs=1e-8)
    assert row["pass"] == "true"
