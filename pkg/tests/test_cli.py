"""Tests for the command-line front end."""

import csv
import io
import json

import pytest

from weaktrace import __version__
from weaktrace.circuitfile import serialize
from weaktrace.cli import CSV_COLUMNS, SCHEMA, UNITS, run_command
from weaktrace.scenarios import build_salih_fig1


def read_csv(text):
    return list(csv.DictReader(io.StringIO(text)))


@pytest.fixture
def fig1_file(tmp_path):
    path = tmp_path / "fig1.wtc"
    path.write_text(serialize(build_salih_fig1()), encoding="utf-8")
    return path


class TestScenario:

    def test_json_and_csv(self, tmp_path, capsys):
        report, table = tmp_path / "fig1.json", tmp_path / "fig1.csv"
        assert run_command(["scenario", "fig1", "--json", str(report), "--csv", str(table)]) == 0
        assert capsys.readouterr().out.startswith("PASS fig1")

        document = json.loads(report.read_text(encoding="utf-8"))
        assert document["schema"] == SCHEMA
        assert document["version"] == __version__
        assert document["command"] == "scenario"
        assert document["convention"] == "real-v1"
        assert document["reports"][0]["passed"] is True

        rows = read_csv(table.read_text(encoding="utf-8"))
        assert rows and tuple(rows[0]) == CSV_COLUMNS
        assert {row["scenario"] for row in rows} == {"fig1"}

    def test_zero_coupling(self, tmp_path):
        table = tmp_path / "zero.csv"
        assert run_command(["scenario", "fig1", "--eps", "0", "--csv", str(table)]) == 0
        deficits = [row["fidelity_deficit"] for row in read_csv(table.read_text(encoding="utf-8"))]
        assert all(float(d) == 0.0 for d in deficits if d)

    def test_json_is_stable(self, tmp_path):
        first, second = tmp_path / "a.json", tmp_path / "b.json"
        run_command(["scenario", "strategy-b", "--json", str(first)])
        run_command(["scenario", "strategy-b", "--json", str(second)])
        assert first.read_bytes() == second.read_bytes()

    def test_unknown_scenario(self, capsys):
        assert run_command(["scenario", "fig9"]) == 2
        assert "unknown scenario" in capsys.readouterr().err

    def test_bad_arguments(self):
        assert run_command(["scenario", "fig1", "--eps", "-1"]) == 2
        assert run_command(["scenario", "fig1", "--mode", "sloppy"]) == 2
        assert run_command([]) == 2


class TestRun:

    def test_trace_a_circuit_file(self, fig1_file, tmp_path, capsys):
        report = tmp_path / "run.json"
        status = run_command(["run", str(fig1_file), "--postselect", "D0", "--weak", "C@t2", "--json", str(report)])
        assert status == 0
        out = capsys.readouterr().out
        assert "P(D0) = 0.25" in out

        document = json.loads(report.read_text(encoding="utf-8"))
        assert document["command"] == "run"
        assert document["config"]["epsilon"] == pytest.approx(1e-3)
        (body,) = document["reports"]
        assert body["outcome"] == "D0"
        assert body["weak_values"][0]["operator"] == "P_C"
        assert body["weak_values"][0]["value"] == pytest.approx(0.5, abs=1e-4)
        assert {trace["mirror"] for trace in body["traces"]} == {"MR_B1", "MR_B3"}

    def test_every_numeric_field_has_units(self, fig1_file, tmp_path):
        report = tmp_path / "run.json"
        run_command(["run", str(fig1_file), "--postselect", "D0", "--weak", "C@t2", "--json", str(report)])
        document = json.loads(report.read_text(encoding="utf-8"))
        assert document["units"] == UNITS
        assert document["units"]["coefficient"] == "units of epsilon"
        assert document["units"]["fidelity_deficit"] == "probability"
        (body,) = document["reports"]
        assert body["weak_values"][0]["kind"] in UNITS
        numeric = set()
        for entry in body["ledger"] + body["traces"]:
            numeric |= {key for key, value in entry.items() if isinstance(value, (int, float, dict)) and not isinstance(value, bool)}
        numeric |= {key for key in document["config"] if key != "mode"}
        assert numeric <= set(UNITS)
        assert {"epsilon", "fidelity_deficit", "predicted_deficit", "coherence"} <= set(UNITS)

    def test_csv_to_stdout(self, fig1_file, capsys):
        assert run_command(["run", str(fig1_file), "--postselect", "D0", "--eps", "0.01", "--csv", "-"]) == 0
        out = capsys.readouterr().out
        rows = read_csv(out[out.index("scenario,"):])
        deficits = {row["mirror"]: float(row["fidelity_deficit"]) for row in rows}
        assert deficits["MR_B1"] == pytest.approx(0.25e-4, rel=1e-2)

    def test_unknown_outcome(self, fig1_file, capsys):
        assert run_command(["run", str(fig1_file), "--postselect", "D9"]) == 2
        assert "unknown outcome" in capsys.readouterr().err

    def test_bad_weak_spec(self, fig1_file):
        assert run_command(["run", str(fig1_file), "--postselect", "D0", "--weak", "C"]) == 2
        assert run_command(["run", str(fig1_file), "--postselect", "D0", "--weak", "C@t99"]) == 2

    def test_parse_error_is_located(self, tmp_path, capsys):
        path = tmp_path / "bad.wtc"
        path.write_text("weaktrace-circuit 1\nports A\nstage\nlaser A\n", encoding="utf-8")
        assert run_command(["run", str(path), "--postselect", "D0"]) == 2
        assert f"{path}:4:1: unknown keyword" in capsys.readouterr().err

    def test_missing_file(self, tmp_path):
        assert run_command(["run", str(tmp_path / "nope.wtc"), "--postselect", "D0"]) == 2


class TestSweep:

    def test_rows_in_order(self, tmp_path):
        table = tmp_path / "sweep.csv"
        assert run_command(["sweep", "--eps-list", "0.01,0.001,0.0001", "--csv", str(table)]) == 0
        rows = read_csv(table.read_text(encoding="utf-8"))
        assert len(rows) == 6
        assert [float(row["epsilon"]) for row in rows] == [0.01, 0.01, 0.001, 0.001, 0.0001, 0.0001]
        for row in rows:
            if row["mirror"] == "MR_B1":
                eps = float(row["epsilon"])
                assert float(row["fidelity_deficit"]) == pytest.approx(eps**2 / 4, rel=1e-2)
                assert float(row["predicted_deficit"]) == pytest.approx(eps**2 / 4)

    def test_bad_inputs(self):
        assert run_command(["sweep", "--eps-list", "0.1,x"]) == 2
        assert run_command(["sweep", "--eps-list", "0.1,-0.2"]) == 2
        assert run_command(["sweep", "--eps-list", "0.1", "--scenario", "paradox"]) == 2
        assert run_command(["sweep", "--eps-list", "0.1", "--workers", "0"]) == 2
        assert run_command(["sweep", "--eps-list", "0.1", "--workers", "-3"]) == 2
        assert run_command(["sweep", "--eps-list", "0.1", "--workers", "two"]) == 2


def test_verify(capsys):
    assert run_command(["verify"]) == 0
    assert "8/8 scenarios passed" in capsys.readouterr().out
