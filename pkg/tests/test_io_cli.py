from __future__ import annotations

import json
import shutil
import subprocess
import sys
from pathlib import Path

import pytest

from pmfix.cli import main
from pmfix.contraction import Affine, ExprMap, Halving, TableMap
from pmfix.errors import InvalidMap, MalformedInput, MalformedTable
from pmfix.io import dumps, loads, map_from_dict, parse_point, read_sequence, space_from_dict, space_to_dict
from pmfix.spaces import FiniteSpace, Intervals, MaxOnRPlus, WeightedMetric

GOLDEN = Path(__file__).parent / "golden"


@pytest.fixture
def workdir(tmp_path, monkeypatch):
    for f in (GOLDEN / "inputs").iterdir():
        shutil.copy(f, tmp_path / f.name)
    monkeypatch.chdir(tmp_path)
    return tmp_path


class TestFormats:
    def test_finite_round_trip(self):
        data = {"labels": ["a", "b"], "d": [[0.0, 1.0], [1.0, 0.5]]}
        sp = space_from_dict(data)
        assert isinstance(sp, FiniteSpace)
        assert space_to_dict(sp) == data

    def test_default_labels(self):
        assert space_from_dict({"d": [[0]]}).labels == ("p0",)

    @pytest.mark.parametrize("data,cls", [
        ({"family": "max_on_rplus"}, MaxOnRPlus),
        ({"family": "intervals", "params": {"region": [-1, 1]}}, Intervals),
        ({"family": "weighted", "params": {"knots": [0, 1], "values": [0, 1]}}, WeightedMetric),
    ])
    def test_continuous_round_trip(self, data, cls):
        sp = space_from_dict(data)
        assert isinstance(sp, cls)
        assert space_from_dict(space_to_dict(sp)) == sp

    @pytest.mark.parametrize("data", [
        [], {"family": "torus"}, {"d": "x"}, {"d": [[0, True], [1, 0]]}, {"d": [[0]], "labels": [1]},
        {"d": [[0]], "extra": 1}, {"family": "max_on_rplus", "params": {"alpha": 1}},
    ])
    def test_malformed_spaces(self, data):
        with pytest.raises(MalformedInput):
            space_from_dict(data)

    def test_negative_table(self):
        with pytest.raises(MalformedTable):
            space_from_dict({"d": [[0, -1], [-1, 0]]})

    @pytest.mark.parametrize("text", ['{"d": [[NaN]]}', '{"d": [[Infinity]]}', '{"d": [[-Infinity]]}', "{"])
    def test_non_finite_json(self, text):
        with pytest.raises(MalformedInput):
            loads(text)

    def test_maps(self):
        sp = space_from_dict({"labels": ["a", "b"], "d": [[0, 1], [1, 0]]})
        assert map_from_dict({"table": ["b", 0]}, sp).table == (1, 0)
        assert isinstance(map_from_dict({"family": "halving"}, MaxOnRPlus()), Halving)
        assert map_from_dict({"family": "affine", "params": {"a": 0.5}}, MaxOnRPlus()) == Affine(0.5, 0.0)
        assert isinstance(map_from_dict({"expr": "x/3"}, MaxOnRPlus()), ExprMap)

    @pytest.mark.parametrize("data", [{"table": [0, 5]}, {"table": [0]}])
    def test_bad_tables(self, data):
        with pytest.raises((InvalidMap, MalformedInput)):
            map_from_dict(data, FiniteSpace.from_table([[0, 1], [1, 0]]))

    @pytest.mark.parametrize("data", [{"table": [0, "zz"]}, {"family": "rotate"}, {"family": "affine"},
                                      {"expr": 3}, {"table": [0.5, 1]}])
    def test_malformed_maps(self, data):
        with pytest.raises(MalformedInput):
            map_from_dict(data, FiniteSpace.from_table([[0, 1], [1, 0]]))

    def test_points(self):
        sp = FiniteSpace.from_table([[0, 1], [1, 0]])
        assert parse_point(sp, "p1") == 1 and parse_point(sp, "0") == 0
        assert parse_point(MaxOnRPlus(), "2.5") == 2.5
        assert parse_point(Intervals(), "[1, 2]") == (1.0, 2.0)
        for space, text in ((sp, "q"), (MaxOnRPlus(), "abc"), (MaxOnRPlus(), "nan")):
            with pytest.raises(MalformedInput):
                parse_point(space, text)

    def test_sequence_csv(self, tmp_path):
        path = tmp_path / "s.csv"
        path.write_text("1.0\n\n0.5\n")
        assert read_sequence(path, MaxOnRPlus()) == [1.0, 0.5]
        path.write_text("1.0\nx\n")
        with pytest.raises(MalformedInput, match=":2:"):
            read_sequence(path, MaxOnRPlus())

    def test_dumps_round_trips_floats(self):
        vals = [0.1, 1 / 3, 2.0**-40, 1e300]
        assert json.loads(dumps({"v": vals}))["v"] == vals
        assert json.loads(dumps({"v": float("inf")}))["v"] == "inf"


class TestCli:
    def test_verify_text(self, workdir, capsys):
        assert main(["verify", "space3.json"]) == 0
        out = capsys.readouterr().out
        assert sum(line.startswith("PASS") for line in out.splitlines()) == 4

    def test_contract_text_shows_witness(self, workdir, capsys):
        assert main(["contract", "metric2.json", "swap.json", "--gauge", "linear:0.5", "--g", "c"]) == 1
        assert "witness (p0, p1)" in capsys.readouterr().out

    def test_solve_writes_trace(self, workdir, capsys):
        assert main(["solve", "space3.json", "const.json", "--gauge", "linear:0.5", "--x0", "p2",
                     "--trace", "orbit.csv"]) == 0
        rows = (workdir / "orbit.csv").read_text().splitlines()
        assert rows == ["n,x_n,rho_n,alpha_n", "0,p2,3.0,2.0", "1,p0,0.0,0.0", "2,p0,,0.0"]

    def test_solve_theorem2_finite(self, workdir, capsys):
        assert main(["solve", "space3.json", "const.json", "--gauge", "linear:0.5", "--theorem", "2", "--json"]) == 0
        cert = json.loads(capsys.readouterr().out)["certificate"]
        assert cert["fix"] == ["p0"] and cert["x_td"] == ["p0"] and cert["theta"] == 0.0

    def test_budget_is_exit_1(self, workdir, capsys):
        assert main(["solve", "max.json", "halving.json", "--gauge", "linear:0.5", "--x0", "1",
                     "--max-iter", "3"]) == 1

    def test_analyze_modes(self, workdir, capsys):
        base = ["analyze", "harmonic.csv", "--space", "standard.json", "--json"]
        assert main(base + ["--mode", "semicauchy", "--tol", "0.01"]) == 0
        assert json.loads(capsys.readouterr().out)["verdict"] is True
        assert main(base + ["--mode", "ecauchy", "--tol", "0.01"]) == 0
        assert json.loads(capsys.readouterr().out)["verdict"] is False
        assert main(base + ["--mode", "econv", "--x", "6.28"]) == 0
        assert main(base + ["--mode", "ranks", "--eps", "0.5"]) == 0

    def test_derive_continuous(self, workdir, capsys):
        assert main(["derive", "max.json", "--what", "e", "--x", "3", "--y", "1", "--json"]) == 0
        assert json.loads(capsys.readouterr().out)["value"] == 2.0

    @pytest.mark.parametrize("argv", [
        ["verify", "missing.json"],
        ["bogus"],
        ["derive", "space3.json", "--what", "q"],
        ["derive", "max.json", "--what", "e"],
        ["solve", "max.json", "halving.json", "--gauge", "linear:0.5"],
        ["solve", "max.json", "halving.json", "--gauge", "linear:0.5", "--x0", "-1"],
        ["fixed-points", "max.json", "halving.json"],
        ["contract", "space3.json", "swap.json", "--gauge", "linear:0.5"],
        ["analyze", "harmonic.csv", "--space", "standard.json", "--mode", "dconv"],
        ["analyze", "harmonic.csv", "--space", "standard.json", "--mode", "ranks"],
        ["search", "--config", "space3.json"],
        ["contract", "broken.json", "swap.json", "--gauge", "linear:0.5"],
    ])
    def test_malformed_input_exit_2(self, workdir, capsys, argv):
        assert main(argv) == 2
        err = capsys.readouterr().err.splitlines()
        assert len(err) == 1 and err[0].startswith("error: ")

    def test_json_reports_parse(self, workdir, capsys):
        for argv in (["verify", "space3.json"], ["fixed-points", "metric2.json", "swap.json"],
                     ["contract", "max.json", "halving.json", "--gauge", "rational"]):
            main(argv + ["--json"])
            assert isinstance(json.loads(capsys.readouterr().out), dict)

    def test_module_entry_point(self, workdir):
        proc = subprocess.run([sys.executable, "-m", "pmfix", "verify", "space3.json"], capture_output=True, text=True)
        assert proc.returncode == 0 and "PASS matthews" in proc.stdout
