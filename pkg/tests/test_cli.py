import json

import pytest

from baeflows.bethe import SolutionTuple
from baeflows.cli import crosscheck_path, main
from baeflows.exactcore import poly_from_json


def _write(path, data):
    path.write_text(json.dumps(data))
    return str(path)


def _read_out(capsys):
    return json.loads(capsys.readouterr().out)


def test_gen_and_verify_roundtrip(tmp_path, capsys):
    out = tmp_path / "sol.json"
    assert main(["gen", "--J", "1", "--c", "5", "--out", str(out)]) == 0
    y = SolutionTuple.from_json(json.loads(out.read_text()))
    assert [str(p.as_expr()) for p in y.polys] == ["x + 5", "1", "1"]
    assert main(["verify", str(out)]) == 0
    assert _read_out(capsys)["satisfied"] is True


def test_verify_rejects_non_solution(tmp_path, capsys):
    # (x(x - 3), 1, 1) is generic but not a solution
    path = _write(tmp_path / "bad.json", {"N": 3, "polys": [["0", "-3", "1"], ["1"], ["1"]]})
    assert main(["verify", path]) == 1
    report = _read_out(capsys)
    assert report["module"] == "bethe" and report["op"] == "verify_bae"


def test_gen_input_errors():
    assert main(["gen", "--J", "1,2", "--c", "0"]) == 2
    assert main(["gen", "--J", "4", "--c", "0"]) == 2
    assert main(["gen", "--J", "1", "--c", "abc"]) == 2


def test_missing_file_is_input_error(tmp_path):
    assert main(["verify", str(tmp_path / "nope.json")]) == 2


def test_unknown_command_is_input_error():
    assert main(["frobnicate"]) == 2


def test_baker_from_seed(tmp_path, capsys):
    seed = _write(tmp_path / "W.json", {"N": 3, "nu": 1, "W": [[1, 0, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1], [0, 1, 0, 0]]})
    assert main(["baker", "--seed", seed]) == 0
    assert isinstance(_read_out(capsys), dict)


def test_baker_bad_seed_reports_witness(tmp_path, capsys):
    seed = _write(tmp_path / "Wbad.json", {"N": 3, "nu": 1, "W": [[1, 0, 0, 1], [0, 0, 1, 0], [0, 0, 0, 1], [0, 1, 0, 0]]})
    assert main(["baker", "--seed", seed]) == 1
    report = _read_out(capsys)
    assert report["module"] == "periodic_inverse"
    assert {"op", "witness"} <= set(report)


def test_spectral_direct_inverse_roundtrip(tmp_path, capsys):
    point = _write(tmp_path / "p.json", {"u": ["0", "5/2", "-7/3"], "gamma": ["1", "-2", "1/2"]})
    spec = tmp_path / "s.json"
    assert main(["spectral", "--point", point, "--out", str(spec)]) == 0
    assert main(["spectral", "--spectrum", str(spec), "--t", "0,0,0"]) == 0
    out = _read_out(capsys)
    assert "point" in out and len(out["y"]) == 4


def test_evolve_and_rsflow(tmp_path, capsys):
    point = _write(tmp_path / "p.json", {"u": ["0", "5/2", "-7/3"], "gamma": ["1", "-2", "1/2"]})
    assert main(["evolve", "--point", point, "--t", "0.01,0,0"]) == 0
    assert "point" in _read_out(capsys)
    assert main(["rsflow", "--point", point, "--m", "1"]) == 0
    assert _read_out(capsys)["lax_residual"] < 1e-5


def test_tau_command(tmp_path, capsys):
    flag = _write(
        tmp_path / "flag.json",
        {"N": 3, "W_basis": [{"0": "1"}], "flag_vectors": [{"1": "1", "2": "2"}, {"0": "1", "2": "-3/2"}, {"2": "3/2"}]},
    )
    assert main(["tau", "--flag", flag, "--t", "1/2,0,1"]) == 0
    out = _read_out(capsys)
    assert len(out["taus"]) == 3
    assert all(poly_from_json(p) != 0 for p in out["taus"])


def test_tau_rejects_invalid_flag(tmp_path, capsys):
    flag = _write(tmp_path / "flag.json", {"N": 3, "W_basis": [{"0": "1"}], "flag_vectors": [{"2": "1"}, {"2": "1"}, {"0": "1"}]})
    assert main(["tau", "--flag", flag]) == 1
    assert _read_out(capsys)["module"] == "grassmann"


def test_crosscheck_single_path(capsys):
    assert main(["crosscheck", "--N", "3", "--J", "1,2", "--c", "0,0"]) == 0
    assert _read_out(capsys)["passed"] == 1


def test_crosscheck_random(capsys):
    assert main(["crosscheck", "--random", "3", "--length", "3", "--seed", "4"]) == 0
    assert _read_out(capsys)["passed"] == 3


def test_crosscheck_path_fields():
    r = crosscheck_path(3, (1, 3), (2, -1))
    assert r["bae"] and r["generation_vs_flag"] and r["generation_vs_matrix"] and r["flag_vs_matrix"]
