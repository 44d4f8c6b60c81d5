import json
import math

import pytest

from helpers import mp_edge
from ssdt.cli import main

ISO_QUARTER = {
    "gamma": 0.25,
    "nu": [{"atom": 1, "weight": 1}],
    "unu": [{"atom": 1, "weight": 1}],
}

TWO_ATOM = {
    "gamma": 0.5,
    "nu": [{"atom": 2, "weight": 0.5}, {"atom": 3, "weight": 0.5}],
    "unu": [{"atom": 2, "weight": 0.5}, {"atom": 3, "weight": 0.5}],
}


@pytest.fixture
def iso_file(tmp_path):
    path = tmp_path / "iso.json"
    path.write_text(json.dumps(ISO_QUARTER))
    return str(path)


@pytest.fixture
def two_atom_file(tmp_path):
    path = tmp_path / "model.json"
    path.write_text(json.dumps(TWO_ATOM))
    return str(path)


def run(capsys, argv):
    code = main(argv)
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_ssdt_prints_marchenko_pastur_edge(capsys, iso_file):
    code, out, _ = run(capsys, ["ssdt", "--model", iso_file])
    assert code == 0
    assert abs(float(out.strip()) - 2.25) <= 1e-12


def test_ssdt_trace_mirrors_newton_iterates(capsys, iso_file):
    code, out, _ = run(capsys, ["ssdt", "--model", iso_file, "--trace"])
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[1] == "iteration,Q"
    qs = [abs(float(line.split(",")[1])) for line in lines[2:]]
    assert qs[-1] <= 1e-13
    assert qs[0] > qs[-1]


def test_missing_model_file_is_input_error(capsys):
    code, _, err = run(capsys, ["ssdt", "--model", "/nonexistent.json"])
    assert code == 2
    assert "error" in err


def test_malformed_model_file_is_input_error(capsys, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text('{"gamma": 0.5')
    code, _, err = run(capsys, ["ssdt", "--model", str(bad)])
    assert code == 2


def test_stieltjes_default_grid(capsys, two_atom_file):
    code, out, _ = run(capsys, ["stieltjes", "--model", two_atom_file])
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0] == "lambda,e,e1,s,s1,sbar,sbar1,D,D1"
    rows = [line.split(",") for line in lines[1:]]
    assert len(rows) == 100
    lams = [float(r[0]) for r in rows]
    s_col = [float(r[3]) for r in rows]
    assert lams[-1] - lams[0] == pytest.approx(9.0, rel=1e-12)
    assert all(math.isfinite(s) and s < 0 for s in s_col)


def test_stieltjes_below_edge_is_domain_error(capsys, iso_file):
    code, _, err = run(capsys, ["stieltjes", "--model", iso_file, "--lambdas", "1.0"])
    assert code == 4
    assert "1.0" in err


def test_spike_round_trip_through_cli(capsys, two_atom_file):
    code, out, _ = run(
        capsys,
        ["spike", "--model", two_atom_file, "--direction", "from-lambda",
         "--values", "40.0"],
    )
    assert code == 0
    row = out.strip().splitlines()[1].split(",")
    theta2 = float(row[1])

    code, out, _ = run(
        capsys,
        ["spike", "--model", two_atom_file, "--direction", "from-theta",
         "--values", f"{theta2!r}"],
    )
    assert code == 0
    back = float(out.strip().splitlines()[1].split(",")[0])
    assert abs(back - 40.0) <= 1e-9 * 40.0


def test_spike_undetectable_theta_is_domain_error(capsys, two_atom_file):
    code, _, _ = run(
        capsys,
        ["spike", "--model", two_atom_file, "--direction", "from-theta",
         "--values", "1e-12"],
    )
    assert code == 4


def test_simulate_edge_is_deterministic(capsys, two_atom_file):
    argv = [
        "simulate", "--model", two_atom_file, "--mode", "edge",
        "--k", "8,16,32", "--trials", "25", "--seed", "7",
    ]
    code1, out1, _ = run(capsys, argv)
    code2, out2, _ = run(capsys, argv)
    assert code1 == code2 == 0
    assert out1 == out2
    lines = out1.strip().splitlines()
    assert lines[0] == "k,mean_abs_error,mean_bias"
    assert len(lines) == 5  # header + 3 rows + slope
    assert lines[-1].startswith("slope,")
    for line in lines[1:4]:
        k, mae, bias = line.split(",")
        assert float(mae) > 0


def test_simulate_spike_columns(capsys, two_atom_file):
    code, out, _ = run(
        capsys,
        ["simulate", "--model", two_atom_file, "--mode", "spike",
         "--k", "8,16", "--trials", "10", "--seed", "3", "--theta2", "26.0"],
    )
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0] == "k,mean_abs_error,mean_bias,left_cos_error,right_cos_error"
    assert len(lines) == 3  # no slope line with fewer than 3 sizes
    assert all(len(line.split(",")) == 5 for line in lines[1:])


def test_simulate_spike_requires_theta(capsys, two_atom_file):
    code, _, _ = run(
        capsys,
        ["simulate", "--model", two_atom_file, "--mode", "spike",
         "--k", "8", "--trials", "2", "--seed", "0"],
    )
    assert code == 2


def test_bench_tiny_sizes(capsys):
    code, out, _ = run(
        capsys, ["bench", "--sizes", "256,512", "--reps", "1", "--seed", "1"]
    )
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0] == "n,seconds_ssdt,seconds_stieltjes_grid100"
    assert len(lines) == 3
    for line in lines[1:]:
        _, t1, t2 = line.split(",")
        assert float(t1) > 0 and float(t2) > 0


def test_bench_requires_two_sizes(capsys):
    code, _, _ = run(capsys, ["bench", "--sizes", "256", "--reps", "1"])
    assert code == 2


def test_validate_normalizes_and_round_trips(capsys, tmp_path):
    doc = {
        "gamma": 1.0,
        "nu": [{"atom": 3, "weight": 0.25}, {"atom": 1, "weight": 0.5},
               {"atom": 3, "weight": 0.25}],
        "unu": [{"atom": 1, "weight": 1}],
    }
    path = tmp_path / "m.json"
    path.write_text(json.dumps(doc))
    code, out, _ = run(capsys, ["validate", "--model", str(path)])
    assert code == 0
    parsed = json.loads(out)
    assert [e["atom"] for e in parsed["nu"]] == [1.0, 3.0]
    assert [e["weight"] for e in parsed["nu"]] == [0.5, 0.5]


def test_out_writes_payload_and_manifest(capsys, tmp_path, iso_file):
    out_path = tmp_path / "result.csv"
    code, stdout, _ = run(
        capsys, ["ssdt", "--model", iso_file, "--out", str(out_path)]
    )
    assert code == 0
    assert stdout == ""
    value = float(out_path.read_text().strip())
    assert abs(value - mp_edge(0.25)) <= 1e-10
    manifest = json.loads((tmp_path / "result.csv.manifest.json").read_text())
    assert manifest["command"] == "ssdt"
    assert manifest["parameters"]["model"] == iso_file
    assert "duration_seconds" in manifest
    assert manifest["version"]


def test_manifest_goes_to_stderr_without_out(capsys, iso_file):
    code, _, err = run(capsys, ["ssdt", "--model", iso_file])
    assert code == 0
    manifest = json.loads(err)
    assert manifest["command"] == "ssdt"
