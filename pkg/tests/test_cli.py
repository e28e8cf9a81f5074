import json

import pytest

from ensemblekit.cli import parse_grid, run_command
from ensemblekit.errors import ArgumentError
from ensemblekit.fileio import CURVE_COLUMNS, read_csv


def run(capsys, *argv):
    code = run_command(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_entropy_csv(capsys, tmp_path):
    out = tmp_path / "s.csv"
    code, _, _ = run(capsys, "entropy", "--model", "builtin:three_point_table", "--out", str(out))
    assert code == 0
    header, cols = read_csv(out)
    assert tuple(header) == CURVE_COLUMNS
    assert cols["s"] == [0.0, -0.5, -0.2]
    assert cols["in_C"] == [True, False, True]


def test_entropy_negative_grid_and_svg(capsys, tmp_path):
    out = tmp_path / "s.svg"
    code, _, err = run(capsys, "entropy", "--model", "builtin:curie_weiss", "--u-grid", "-0.5:0:6",
                       "--format", "svg", "--out", str(out))
    assert code == 0, err
    assert out.read_text().startswith("<svg")


def test_free_energy_to_stdout(capsys):
    code, out, _ = run(capsys, "free-energy", "--model", "builtin:three_point_table", "--beta-grid", "-1:1:5")
    assert code == 0
    lines = out.strip().splitlines()
    assert len(lines) == 6 and lines[0].startswith("beta")


def test_classify_json(capsys, tmp_path):
    out = tmp_path / "r.json"
    code, _, _ = run(capsys, "classify", "--model", "builtin:three_point_table", "--format", "json", "--out", str(out))
    assert code == 0
    rep = json.loads(out.read_text())
    assert [r["label"] for r in rep["records"]] == ["Boundary", "Nonequivalent", "Boundary"]
    code, _, _ = run(capsys, "verify", "--report", str(out))
    assert code == 0


def test_verify_model_writes_check_table(capsys, tmp_path):
    out = tmp_path / "v.json"
    code, _, _ = run(capsys, "verify", "--model", "builtin:three_point_table", "--out", str(out))
    assert code == 0
    table = json.loads(out.read_text())
    assert table and all(row["passed"] for row in table["checks"])


def test_macrostates(capsys):
    code, out, _ = run(capsys, "macrostates", "--model", "builtin:curie_weiss", "--ensemble", "canonical",
                       "--beta", "2", "--format", "json")
    assert code == 0
    assert len(json.loads(out)["members"]) == 2


def test_mixed(capsys):
    code, out, _ = run(capsys, "mixed", "--model", "builtin:worked_mixed_table", "--mode", "fixed-beta1",
                       "--beta1", "0", "--format", "json")
    assert code == 0
    assert json.loads(out)["metadata"]["mode"] == "fixed_beta1"


def test_sample_is_deterministic(capsys, tmp_path):
    args = ["sample", "--model", "builtin:curie_weiss", "--ensemble", "canonical", "--beta", "1.5",
            "--n", "16", "--sweeps", "200", "--seed", "4"]
    paths = []
    for k in range(2):
        p = tmp_path / f"c{k}.json"
        t = tmp_path / f"t{k}.csv"
        assert run(capsys, *args, "--out", str(p), "--trace", str(t))[0] == 0
        paths.append((p, t))
    assert paths[0][0].read_bytes() == paths[1][0].read_bytes()
    assert paths[0][1].read_bytes() == paths[1][1].read_bytes()


def test_plot(capsys, tmp_path):
    src = tmp_path / "s.csv"
    run(capsys, "entropy", "--model", "builtin:three_point_table", "--out", str(src))
    svg = tmp_path / "p.svg"
    code, _, err = run(capsys, "plot", "--input", str(src), "--x", "u", "--y", "s,s_hull", "--out", str(svg))
    assert code == 0, err
    text = svg.read_text()
    assert text.startswith("<svg") and "s_hull" in text


@pytest.mark.parametrize("argv", [
    ["entropy", "--model", "builtin:curie_weiss", "--bogus"],
    ["entropy", "--model", "builtin:curie_weiss", "--u-grid", "0:1"],
    ["entropy", "--model", "builtin:nope"],
    ["frobnicate"],
])
def test_input_errors_exit_1(capsys, argv):
    assert run(capsys, *argv)[0] == 1


def test_extra_model_field_exit_1(capsys, tmp_path):
    path = tmp_path / "m.json"
    path.write_text(json.dumps({"kind": "curie_weiss", "colour": "blue"}))
    code, _, err = run(capsys, "entropy", "--model", str(path))
    assert code == 1 and "colour" in err


def test_infeasible_shell_exit_2(capsys):
    code, _, err = run(capsys, "sample", "--model", "builtin:curie_weiss", "--ensemble", "microcanonical",
                       "--u", "0.4", "--r", "0.01", "--n", "16", "--sweeps", "10")
    assert code == 2 and "diagnostic" in err


def test_parse_grid():
    assert parse_grid("-1:1:3").tolist() == [-1.0, 0.0, 1.0]
    for bad in ("1:0:5", "0:1:1", "a:b:c"):
        with pytest.raises(ArgumentError):
            parse_grid(bad)
