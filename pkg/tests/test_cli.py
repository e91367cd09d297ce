import csv
import json
import subprocess
import sys

import pytest

from lattes.cli import EXIT_CONVERGENCE, EXIT_INPUT, EXIT_OK, parse_grid, parse_parameter, run


def _doc(tmp_path, stem):
    return json.loads((tmp_path / f"{stem}.json").read_text())


def test_normalize(tmp_path):
    assert run(["normalize", "--point", "(2*t+2)/(4*t-12)", "--out", str(tmp_path)]) == EXIT_OK
    doc = _doc(tmp_path, "normalize")
    assert doc["status"] == "ok"
    assert set(doc) >= {"command", "config", "results", "diagnostics", "certificates", "versions"}
    assert (tmp_path / "normalize.meta.json").exists()


def test_torsion_csv(tmp_path):
    assert run(["torsion", "--point", "2", "--level", "1", "--csv", "--out", str(tmp_path)]) == EXIT_OK
    files = [p for p in tmp_path.iterdir() if p.suffix == ".csv"]
    assert files
    rows = list(csv.DictReader(files[0].open()))
    reals = sorted(float(r["re"]) for r in rows)
    assert reals == pytest.approx([4 / 3, 2, 4], abs=1e-10)


def test_height_exact_zero(tmp_path):
    assert run(["height", "--point", "2", "--t", "4", "--out", str(tmp_path)]) == EXIT_OK
    res = _doc(tmp_path, "height")["results"][0]
    assert res["value"] == "0"


def test_capacity(tmp_path):
    assert run(["capacity", "--point", "2", "--nmax", "4", "--out", str(tmp_path)]) == EXIT_OK
    assert "0.15749013123685" in (tmp_path / "capacity.json").read_text()


def test_escape_grid_and_svg(tmp_path):
    code = run(["escape", "--point", "2", "--grid=-2,3,-1,1,5,3", "--svg", "--out", str(tmp_path)])
    assert code == EXIT_OK
    assert any(p.suffix == ".svg" for p in tmp_path.iterdir())


def test_deterministic(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    for d in (a, b):
        assert run(["iterate", "--point", "t+2", "--level", "2", "--out", str(d)]) == EXIT_OK
    assert (a / "iterate.json").read_bytes() == (b / "iterate.json").read_bytes()


@pytest.mark.parametrize("argv", [
    ["normalize", "--point", "t^"],
    ["normalize", "--point", "t"],
    ["height", "--point", "2", "--t", "1"],
    ["iterate", "--point", "2", "--level", "99"],
    ["frobnicate"],
])
def test_input_errors(tmp_path, argv):
    assert run(argv + ["--out", str(tmp_path)]) == EXIT_INPUT


def test_parse_helpers():
    assert parse_parameter("3/4") == 3 / 4
    assert parse_parameter("0.5+0.5i") == 0.5 + 0.5j
    assert parse_grid("-1,1,0,2,3,4") == (-1.0, 1.0, 0.0, 2.0, 3, 4)


def test_entry_point(tmp_path):
    out = subprocess.run([sys.executable, "-m", "lattes.cli", "normalize", "--point", "1/2", "--out", str(tmp_path)],
                         capture_output=True, text=True)
    assert out.returncode == 0
    assert out.stdout.strip().endswith("normalize.json")
    assert EXIT_CONVERGENCE == 3
