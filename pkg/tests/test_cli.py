import csv
import io
import json
import math
import subprocess
import sys

import pytest

from liouville.cli import COLUMNS, COMMANDS, main, parse_polygon, SpecError

TRIANGLE = {"vertices": [{"kind": "interior", "x": 0.0, "y": 1.0}, {"kind": "interior", "x": 1.0, "y": 1.5},
                         {"kind": "interior", "x": -0.5, "y": 2.0}]}
IDEAL = {"vertices": [{"kind": "ideal", "u": 0}, {"kind": "ideal", "u": 1}, {"kind": "ideal", "u": "inf"}]}


@pytest.fixture
def write(tmp_path):
    def _write(obj, name="poly.json"):
        p = tmp_path / name
        p.write_text(obj if isinstance(obj, str) else json.dumps(obj), encoding="utf-8")
        return str(p)
    return _write


def _rows(text):
    return list(csv.reader(io.StringIO(text)))


def test_crofton_quad_passes(write, capsys):
    code = main(["crofton", "--polygon", write(TRIANGLE), "--method", "quad", "--tolerance", "1e-6"])
    rows = _rows(capsys.readouterr().out)
    assert code == 0
    assert tuple(rows[0]) == COLUMNS
    assert rows[1][0] == "crofton" and rows[1][6] == "true" and float(rows[1][3]) <= 1e-6


def test_tri_dist_mc(capsys):
    code = main(["tri-dist", "--a", "1", "--b", "2", "--samples", "1e6", "--seed", "7", "--method", "mc"])
    row = _rows(capsys.readouterr().out)[1]
    assert code == 0
    assert abs(float(row[2]) - 1.0960016) < 1e-6
    assert int(row[5]) >= 1_000_000 and row[8] == "7"


def test_failed_check_exits_one(capsys):
    assert main(["pleijel-disk", "--k-max", "1"]) == 1
    assert "false" in capsys.readouterr().out


def test_malformed_vertex_exits_two(write, capsys):
    bad = {"vertices": [IDEAL["vertices"][0], {"kind": "ideal"}, IDEAL["vertices"][2]]}
    assert main(["santalo", "--polygon", write(bad)]) == 2
    assert "vertex 1" in capsys.readouterr().err


@pytest.mark.parametrize("argv, field", [
    (["crofton"], "--polygon"),
    (["tri-dist", "--a", "0"], "--a"),
    (["tri-dist", "--a", "2", "--b", "1"], "--a/--b"),
    (["crofton", "--disk", "-1"], "--disk"),
])
def test_spec_errors_name_the_field(argv, field, capsys):
    assert main(argv) == 2
    assert field in capsys.readouterr().err


def test_invalid_json_and_missing_file(write, capsys):
    assert main(["crofton", "--polygon", write("{not json")]) == 2
    assert "invalid JSON" in capsys.readouterr().err
    assert main(["crofton", "--polygon", "/nonexistent/poly.json"]) == 2


def test_argparse_rejects_bad_numbers():
    with pytest.raises(SystemExit) as exc:
        main(["tri-dist", "--samples", "many"])
    assert exc.value.code == 2


def test_ideal_triangle_file_round_trip(write):
    poly = parse_polygon(write(IDEAL))
    assert poly.n == 3 and abs(poly.area() - math.pi) < 1e-12
    again = parse_polygon(write(poly.to_json(), "again.json"))
    assert again.to_json() == poly.to_json()


def test_clockwise_rejected(write):
    cw = {"vertices": TRIANGLE["vertices"][::-1]}
    with pytest.raises(SpecError):
        parse_polygon(write(cw))


def test_reports_are_byte_identical(write, tmp_path):
    outs = []
    for i in range(2):
        out = tmp_path / f"r{i}.csv"
        assert main(["tri-dist", "--method", "mc", "--samples", "20000", "--seed", "3", "--no-timing",
                     "--output", str(out)]) == 0
        outs.append(out.read_bytes())
    assert outs[0] == outs[1]
    assert not list(tmp_path.glob(".report-*"))


def test_json_schema(write, capsys):
    main(["unit-tangent", "--polygon", write(TRIANGLE), "--format", "json"])
    rows = json.loads(capsys.readouterr().out)
    assert list(rows[0]) == list(COLUMNS)
    assert isinstance(rows[0]["pass"], bool) and rows[0]["wall_ms"] is not None


@pytest.mark.parametrize("command", ["crofton", "santalo", "isoperimetric", "ap-check", "ktrig-check"])
def test_csv_schema_per_command(command, write, capsys):
    argv = [command, "--no-timing"]
    if command != "ktrig-check":
        argv += ["--polygon", write(TRIANGLE)]
    assert main(argv) == 0
    rows = _rows(capsys.readouterr().out)
    assert tuple(rows[0]) == COLUMNS
    assert all(len(r) == len(COLUMNS) and r[7] == "" for r in rows[1:])


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "liouville", "tri-dist", "--no-timing"], capture_output=True,
                         text=True, check=False)
    assert res.returncode == 0 and res.stdout.startswith(",".join(COLUMNS))


def test_every_command_is_known():
    assert len(COMMANDS) == 10


def test_mixed_ideal_polygon_rejected(write, capsys):
    mixed = {"vertices": TRIANGLE["vertices"][:2] + [{"kind": "ideal", "u": "inf"}]}
    assert main(["santalo", "--polygon", write(mixed)]) == 2
    assert "ideal triangle" in capsys.readouterr().err
    assert main(["santalo", "--polygon", write(IDEAL), "--no-timing"]) == 0


def test_quad_dist_needs_ideal_quadrilateral(write, capsys):
    assert main(["quad-dist", "--polygon", write(IDEAL)]) == 2
    assert "four ideal vertices" in capsys.readouterr().err
