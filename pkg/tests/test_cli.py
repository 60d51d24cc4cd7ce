import csv
import io
import json

import numpy as np
import pytest

from polyxl.cli import _split_timings, bench_point, main, parse_q, parse_range
from polyxl.field import make_field
from polyxl.polyring import QuadraticSystem, random_system


def run(argv, capsys):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


@pytest.fixture
def instance(tmp_path, capsys):
    path = tmp_path / "inst.json"
    assert run(["gen", "--q", "7", "--n", "5", "--m", "5", "--seed", "3", "--out", str(path)], capsys)[0] == 0
    return path


def test_parse_helpers():
    assert parse_q("7").q == 7
    assert parse_q("2^4").q == parse_q("16").q == parse_q("GF(16)").q == 16
    assert parse_range("13..16") == [13, 14, 15, 16]
    with pytest.raises(ValueError):
        parse_q("6")


def test_gen_shape_and_determinism(tmp_path, capsys):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for p in (a, b):
        run(["gen", "--q", "7", "--n", "3", "--m", "3", "--seed", "11", "--out", str(p)], capsys)
    assert a.read_bytes() == b.read_bytes()
    sys_ = QuadraticSystem.from_json(a.read_text())
    assert sys_.n == 3 and sys_.m == 3
    assert all(f.evaluate(sys_.planted) == 0 for f in sys_.polys)


@pytest.mark.parametrize("algo", ["pxl", "hxl", "hwxl"])
def test_solve_recovers_planted(instance, capsys, algo):
    code, out, _ = run(["solve", str(instance), "--algo", algo, "--k", "1"], capsys)
    sys_ = QuadraticSystem.from_json(instance.read_text())
    assert code == 0
    assert sys_.is_root([int(v) for v in out.split()])
    manifest = json.loads(instance.with_suffix(".manifest.json").read_text())
    assert manifest["outcome"]["status"] == "Solved"
    assert "total_seconds" in manifest["timings"]


def test_solve_exit_codes(tmp_path, instance, capsys):
    code, _, err = run(["solve", str(instance), "--algo", "pxl", "--k", "0"], capsys)
    assert code == 2 and "k" in err
    code, _, _ = run(["solve", str(tmp_path / "missing.json")], capsys)
    assert code == 2
    from test_xl import unsatisfiable

    bad = tmp_path / "bad.json"
    bad.write_text(unsatisfiable(random_system(make_field(7), 4, 5, np.random.default_rng(3))).to_json())
    code, out, _ = run(["solve", str(bad), "--algo", "hxl", "--k", "1"], capsys)
    assert code == 1 and out.startswith("NO SOLUTION")


def test_manifest_deterministic_modulo_timings(tmp_path, instance, capsys):
    texts = []
    for i in range(2):
        mpath = tmp_path / f"m{i}.json"
        run(["solve", str(instance), "--algo", "pxl", "--k", "1", "--manifest", str(mpath)], capsys)
        m = json.loads(mpath.read_text())
        m.pop("timings")
        texts.append(json.dumps(m, sort_keys=True))
    assert texts[0] == texts[1]


def test_split_timings():
    stats, timings = _split_timings({"k": 1, "elapsed": 2.0, "attempts": [{"D": 3, "multiply_seconds": 0.1}]})
    assert stats == {"k": 1, "attempts": [{"D": 3}]}
    assert set(timings) == {"elapsed", "attempts.0.multiply_seconds"}


def test_estimate_headline(capsys):
    code, out, _ = run(["estimate", "--q", "256", "--n", "80", "--m", "80", "--algo", "pxl", "--json"], capsys)
    assert code == 0
    rep = json.loads(out)
    assert abs(rep["min_log2"] - 220) <= 2
    code, out, _ = run(["estimate", "--q", "256", "--n", "80", "--m", "80"], capsys)
    assert "HXL" in out and "PXL" in out and "min log2" in out


def test_estimate_table_and_errors(capsys):
    code, out, _ = run(["estimate", "--table1", "--json"], capsys)
    d = json.loads(out)
    assert code == 0 and len(d["cells"]) == 24
    code, out, _ = run(["estimate", "--q", "16", "--n", "6", "--m", "6", "--algo", "hxl"], capsys)
    assert code == 0
    assert run(["estimate", "--n", "6"], capsys)[0] == 2


def test_bench_csv(tmp_path, capsys):
    path = tmp_path / "b.csv"
    assert run(["bench", "--q", "16", "--range", "7..8", "--out", str(path)], capsys)[0] == 0
    rows = list(csv.reader(io.StringIO(path.read_text())))
    assert rows[0] == ["n", "k", "D", "seconds", "predicted_ops"]
    assert [r[0] for r in rows[1:]] == ["7", "8"]
    assert all(float(r[3]) >= 0 and int(r[4]) > 0 for r in rows[1:])


def test_bench_point_alpha(gf16):
    p = bench_point(7, gf16, 0)
    assert p["alpha_actual"] == p["alpha_estimate"]
