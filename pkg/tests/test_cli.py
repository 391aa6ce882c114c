import csv
import io
import json
import os
import subprocess
import sys

import jsonschema
import pytest

from hutchinf.cli import main
from hutchinf.io import atomic_write, black_pixels, csv_bytes, read_ppm
from hutchinf.systems import parse_config


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def last_json(out):
    return json.loads(out.strip().splitlines()[-1])


def test_render_pixel_counts_grow(tmp_path, capsys):
    counts = []
    for k in range(1, 5):
        path = tmp_path / f"k{k}.ppm"
        code, out, _ = run(capsys, "render", "--depth", k, "--resolution", 512, "--out", path)
        assert code == 0
        counts.append(black_pixels(read_ppm(path)))
        assert last_json(out)["black_pixels"] == counts[-1]
    assert counts[0] == 4
    assert all(a < b for a, b in zip(counts, counts[1:]))


def test_render_is_deterministic(tmp_path, capsys):
    a, b = tmp_path / "a.ppm", tmp_path / "b.ppm"
    run(capsys, "render", "--depth", 3, "--resolution", 128, "--out", a)
    run(capsys, "render", "--depth", 3, "--resolution", 128, "--out", b)
    assert a.read_bytes() == b.read_bytes()
    assert a.read_bytes().startswith(b"P6\n128 128\n255\n")


def test_render_empty_viewport(tmp_path, capsys):
    path = tmp_path / "empty.ppm"
    code, _, _ = run(capsys, "render", "--depth", 2, "--resolution", 32, "--viewport", "5,5,6,6", "--out", path)
    assert code == 0 and black_pixels(read_ppm(path)) == 0


def test_render_bad_viewport(tmp_path, capsys):
    code, _, err = run(capsys, "render", "--viewport", "1,0,0,1", "--out", tmp_path / "x.ppm")
    assert code == 2 and "viewport" in err


def test_converge_planar(tmp_path, capsys):
    path = tmp_path / "conv.csv"
    code, out, _ = run(capsys, "converge", "--depth", 4, "--prune", 1e-3, "--out", path)
    assert code == 0
    text = path.read_text()
    assert "\r" not in text
    rows = list(csv.DictReader(io.StringIO(text)))
    assert list(rows[0]) == ["k", "card", "h_prev", "bound", "slack", "ok", "h_ref"]
    assert [r["card"] for r in rows[:3]] == ["4", "16", "256"]
    assert rows[0]["ok"] == "" and all(r["ok"] == "true" for r in rows[1:])
    assert out.startswith(text)


def test_converge_sup_pair(tmp_path, capsys):
    path = tmp_path / "sp.csv"
    code, _, err = run(capsys, "converge", "--system", "sup-pair", "--depth", 3, "--out", path)
    assert code == 2 and "--allow-s2" in err
    code, _, _ = run(capsys, "converge", "--system", "sup-pair", "--depth", 4, "--allow-s2", "--out", path)
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(path.read_text())))
    assert all(r["card"] == "34" for r in rows)
    assert all(abs(float(r["h_ref"]) - 1 / 24) < 1e-15 for r in rows)
    code, _, err = run(capsys, "converge", "--system", "sup-interval", "--allow-s2", "--out", path)
    assert code == 2 and "(S2)" in err


def test_converge_constant_system(tmp_path, capsys):
    cfg = {"schema": "hutchinf/1",
           "system": {"maps": [{"kind": "constant", "value": [0.0]}, {"kind": "constant", "value": [1.0]}],
                      "base_metric": "absolute-1d"},
           "metric": {"kind": "sup", "q": 0.5}, "run": {"depth": 4}}
    cpath = tmp_path / "c.json"
    cpath.write_text(json.dumps(cfg))
    code, _, _ = run(capsys, "converge", "--config", cpath, "--out", tmp_path / "c.csv")
    assert code == 0
    rows = list(csv.DictReader(io.StringIO((tmp_path / "c.csv").read_text())))
    assert all(float(r["h_prev"]) == 0.0 for r in rows[1:])


def test_attractor_command(tmp_path, capsys):
    path = tmp_path / "a.csv"
    code, out, _ = run(capsys, "attractor", "--system", "sup-pair", "--tol", 1e-3, "--out", path)
    assert code == 0
    info = last_json(out)
    assert info["err"] <= 1e-3 and info["meta"]["method"] == "diagonal"
    assert path.read_text().splitlines()[0] == "x_0"


@pytest.mark.parametrize("suite", ["metrics", "shifts", "cantor"])
def test_verify_suites(tmp_path, capsys, suite):
    path = tmp_path / "r.json"
    code, out, _ = run(capsys, "verify", suite, "--out", path)
    report = json.loads(path.read_text())
    assert code == 0 and report["ok"] and json.loads(out) == report


def test_verify_unknown_suite(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["verify", "nope"])
    assert exc.value.code == 2


def test_cantor_auto(tmp_path, capsys):
    out_dir = tmp_path / "c"
    code, _, _ = run(capsys, "cantor", "--auto-ms", 4, "--depth", 0, "--resolution", 64, "--out", out_dir)
    assert code == 0
    cert = json.loads((out_dir / "certificate.json").read_text())
    assert cert["ok"] and cert["ms"] == [1, 2, 4, 4, 5] and cert["failing_k"] == []
    assert len(cert["certificates"]) == 10
    rows = list(csv.DictReader(io.StringIO((out_dir / "squares.csv").read_text())))
    assert [r["address"] for r in rows] == ["[1]", "[2]", "[3]", "[4]"]
    img = read_ppm(out_dir / "squares.ppm")
    assert not img[0, 0] and not img[-1, -1] and img[32, 32]


def test_cantor_failing_ms(tmp_path, capsys):
    code, out, _ = run(capsys, "cantor", "--ms", "1,1,1", "--depth", 1, "--out", tmp_path / "f")
    assert code == 1
    assert last_json(out)["failing_k"] == [1, 2]
    cert = json.loads((tmp_path / "f" / "certificate.json").read_text())
    assert cert["ok"] is False


def test_cantor_outputs_deterministic(tmp_path, capsys):
    for name in ("a", "b"):
        run(capsys, "cantor", "--ms", "1,1,1,1", "--depth", 3, "--resolution", 128, "--out", tmp_path / name)
    for f in ("squares.csv", "squares.ppm", "certificate.json"):
        assert (tmp_path / "a" / f).read_bytes() == (tmp_path / "b" / f).read_bytes()


def test_cantor_bad_args(tmp_path, capsys):
    assert run(capsys, "cantor", "--out", tmp_path)[0] == 2
    assert run(capsys, "cantor", "--ms", "1,2", "--depth", 5, "--out", tmp_path)[0] == 2
    assert run(capsys, "cantor", "--ms", "2,1", "--out", tmp_path)[0] == 2


def test_config_schema():
    good = {"schema": "hutchinf/1", "system": {"builtin": "ex5"}, "run": {"depth": 2}}
    cfg = parse_config(good)
    assert cfg.depth == 2 and cfg.system.name == "ex5"
    for bad in ({**good, "extra": 1},
                {**good, "system": {"builtin": "ex5", "colour": "red"}},
                {**good, "schema": "hutchinf/0"},
                {**good, "run": {"depth": 0}},
                {"schema": "hutchinf/1", "system": {}}):
        with pytest.raises(jsonschema.ValidationError):
            parse_config(bad)
    with pytest.raises(ValueError):
        parse_config({**good, "output": {"viewport": {"min": [1, 1], "max": [0, 0]}}})


def test_invalid_config_exit_code(tmp_path, capsys):
    p = tmp_path / "bad.json"
    p.write_text(json.dumps({"schema": "hutchinf/1", "system": {"builtin": "ex5"}, "bogus": True}))
    code, _, err = run(capsys, "render", "--config", p, "--out", tmp_path / "x.ppm")
    assert code == 2 and "invalid config" in err


def test_csv_format():
    data = csv_bytes(["a", "b", "c", "d"], [[1, 0.1, float("nan"), True], [2, None, 1e-20, False]])
    assert data == b"a,b,c,d\n1,0.1,,true\n2,,1e-20,false\n"


def test_atomic_write_replaces(tmp_path):
    p = tmp_path / "sub" / "f.bin"
    atomic_write(p, b"one")
    atomic_write(p, b"two")
    assert p.read_bytes() == b"two"
    assert os.listdir(p.parent) == ["f.bin"]


def test_module_entry_point(tmp_path):
    r = subprocess.run([sys.executable, "-m", "hutchinf", "verify", "shifts"], capture_output=True, text=True)
    assert r.returncode == 0 and json.loads(r.stdout)["ok"]
