import csv
import json

import numpy as np
import pytest

from tjade import ica
from tjade.cli import main
from tjade.io import InputFormatError, read_generic, read_model, read_semeion, write_generic
from tjade.simlab import draw_sources, haar_orthogonal
from tjade.tensor import sample_multi_mode_product


def write_semeion_like(path, rng, per_digit=40, digits=(0, 1, 7)):
    """Noisy 16x16 binary glyphs, one template per digit, in the semeion line format."""
    templates = {d: rng.random((16, 16)) < 0.3 for d in digits}
    with open(path, "w") as fh:
        for d in digits:
            for _ in range(per_digit):
                flip = rng.random((16, 16)) < 0.1
                img = np.logical_xor(templates[d], flip).astype(float)
                flags = np.zeros(10, dtype=int)
                flags[d] = 1
                fh.write(" ".join(f"{v:.4f}" for v in img.ravel()) + " " + " ".join(map(str, flags)) + " \n")


def test_semeion_reader(tmp_path, rng):
    path = tmp_path / "s.data"
    write_semeion_like(path, rng, per_digit=3, digits=(0, 1, 2))
    X, labels = read_semeion(path)
    assert X.shape == (9, 16, 16)
    np.testing.assert_array_equal(labels, [0, 0, 0, 1, 1, 1, 2, 2, 2])
    first = path.read_text().split("\n")[0].split()
    np.testing.assert_array_equal(X[0, 0], [float(v) for v in first[:16]])
    X2, labels2 = read_semeion(path, digits=[2])
    assert X2.shape[0] == 3 and set(labels2) == {2}


def test_semeion_reader_rejects_bad_lines(tmp_path):
    path = tmp_path / "bad.data"
    path.write_text("1 0 1\n")
    with pytest.raises(InputFormatError) as info:
        read_semeion(path)
    assert info.value.line == 1
    path.write_text(" ".join(["0"] * 256 + ["1", "1"] + ["0"] * 8) + "\n")
    with pytest.raises(InputFormatError):
        read_semeion(path)


def test_generic_roundtrip(tmp_path, rng):
    X = rng.standard_normal((5, 2, 3))
    write_generic(X, tmp_path / "g.csv")
    np.testing.assert_array_equal(read_generic(tmp_path / "g.csv", (2, 3)), X)
    with pytest.raises(InputFormatError):
        read_generic(tmp_path / "g.csv", (3, 3))


def test_mdi_command(tmp_path, capsys):
    np.savetxt(tmp_path / "e.csv", np.eye(3)[[2, 0, 1]], delimiter=",")
    np.savetxt(tmp_path / "m.csv", np.eye(3), delimiter=",")
    assert main(["mdi", str(tmp_path / "e.csv"), str(tmp_path / "m.csv"), "--n", "100"]) == 0
    assert capsys.readouterr().out.split() == ["mdi", "0", "tmdi", "0"]


def test_mdi_command_matches_library(tmp_path, capsys, rng):
    from tjade.metrics import mdi

    A, B = rng.standard_normal((4, 4)), rng.standard_normal((4, 4))
    np.savetxt(tmp_path / "a.csv", A, delimiter=",", fmt="%.17g")
    np.savetxt(tmp_path / "b.csv", B, delimiter=",", fmt="%.17g")
    main(["mdi", str(tmp_path / "a.csv"), str(tmp_path / "b.csv")])
    out = capsys.readouterr().out.split()
    assert float(out[1]) == pytest.approx(mdi(A @ B), rel=1e-11)


def test_mdi_shape_mismatch(tmp_path):
    np.savetxt(tmp_path / "a.csv", np.eye(3), delimiter=",")
    np.savetxt(tmp_path / "b.csv", np.eye(2), delimiter=",")
    assert main(["mdi", str(tmp_path / "a.csv"), str(tmp_path / "b.csv")]) == 2


def test_asv_command(tmp_path):
    out = tmp_path / "asv.csv"
    assert main(["asv", "setting3", "--out", str(out)]) == 0
    rows = list(csv.DictReader(out.open()))
    assert rows[0].keys() == {"mode", "k", "l", "kind", "asv"}
    assert len(rows) == 9 + 9 + 4
    # every mode of setting 3 has at least one face with nonzero mean kurtosis
    assert all(r["asv"] != "undefined" for r in rows)
    assert main(["asv", "grid3x4.json"]) == 0


def test_asv_unknown_setting():
    assert main(["asv", "nosuch"]) == 2


def test_apply_generic(tmp_path, capsys):
    rng = np.random.default_rng(2)
    Z = draw_sources("grid3x4", 3000, rng)
    X = sample_multi_mode_product(Z, [haar_orthogonal(3, rng), haar_orthogonal(4, rng)])
    write_generic(X, tmp_path / "x.csv")
    prefix = str(tmp_path / "fit")
    assert main(["apply", str(tmp_path / "x.csv"), "--dims", "3,4", "--out", prefix]) == 0
    model = read_model(prefix + "_model.json")
    direct = ica.tjade_fit(X)
    for a, b in zip(model.phis, direct.phis):
        np.testing.assert_allclose(a, b, atol=1e-12)
    scores = np.loadtxt(prefix + "_scores.csv", delimiter=",", skiprows=1)
    assert scores.shape == (3000, 12)
    kurt = list(csv.DictReader(open(prefix + "_kurtosis.csv")))
    assert sorted(int(r["rank_ascending"]) for r in kurt) == list(range(1, 13))
    assert "fitted TJADE" in capsys.readouterr().out


def test_apply_vector_method(tmp_path):
    rng = np.random.default_rng(3)
    write_generic(draw_sources("setting2", 500, rng), tmp_path / "x.csv")
    prefix = str(tmp_path / "v")
    assert main(["apply", str(tmp_path / "x.csv"), "--dims", "3,3,2", "--method", "fobi", "--out", prefix]) == 0
    assert json.load(open(prefix + "_model.json"))["method"] == "FOBI"


def test_apply_semeion_like(tmp_path, capsys):
    rng = np.random.default_rng(4)
    path = tmp_path / "s.data"
    write_semeion_like(path, rng, per_digit=60)
    prefix = str(tmp_path / "d")
    assert main(["apply", str(path), "--format", "semeion", "--out", prefix]) == 0
    assert "group sizes: 0: 60, 1: 60, 7: 60" in capsys.readouterr().out
    header = open(prefix + "_scores.csv").readline().strip().split(",")
    assert header[:3] == ["label", "y_1_1", "y_2_1"] and len(header) == 257


def test_apply_errors(tmp_path):
    (tmp_path / "x.csv").write_text("1,2\n3,4\n")
    assert main(["apply", str(tmp_path / "x.csv"), "--out", "p"]) == 2
    assert main(["apply", str(tmp_path / "x.csv"), "--dims", "3", "--out", "p"]) == 2
    assert main(["apply", str(tmp_path / "missing.csv"), "--dims", "2", "--out", "p"]) == 2
    X = np.random.default_rng(0).standard_normal((40, 2, 2))
    X[:, 1, :] = X[:, 0, :]
    write_generic(X, tmp_path / "sing.csv")
    assert main(["apply", str(tmp_path / "sing.csv"), "--dims", "2,2", "--out", str(tmp_path / "o")]) == 3


def test_simulate_command(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"setting": "setting1", "ns": [200], "reps": 1, "methods": ["TJADE", "TFOBI"]}))
    out = tmp_path / "r.csv"
    args = ["simulate", str(cfg), "--seed", "5", "--out", str(out), "--no-timing"]
    assert main(args) == 0
    first = out.read_bytes()
    assert main(args) == 0
    assert out.read_bytes() == first
    assert (tmp_path / "r_summary.csv").exists()
    assert main(["simulate", str(cfg), "--seed", "5", "--ns", "300", "--reps", "2", "--out", str(out)]) == 0
    assert out.read_text().count("\n") == 1 + 2 * 2


def test_simulate_bad_config(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text('{\n  "setting": "setting1",\n  "reps": -1\n}')
    assert main(["simulate", str(cfg), "--seed", "1", "--out", str(tmp_path / "r.csv")]) == 2
    assert "line 3" in capsys.readouterr().err
    assert main(["simulate", "nosuch.json", "--seed", "1", "--out", str(tmp_path / "r.csv")]) == 2
