import json
import subprocess
import sys
from fractions import Fraction
from pathlib import Path

import pytest

from torusorbits import config as cfg
from torusorbits import decomp as dc
from torusorbits import dynamics as dy
from torusorbits import numfield as nf
from torusorbits import strata as st
from torusorbits.cli import main


@pytest.fixture()
def workdir(tmp_path, Ksqrt2):
    cfg.save_field(Ksqrt2, tmp_path / "field.json")
    g1 = dc.MatrixK.from_rational_rows(Ksqrt2, [[1, 1], [1, 2]])
    cfg.save_matrix(g1, tmp_path / "g1.json")
    form = {"n": 2, "m": 2,
            "factors": [[["1", "0"], ["0", "0"], ["0", "0"], ["1", "0"]]] * 2,
            "scalars": [["1", "0"], ["1", "0"]]}
    (tmp_path / "f0.json").write_text(json.dumps(form))
    path = {"n": 2, "bases": ["2", "2"],
            "schedules": [[[k] for k in range(8)],
                          [[-k] for k in range(8)]]}
    (tmp_path / "path.json").write_text(json.dumps(path))
    return tmp_path


def test_field_roundtrip_bit_exact(tmp_path, Kzeta8):
    cfg.save_field(Kzeta8, tmp_path / "z8.json")
    K2 = cfg.load_field(tmp_path / "z8.json")
    assert K2.min_poly == Kzeta8.min_poly
    assert [u.coeffs for u in K2.units] == [u.coeffs for u in Kzeta8.units]
    assert K2.cm_structure.d.coeffs == Kzeta8.cm_structure.d.coeffs


def test_matrix_roundtrip_rejects_bad_det(tmp_path, Ksqrt2):
    g = dc.MatrixK.from_rational_rows(Ksqrt2, [[1, Fraction(1, 3)], [2, 2]])
    cfg.save_matrix(g, tmp_path / "m.json")
    data = json.loads((tmp_path / "m.json").read_text())
    back = cfg.matrix_from_dict(Ksqrt2, data)
    assert back == g
    data["det"] = [["5", "0"], ["0", "0"]][0:1] + [["0"] * 1]
    data["det"] = [["5"], ["0"]]
    with pytest.raises(Exception):
        cfg.matrix_from_dict(Ksqrt2, data)


def test_rational_string_roundtrip():
    for q in (Fraction(3, 7), Fraction(-11, 4), Fraction(5), Fraction(0)):
        assert cfg.rat_from_str(cfg.rat_to_str(q)) == q


def test_cli_strata_summary(workdir, capsys):
    rc = main(["--field", str(workdir / "field.json"), "--format", "summary",
               "strata", "--n", "2", "--g1", str(workdir / "g1.json"),
               "--g2", "id"])
    assert rc == 0
    assert capsys.readouterr().out == "strata=5 closed=4 bound=5 generic=true\n"


def test_cli_units_classify(workdir, capsys):
    rc = main(["--field", str(workdir / "field.json"), "--format", "summary",
               "units", "classify", "--place", "0"])
    assert rc == 0
    assert capsys.readouterr().out == "discrete\n"


def test_cli_bruhat_cell(workdir, tmp_path, capsys, Ksqrt2):
    anti = dc.MatrixK.from_rational_rows(Ksqrt2,
                                         [[0, 0, 1], [0, -1, 0], [1, 0, 0]])
    cfg.save_matrix(anti, tmp_path / "anti.json")
    rc = main(["--field", str(workdir / "field.json"),
               "bruhat", "cell", "--h", str(tmp_path / "anti.json")])
    assert rc == 0
    out = json.loads(capsys.readouterr().out)
    assert out["permutation"] == [3, 2, 1]


def test_cli_dot_output(workdir, capsys):
    rc = main(["--field", str(workdir / "field.json"), "--format", "dot",
               "strata", "--n", "2", "--g1", str(workdir / "g1.json"),
               "--g2", "id"])
    assert rc == 0
    out = capsys.readouterr().out
    assert out.startswith("digraph closure {")
    assert "doublecircle" in out            # closed nodes marked


def test_cli_dynamics_bounded(workdir, capsys, Ksqrt2):
    h = dc.unipotent_matrix(Ksqrt2, 2, {(1, 0): Ksqrt2.one}) * \
        dc.diagonal_matrix(Ksqrt2, [Ksqrt2.element([2]),
                                    Ksqrt2.element([Fraction(1, 2)])])
    cfg.save_matrix(h, workdir / "hb.json")
    rc = main(["--field", str(workdir / "field.json"),
               "dynamics", "bounded", "--n", "2",
               "--g1", str(workdir / "hb.json"), "--g2", "id",
               "--path", str(workdir / "path.json"),
               "--C", "4", "--height", "6"])
    assert rc == 0
    out = json.loads(capsys.readouterr().out)
    assert out["membership"] is True
    assert out["agrees"] is True


def test_cli_validation_error_exit_2(workdir, capsys):
    rc = main(["--field", str(workdir / "missing.json"), "--format", "summary",
               "units", "classify"])
    assert rc == 2


def test_cli_forms_pipeline(workdir, capsys):
    rc = main(["--field", str(workdir / "field.json"),
               "forms", "to-group", "--form", str(workdir / "f0.json")])
    assert rc == 0
    out = json.loads(capsys.readouterr().out)
    assert out["alphas"] == [["1", "0"], ["1", "0"]]


def test_cli_determinism(workdir):
    cmd = [sys.executable, "-m", "torusorbits.cli",
           "--field", str(workdir / "field.json"), "--seed", "7",
           "strata", "--n", "2", "--g1", str(workdir / "g1.json"),
           "--g2", "id"]
    outs = {subprocess.run(cmd, capture_output=True, check=True).stdout
            for _ in range(3)}
    assert len(outs) == 1


def test_meta_embedded(workdir, capsys):
    rc = main(["--field", str(workdir / "field.json"),
               "closed", "--n", "2", "--g1", str(workdir / "g1.json"),
               "--g2", "id"])
    assert rc == 0
    out = json.loads(capsys.readouterr().out)
    assert out["meta"]["order"] == "Z[theta]"
    assert out["meta"]["field"] == "q-sqrt2"
    assert out["meta"]["precision_bits"] == 128


def test_ellipsoid_matches_direct_scan(Ksqrt2, monkeypatch):
    # the exact-ellipsoid path must find the same minimum as the full scan
    import random
    from torusorbits import dynamics
    rng = random.Random(71)
    i3 = dc.MatrixK.identity(Ksqrt2, 3)
    from conftest import random_sl
    for trial in range(4):
        g = random_sl(Ksqrt2, 3, rng)
        inp = st.OrbitInput((g, i3))
        a = Fraction(2) ** rng.randint(0, 6)
        torus = [(a, Fraction(1), 1 / a), (1 / a, Fraction(1), a)]
        enc_direct, _ = dynamics.systole(inp, torus, 2)
        monkeypatch.setattr(dynamics, "DIRECT_SCAN_CAP", 0)
        enc_fp, _ = dynamics.systole(inp, torus, 2)
        monkeypatch.undo()
        assert abs(float(enc_direct.mid) - float(enc_fp.mid)) < 1e-9
