from __future__ import annotations

import json

import pytest

from pkw.cli import main, row_status
from pkw.kernel import KernelTable

DEC1_PROFILE = [1, 2, 2, 2, 2, 4, 4, 4, 6, 6, 6, 8, 8, 8, 8, 16]


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def run_json(capsys, *argv):
    code, out, err = run(capsys, *argv)
    return code, json.loads(out)


# --- pdist / exponent ---------------------------------------------------------------


def test_pdist_arikan(capsys):
    code, rep = run_json(capsys, "pdist", "--kernel", "arikan")
    assert code == 0
    assert rep["verb"] == "pdist"
    assert list(rep) == ["verb", "parameters", "results", "versions", "wall_time"]
    assert rep["results"]["profile"] == [1, 2]
    assert rep["results"]["exponent"] == 0.5
    assert rep["results"]["polarizing"] is True


def test_pdist_dec1(capsys):
    code, rep = run_json(capsys, "pdist", "--kernel", "dec1")
    assert code == 0 and rep["results"]["profile"] == DEC1_PROFILE
    assert rep["results"]["exponent_5"] == 0.52742


def test_pdist_matrix(capsys):
    code, rep = run_json(capsys, "pdist", "--kernel", "A")
    assert code == 0 and rep["results"]["ell"] == 24 and rep["results"]["exponent_5"] == 0.51577


def test_pdist_corrupt_file(capsys, tmp_path):
    p = tmp_path / "bad.txt"
    p.write_text("2\n0\n1\n1\n3\n")  # not a bijection
    code, out, err = run(capsys, "pdist", "--kernel", str(p))
    assert code == 2 and out == "" and "bad.txt" in err
    p.write_text("garbage here\n")
    assert run(capsys, "pdist", "--kernel", str(p))[0] == 2
    assert run(capsys, "pdist", "--kernel", str(tmp_path / "missing.txt"))[0] == 2


def test_exponent(capsys):
    code, rep = run_json(capsys, "exponent", "--seq", "1,2")
    assert code == 0 and rep["results"]["exponent"] == 0.5
    code, rep = run_json(capsys, "exponent", "--seq", "1,2,2,2,2,4,4,4,4,6,6,8,8,8,8,16")
    assert rep["results"]["exponent_5"] == 0.51828
    assert run(capsys, "exponent", "--seq", "1,x")[0] == 2
    assert run(capsys, "exponent", "--seq", "0,2")[0] == 2


# --- LP verbs ----------------------------------------------------------------------


def test_lp_check(capsys):
    code, rep = run_json(capsys, "lp-check", "--l", "3", "--seq", "1,2,3")
    assert code == 0 and rep["results"]["feasible"] is False
    code, rep = run_json(capsys, "lp-check", "--l", "4", "--seq", "1,2,2,4")
    assert rep["results"]["feasible"] is True and rep["results"]["certificate"]
    assert run(capsys, "lp-check", "--l", "3", "--seq", "1,3,2")[0] == 2
    assert run(capsys, "lp-check", "--l", "4", "--seq", "1,2,2")[0] == 2


def test_lp_bound_search(capsys):
    code, rep = run_json(capsys, "lp-bound", "--l", "5")
    assert code == 0
    assert rep["results"]["bound_5"] == 0.43067 and rep["results"]["witness"] == [1, 2, 2, 2, 4]
    code, rep = run_json(capsys, "lp-bound", "--l", "4", "--q", "4")
    assert rep["results"]["witness"] == [1, 2, 3, 4]


def test_lp_bound_verify(capsys):
    code, rep = run_json(capsys, "lp-bound", "--l", "9", "--verify-only", "1,2,2,2,2,4,4,6,6")
    assert code == 0 and rep["results"]["feasible"] and rep["results"]["bound_5"] == 0.46162
    code, _ = run_json(capsys, "lp-bound", "--l", "3", "--verify-only", "1,2,3")
    assert code == 1


# --- constructions -----------------------------------------------------------------


def test_construct_dec2(capsys):
    code, rep = run_json(capsys, "construct", "--name", "dec2")
    assert code == 0 and rep["results"]["valid"] and rep["results"]["exponent_5"] == 0.51828


def test_construct_recipe_writes_matrix(capsys, tmp_path):
    out = tmp_path / "l22.txt"
    code, rep = run_json(capsys, "construct", "--name", "l22", "--out", str(out))
    assert code == 0 and rep["results"]["exponent_5"] == 0.50118
    code, rep = run_json(capsys, "pdist", "--kernel", str(out))
    assert rep["results"]["exponent_5"] == 0.50118


def test_construct_unknown(capsys):
    assert run(capsys, "construct", "--name", "dec9")[0] == 2


def test_shorten(capsys):
    code, rep = run_json(capsys, "shorten", "--matrix", "A", "--row", "23", "--col", "0")
    assert code == 0 and rep["results"]["violations"] == []
    assert rep["results"]["exponent_5"] == 0.50705
    assert run(capsys, "shorten", "--matrix", "A", "--row", "0", "--col", "0")[0] == 2
    assert run(capsys, "shorten", "--matrix", "arikan", "--row", "1", "--col", "0")[0] == 2


# --- simulation --------------------------------------------------------------------


def test_sim_exact_csv(capsys):
    code, out, _ = run(capsys, "sim", "--kernel", "arikan", "--levels", "3", "--exact")
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0] == "index,z_estimate,error_rate,trials"
    assert len(lines) == 9
    assert lines[1].startswith("0,0.99609375,")


def test_sim_json_and_determinism(capsys):
    argv = ["sim", "--kernel", "arikan", "--levels", "2", "--channel", "bsc:0.1", "--trials", "300", "--seed", "7", "--json"]
    _, a = run_json(capsys, *argv)
    _, b = run_json(capsys, *argv)
    assert a["results"] == b["results"] and a["parameters"] == b["parameters"]
    assert a["results"]["rows"][0]["trials"] == 300


def test_sim_errors(capsys):
    assert run(capsys, "sim", "--kernel", "arikan", "--channel", "bsc:0.1", "--exact")[0] == 2
    assert run(capsys, "sim", "--kernel", "arikan")[0] == 2
    assert run(capsys, "sim", "--kernel", "arikan", "--channel", "foo", "--exact")[0] == 2
    assert run(capsys, "sim", "--kernel", "A", "--exact")[0] == 2


# --- tables ------------------------------------------------------------------------


def test_row_status():
    assert row_status(0.527421, 0.52742, False) == "pass"
    assert row_status(0.4206198, 0.42062, False) == "FAIL"
    assert row_status(0.4206198, 0.42062, True) == "rounded"


def test_tables_iv(capsys):
    code, out, _ = run(capsys, "tables", "IV")
    assert code == 0
    assert "l=24" in out and "0.51577" in out and "mismatches: none" in out


def test_tables_iii_strict_and_rounded(capsys):
    code, rep = run_json(capsys, "tables", "III", "--json")
    values = [r["value_5"] for r in rep["results"]["rows"]]
    assert values[:3] == [0.52742, 0.51828, 0.50773]
    # 0.5019399 truncates to 0.50193 while the reference value is rounded
    assert code == 1 and rep["results"]["mismatches"] == ["#4"]
    assert run(capsys, "tables", "III", "--accept-rounded")[0] == 0


def test_tables_i_small(capsys):
    code, rep = run_json(capsys, "tables", "I-small", "--json")
    rows = {r["row"]: r for r in rep["results"]["rows"]}
    assert rows["l=6"]["value_5"] == 0.45132 and rows["l=6"]["status"] == "pass"
    assert code == 1 and rep["results"]["mismatches"] == ["l=3"]
    assert run(capsys, "tables", "I-small", "--accept-rounded")[0] == 0


def test_tables_unknown(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["tables", "V"])
    assert exc.value.code == 2


# --- export ------------------------------------------------------------------------


def test_export_round_trip(capsys, tmp_path):
    p = tmp_path / "dec1.txt"
    code, rep = run_json(capsys, "export", "--kernel", "dec1", "--out", str(p))
    assert code == 0 and rep["results"]["lines"] == 65537
    code, rep = run_json(capsys, "pdist", "--kernel", str(p))
    assert rep["results"]["profile"] == DEC1_PROFILE


def test_export_arikan(capsys, tmp_path):
    p = tmp_path / "a.txt"
    assert run(capsys, "export", "--kernel", "arikan", "--out", str(p))[0] == 0
    lines = p.read_text().splitlines()
    assert lines[0] == "2" and len(lines[1:]) == 4
    assert KernelTable.load(p).table.tolist() == [0, 3, 2, 1]


def test_export_unwritable(capsys, tmp_path):
    code, _, err = run(capsys, "export", "--kernel", "arikan", "--out", str(tmp_path / "no" / "such" / "dir" / "k.txt"))
    assert code == 3 and "cannot write" in err


# --- misc --------------------------------------------------------------------------


def test_usage_errors():
    with pytest.raises(SystemExit) as exc:
        main(["frobnicate"])
    assert exc.value.code == 2
    with pytest.raises(SystemExit) as exc:
        main(["pdist"])
    assert exc.value.code == 2


def test_data_dir_override(capsys, tmp_path, monkeypatch):
    monkeypatch.setenv("PKW_DATA_DIR", str(tmp_path))
    code, _, err = run(capsys, "pdist", "--kernel", "dec1")
    assert code == 3 and "table6_coset_vectors" in err
