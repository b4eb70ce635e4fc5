import subprocess
import sys

import pytest

from ctlsurrogate import bench
from ctlsurrogate.cli import main
from ctlsurrogate.features import read_dataset

from .test_kripke import DATA

ONE_STATE = "states 1; init 0; props p; trans 0->0; label 0: p;"
SMALL_FLAGS = ["--records", "30", "--formula-len", "10", "--states", "4", "--props", "2",
               "--max-states", "4", "--max-props", "2", "--max-formula-len", "10", "--seed", "5"]


@pytest.fixture
def kfile(tmp_path):
    path = tmp_path / "k.txt"
    path.write_text(ONE_STATE)
    return path


def run(capsys, *argv):
    code = main(list(map(str, argv)))
    out, err = capsys.readouterr()
    return code, out, err


def body(out):
    return [line for line in out.splitlines() if not line.startswith("#")]


def test_check_yes(capsys, kfile):
    code, out, _ = run(capsys, "check", "--kripke", kfile, "--formula", "AG p")
    assert code == 0
    assert body(out)[:2] == ["verdict: yes", "sat_states: 0"]
    assert body(out)[2].startswith("elapsed_ns: ")
    assert "# command=check" in out


def test_check_no(capsys, kfile):
    code, out, _ = run(capsys, "check", "--kripke", kfile, "--formula", "AF !p")
    assert code == 1
    assert body(out)[0] == "verdict: no"


def test_check_formula_file(capsys, kfile, tmp_path):
    f = tmp_path / "phi.ctl"
    f.write_text("E [ p U p ]\n")
    code, _, _ = run(capsys, "check", "--kripke", kfile, "--formula-file", f)
    assert code == 0


@pytest.mark.parametrize("argv", [
    ["--formula", "AG p ->"],
    ["--formula", "AG (p"],
])
def test_check_malformed_formula(capsys, kfile, argv):
    code, _, err = run(capsys, "check", "--kripke", kfile, *argv)
    assert code == 2 and "error" in err


def test_check_bad_structure(capsys, tmp_path):
    bad = tmp_path / "bad.txt"
    bad.write_text("states 2; init 0; props p; trans 0->0; label 0: p; label 1: p;")
    code, _, err = run(capsys, "check", "--kripke", bad, "--formula", "p")
    assert code == 2 and "not total" in err
    code, _, _ = run(capsys, "check", "--kripke", tmp_path / "missing.txt", "--formula", "p")
    assert code == 2


def test_export_smv(capsys, tmp_path):
    k = tmp_path / "chain.txt"
    k.write_text("states 2; init 0; props p q; trans 0->1 1->1; label 0: p; label 1: q;")
    out_path = tmp_path / "chain.smv"
    code, _, _ = run(capsys, "export-smv", "--kripke", k, "--formula", "E [ p U q ]", "--out", out_path)
    assert code == 0
    assert out_path.read_text() == (DATA / "chain_eu.smv").read_text()
    code, out, err = run(capsys, "export-smv", "--kripke", k, "--formula", "E [ p U q ]")
    assert out == (DATA / "chain_eu.smv").read_text()
    assert "# command=export-smv" in err


def test_export_smv_invalid_structure(capsys, tmp_path):
    bad = tmp_path / "bad.txt"
    bad.write_text("states 1; init 3; props p; trans 0->0; label 0: p;")
    code, _, _ = run(capsys, "export-smv", "--kripke", bad, "--formula", "p")
    assert code == 2


def test_gen_data_reproducible(capsys, tmp_path):
    code, out1, _ = run(capsys, "gen-data", *SMALL_FLAGS, "--out", tmp_path / "a.csv")
    assert code == 0
    code, out2, _ = run(capsys, "gen-data", *SMALL_FLAGS, "--out", tmp_path / "b.csv")
    fp = [l for l in out1.splitlines() if l.startswith("fingerprint=")]
    assert fp and fp == [l for l in out2.splitlines() if l.startswith("fingerprint=")]
    assert "# records=30" in out1 and "# edge_prob=0.25" in out1
    assert len(read_dataset(tmp_path / "a.csv")) == 30


@pytest.mark.parametrize("flags", [["--records", "0"], ["--records", "x"], ["--edge-prob", "0"]])
def test_gen_data_usage_errors(capsys, tmp_path, flags):
    code, _, err = run(capsys, "gen-data", *flags, "--out", tmp_path / "d.csv")
    assert code == 2 and "usage" in err


def test_config_file_precedence(capsys, tmp_path):
    cfg = tmp_path / "exp.cfg"
    cfg.write_text("# experiment\nrecords = 12\nformula-len=10\nstates=4\nprops=2\n"
                   "max_states=4\nmax_props=2\nmax_formula_len=10\n")
    code, out, _ = run(capsys, "gen-data", "--config", cfg, "--records", "7", "--out", tmp_path / "d.csv")
    assert code == 0
    assert "# records=7" in out and "# formula_len=10" in out
    assert len(read_dataset(tmp_path / "d.csv")) == 7


def _small_data(capsys, tmp_path):
    path = tmp_path / "d.csv"
    assert run(capsys, "gen-data", *SMALL_FLAGS, "--out", path)[0] == 0
    return path


def test_bench_outputs(capsys, tmp_path):
    data = _small_data(capsys, tmp_path)
    small = SMALL_FLAGS[4:-2]  # encoding caps only
    report = tmp_path / "r.csv"
    code, out, _ = run(capsys, "bench", "--data", data, *small, "--repeats", "1", "--out", report)
    assert code == 0
    rows = bench.read_report_csv(report.read_text())
    assert [r["algorithm"] for r in rows] == ["RF", "BT", "KNN", "DT", "LR"]
    first = [r["accuracy"] for r in rows]

    code, _, _ = run(capsys, "bench", "--data", data, *small, "--repeats", "1", "--algos", "LR,BT",
                     "--out", report)
    rows = bench.read_report_csv(report.read_text())
    assert [r["algorithm"] for r in rows] == ["LR", "BT"]

    run(capsys, "bench", "--data", data, *small, "--repeats", "1", "--out", report)
    assert [r["accuracy"] for r in bench.read_report_csv(report.read_text())] == first


def test_bench_overrides_and_errors(capsys, tmp_path):
    data = _small_data(capsys, tmp_path)
    small = SMALL_FLAGS[4:-2]
    code, out, _ = run(capsys, "bench", "--data", data, *small, "--algos", "KNN", "--repeats", "1",
                       "--split", "KNN=3:0.5", "--hp", "KNN.k=1")
    assert code == 0 and "# split.KNN=3:0.5" in out
    assert run(capsys, "bench", "--data", data, *small, "--algos", "SVM")[0] == 2
    assert run(capsys, "bench", "--data", data, "--algos", "LR")[0] == 2  # wrong dimension
    assert run(capsys, "bench", "--data", tmp_path / "nope.csv", *small)[0] == 2
    assert run(capsys, "bench", "--data", data, *small, "--hp", "LR.nope=1")[0] == 2


def test_train_and_eval(capsys, tmp_path):
    data = _small_data(capsys, tmp_path)
    model = tmp_path / "m.json"
    code, out, _ = run(capsys, "train", "--algo", "dt", "--data", data, "--out", model,
                       "--hp", "DT.max_depth=3")
    assert code == 0 and "# hp.DT.max_depth=3" in out and "# split_seed=536" in out
    code, out, _ = run(capsys, "eval", "--model", model, "--data", data)
    assert code == 0
    line = body(out)[0]
    assert line.startswith("algorithm=DT accuracy=") and "n_test=6" in line
    assert run(capsys, "eval", "--model", model, "--data", data)[1].split("mean_predict_ns")[0] \
        == out.split("mean_predict_ns")[0]


def test_module_entry_point(tmp_path):
    k = tmp_path / "k.txt"
    k.write_text(ONE_STATE)
    proc = subprocess.run([sys.executable, "-m", "ctlsurrogate", "check", "--kripke", str(k),
                           "--formula", "AG p"], capture_output=True, text=True)
    assert proc.returncode == 0 and "verdict: yes" in proc.stdout
