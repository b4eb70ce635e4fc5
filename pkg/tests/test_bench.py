import time
from dataclasses import replace

import numpy as np
import pytest

from ctlsurrogate import bench, ctl, ml
from ctlsurrogate.checker import naive_sat_states
from ctlsurrogate.features import EncodingConfig, read_dataset
from ctlsurrogate.kripke import GenConfig

SMALL = bench.ExperimentConfig(
    n_records=40,
    formula_length=12,
    gen=GenConfig(5, 2, 0.3, 0.5),
    encoding=EncodingConfig(6, 2, 12),
    master_seed=77,
)


def test_generate_dataset_deterministic(tmp_path):
    a = bench.generate_dataset(SMALL, out=tmp_path / "a.csv")
    b = bench.generate_dataset(SMALL, out=tmp_path / "b.csv")
    assert bench.dataset_fingerprint(a) == bench.dataset_fingerprint(b)
    assert np.array_equal(a.X, b.X) and np.array_equal(a.y, b.y)
    assert len(read_dataset(tmp_path / "a.csv")) == 40


def test_worker_pool_matches_sequential():
    seq = bench.generate_dataset(SMALL)
    par = bench.generate_dataset(SMALL, jobs=2)
    assert bench.dataset_fingerprint(seq) == bench.dataset_fingerprint(par)


def test_labels_agree_with_naive_oracle():
    ds = bench.generate_dataset(SMALL)
    for i in range(SMALL.n_records):
        k, phi = bench.make_instance(SMALL, i)
        assert ctl.formula_length(phi) == SMALL.formula_length
        assert ds.y[i] == (k.initial <= naive_sat_states(k, phi))


def test_tautologies_on_single_state():
    cfg = replace(SMALL, n_records=5, gen=GenConfig(1, 1, 1.0, 0.5))
    for i in range(5):
        k, _ = bench.make_instance(cfg, i)
        for text in ("AG true", "EG true", "AG (p0 | !p0)", "AF true"):
            assert k.initial <= naive_sat_states(k, ctl.parse_formula(text))


def test_master_seed_changes_data():
    a = bench.generate_dataset(SMALL)
    b = bench.generate_dataset(replace(SMALL, master_seed=78))
    assert bench.dataset_fingerprint(a) != bench.dataset_fingerprint(b)


def test_default_template_gives_label_mix():
    cfg = replace(bench.ExperimentConfig(), n_records=100)
    ds = bench.generate_dataset(cfg)
    assert 0.2 < ds.y.mean() < 0.8


def test_config_validation():
    with pytest.raises(ValueError):
        bench.ExperimentConfig(formula_length=501)
    with pytest.raises(ValueError):
        bench.ExperimentConfig(gen=GenConfig(11, 4, 0.25, 0.5))
    with pytest.raises(ValueError):
        bench.ExperimentConfig(n_records=0)


def test_run_benchmark_rows():
    ds = bench.generate_dataset(SMALL)
    report = bench.run_benchmark(ds, SMALL, repeats=2)
    assert [r.algorithm for r in report.per_algorithm] == list(ml.ALGORITHMS)
    for r in report.per_algorithm:
        assert r.ratio == pytest.approx(r.t1_mean_s / r.t2_mean_s, rel=1e-12)
        assert 0 <= r.accuracy <= 1
    assert report.row("KNN").n_test == 6 and report.row("LR").n_test == 8
    two = bench.run_benchmark(ds, SMALL, ("LR", "BT"), repeats=2)
    assert [r.algorithm for r in two.per_algorithm] == ["LR", "BT"]
    assert two.row("LR").accuracy == report.row("LR").accuracy


def test_report_csv():
    ds = bench.generate_dataset(SMALL)
    report = bench.run_benchmark(ds, SMALL, ("DT", "KNN"), repeats=1)
    text = report.to_csv()
    assert "# dataset_fingerprint=" + bench.dataset_fingerprint(ds) in text
    assert "# config_hash=" + SMALL.config_hash() in text
    assert "# tool_version=ctlsurrogate" in text
    rows = bench.read_report_csv(text)
    assert list(rows[0]) == ["algorithm", "accuracy", "t1_mean_s", "t2_mean_s", "ratio"]
    for row in rows:
        t1, t2, ratio = float(row["t1_mean_s"]), float(row["t2_mean_s"]), float(row["ratio"])
        assert ratio == pytest.approx(t1 / t2, rel=1e-3)


def test_run_benchmark_errors():
    ds = bench.generate_dataset(SMALL)
    with pytest.raises(ValueError):
        bench.run_benchmark(ds, bench.ExperimentConfig(), ("LR",))
    with pytest.raises(ValueError):
        bench.run_benchmark(ds, SMALL, ("SVM",))


def _t2(model, X, reps=3):
    best = float("inf")
    for _ in range(reps):
        t0 = time.perf_counter_ns()
        for x in X:
            ml.predict(model, x)
        best = min(best, (time.perf_counter_ns() - t0) / len(X))
    return best


@pytest.mark.slow
def test_prediction_time_scaling():
    # KNN cost grows with the stored training set; LR and DT stay flat
    cfg = replace(bench.ExperimentConfig(), n_records=400)
    ds = bench.generate_dataset(cfg)
    probe = ds.X[:40]
    t2 = {algo: [] for algo in ("KNN", "LR", "DT")}
    for n in (100, 200, 400):
        part = ds.subset(np.arange(n))
        for algo in t2:
            t2[algo].append(_t2(ml.train(algo, part), probe))
    knn = t2["KNN"]
    assert knn[0] < knn[1] < knn[2]
    assert knn[2] / knn[0] > 1.8
    for algo in ("LR", "DT"):
        assert max(t2[algo]) < 3 * min(t2[algo]), (algo, t2[algo])
