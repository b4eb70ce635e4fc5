"""End-to-end experiment: generate a labelled dataset, train the five
classifiers on their split settings, and compare prediction time against
checking time."""

from __future__ import annotations

import hashlib
import io
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

from . import __version__, checker, ctl, ml
from .features import Dataset, EncodingConfig, build_record, dataset_lines, write_dataset
from .kripke import GenConfig, generate_kripke
from .rng import derive_seed

# seed/fraction per algorithm used for the headline experiment
PAPER_SPLITS: dict[str, ml.SplitConfig] = {
    "RF": ml.SplitConfig(459, 0.8),
    "BT": ml.SplitConfig(536, 0.8),
    "KNN": ml.SplitConfig(399, 0.86),
    "DT": ml.SplitConfig(536, 0.8),
    "LR": ml.SplitConfig(2077, 0.8),
}

KRIPKE_STREAM = 0
FORMULA_STREAM = 1
TRAIN_STREAM = 2


@dataclass(frozen=True)
class ExperimentConfig:
    n_records: int = 400
    formula_length: int = 500
    gen: GenConfig = GenConfig(n_states=10, n_props=4, edge_prob=0.25, label_prob=0.5)
    encoding: EncodingConfig = EncodingConfig()
    splits: dict[str, ml.SplitConfig] = field(default_factory=lambda: dict(PAPER_SPLITS))
    master_seed: int = 1
    hyperparams: dict[str, dict] = field(default_factory=dict)

    def __post_init__(self):
        if self.n_records < 1:
            raise ValueError("n_records must be positive")
        if self.formula_length < 1:
            raise ValueError("formula_length must be positive")
        if self.formula_length > self.encoding.max_formula_len:
            raise ValueError("formula_length exceeds encoding.max_formula_len")
        if self.gen.n_states > self.encoding.max_states:
            raise ValueError("gen.n_states exceeds encoding.max_states")
        if self.gen.n_props > self.encoding.max_props:
            raise ValueError("gen.n_props exceeds encoding.max_props")
        if not 0 <= self.master_seed < 2**64:
            raise ValueError("master_seed must be a 64-bit unsigned integer")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["splits"] = {a: {"seed": s.seed, "fraction": s.fraction} for a, s in sorted(self.splits.items())}
        return d

    def config_hash(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]


def make_instance(cfg: ExperimentConfig, i: int) -> tuple:
    """The (structure, formula) pair for record ``i``."""
    k = generate_kripke(replace(cfg.gen, rng_seed=derive_seed(cfg.master_seed, i, KRIPKE_STREAM)))
    phi = ctl.generate_formula(cfg.formula_length, k.props, derive_seed(cfg.master_seed, i, FORMULA_STREAM))
    return k, phi


def _make_record(args):
    cfg, i = args
    k, phi = make_instance(cfg, i)
    return build_record(k, phi, cfg.encoding, checker.check(k, phi))


def generate_dataset(cfg: ExperimentConfig, jobs: int = 1, out: str | Path | None = None) -> Dataset:
    tasks = [(cfg, i) for i in range(cfg.n_records)]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            records = list(pool.map(_make_record, tasks, chunksize=max(1, len(tasks) // (4 * jobs))))
    else:
        records = [_make_record(t) for t in tasks]
    ds = Dataset.from_records(records, cfg.encoding.dim)
    if out is not None:
        write_dataset(ds, out)
    return ds


def dataset_fingerprint(ds: Dataset) -> str:
    """SHA-256 of the dataset file text with the timing column left out."""
    h = hashlib.sha256()
    for line in dataset_lines(ds, include_timing=False):
        h.update(line.encode())
        h.update(b"\n")
    return h.hexdigest()


@dataclass(frozen=True)
class BenchRow:
    algorithm: str
    accuracy: float
    t1_mean_s: float
    t2_mean_s: float
    ratio: float
    baseline_accuracy: float
    n_train: int
    n_test: int


@dataclass
class BenchReport:
    per_algorithm: list[BenchRow]
    dataset_fingerprint: str
    config_hash: str = ""

    def row(self, algorithm: str) -> BenchRow:
        for r in self.per_algorithm:
            if r.algorithm == algorithm:
                return r
        raise KeyError(algorithm)

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write(f"# config_hash={self.config_hash}\n")
        buf.write(f"# dataset_fingerprint={self.dataset_fingerprint}\n")
        buf.write(f"# tool_version=ctlsurrogate {__version__}\n")
        buf.write("# t1 reused from generation-time check measurements over each test split\n")
        for r in self.per_algorithm:
            buf.write(f"# {r.algorithm}: n_train={r.n_train} n_test={r.n_test} "
                      f"majority_baseline={r.baseline_accuracy:.4f}\n")
        buf.write("algorithm,accuracy,t1_mean_s,t2_mean_s,ratio\n")
        for r in self.per_algorithm:
            buf.write(f"{r.algorithm},{r.accuracy:.4f},{r.t1_mean_s:.4g},{r.t2_mean_s:.4g},{r.ratio:.4g}\n")
        return buf.getvalue()

    def summary(self) -> str:
        lines = [f"{'algo':<5}{'acc':>8}{'base':>8}{'t1 (s)':>12}{'t2 (s)':>12}{'t1/t2':>10}"]
        for r in self.per_algorithm:
            lines.append(f"{r.algorithm:<5}{r.accuracy:>8.4f}{r.baseline_accuracy:>8.4f}"
                         f"{r.t1_mean_s:>12.4g}{r.t2_mean_s:>12.4g}{r.ratio:>10.4g}")
        return "\n".join(lines)


def read_report_csv(text: str) -> list[dict]:
    import csv

    body = [line for line in text.splitlines() if line and not line.startswith("#")]
    return list(csv.DictReader(body))


def _sig4(x: float) -> float:
    return float(f"{x:.4g}")


def run_benchmark(
    dataset: Dataset,
    cfg: ExperimentConfig,
    algorithms: tuple[str, ...] = ml.ALGORITHMS,
    repeats: int = 5,
) -> BenchReport:
    if dataset.dim != cfg.encoding.dim:
        raise ValueError(f"dataset dimension {dataset.dim} != encoding dimension {cfg.encoding.dim}")
    rows = []
    for algo in algorithms:
        if algo not in ml.MODEL_TYPES:
            raise ValueError(f"unknown algorithm {algo!r}")
        if algo not in cfg.splits:
            raise ValueError(f"no split configured for {algo}")
        train_ds, test_ds = ml.split(dataset, cfg.splits[algo])
        model = ml.train(algo, train_ds, cfg.hyperparams.get(algo),
                         derive_seed(cfg.master_seed, TRAIN_STREAM, ml.ALGORITHMS.index(algo)))
        ev = ml.evaluate(model, test_ds, repeats=repeats)
        t1 = _sig4(float(test_ds.check_time_ns.mean()) / 1e9)
        t2 = _sig4(ev.mean_predict_ns / 1e9)
        rows.append(BenchRow(
            algo, ev.accuracy, t1, t2, t1 / t2 if t2 > 0 else float("inf"),
            ml.majority_baseline(train_ds, test_ds), len(train_ds), len(test_ds),
        ))
    return BenchReport(rows, dataset_fingerprint(dataset), cfg.config_hash())
