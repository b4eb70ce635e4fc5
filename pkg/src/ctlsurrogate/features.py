"""Fixed-length numeric encoding of (structure, formula) pairs and dataset files."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from . import ctl
from .checker import SatResult
from .kripke import KripkeStructure

HEADER_PREFIX = "# ctl-surrogate dataset v1 d="

TOKEN_IDS: dict[type[ctl.Formula], int] = {
    ctl.TrueConst: 1,
    ctl.FalseConst: 2,
    ctl.Not: 3,
    ctl.And: 4,
    ctl.Or: 5,
    ctl.Implies: 6,
    ctl.EX: 7,
    ctl.EF: 8,
    ctl.EG: 9,
    ctl.AX: 10,
    ctl.AF: 11,
    ctl.AG: 12,
    ctl.EU: 13,
    ctl.AU: 14,
}
ATOM_BASE = 15


class EncodingError(ValueError):
    pass


@dataclass(frozen=True)
class EncodingConfig:
    max_states: int = 10
    max_props: int = 4
    max_formula_len: int = 500

    def __post_init__(self):
        if min(self.max_states, self.max_props, self.max_formula_len) < 1:
            raise ValueError("encoding caps must be positive")

    @property
    def dim(self) -> int:
        m = self.max_states
        return m * m + m * self.max_props + m + self.max_formula_len

    def default_vocabulary(self) -> tuple[str, ...]:
        return tuple(f"p{i}" for i in range(self.max_props))


@dataclass(frozen=True)
class DatasetRecord:
    features: np.ndarray
    label: bool
    check_time_ns: int


def encode_kripke(k: KripkeStructure, cfg: EncodingConfig) -> np.ndarray:
    """Adjacency matrix, then labeling bitmap, then initial bitmap, each zero-padded."""
    m = cfg.max_states
    if k.n_states > m:
        raise EncodingError(f"structure has {k.n_states} states, cap is {m}")
    if len(k.props) > cfg.max_props:
        raise EncodingError(f"structure has {len(k.props)} props, cap is {cfg.max_props}")
    adj = np.zeros((m, m))
    for s, t in k.transitions:
        adj[s, t] = 1.0
    lab = np.zeros((m, cfg.max_props))
    for s, names in enumerate(k.labeling):
        for i, p in enumerate(k.props):
            if p in names:
                lab[s, i] = 1.0
    init = np.zeros(m)
    init[list(k.initial)] = 1.0
    return np.concatenate([adj.ravel(), lab.ravel(), init])


def encode_formula(
    phi: ctl.Formula, cfg: EncodingConfig, vocabulary: Sequence[str] | None = None
) -> np.ndarray:
    """Pre-order token ids, zero-padded to ``max_formula_len``.

    Atom ``vocabulary[i]`` encodes as ``15 + i``; the vocabulary defaults to
    ``p0..p{max_props-1}``.
    """
    vocab = list(vocabulary) if vocabulary is not None else list(cfg.default_vocabulary())
    if len(vocab) > cfg.max_props:
        raise EncodingError(f"vocabulary of {len(vocab)} exceeds cap {cfg.max_props}")
    index = {p: i for i, p in enumerate(vocab)}
    out = np.zeros(cfg.max_formula_len)
    for pos, node in enumerate(ctl.preorder(phi)):
        if pos >= cfg.max_formula_len:
            raise EncodingError(
                f"formula length {ctl.formula_length(phi)} exceeds cap {cfg.max_formula_len}"
            )
        if isinstance(node, ctl.Atom):
            if node.name not in index:
                raise EncodingError(f"atom {node.name!r} not in vocabulary")
            out[pos] = ATOM_BASE + index[node.name]
        else:
            out[pos] = TOKEN_IDS[type(node)]
    return out


def build_record(
    k: KripkeStructure, phi: ctl.Formula, cfg: EncodingConfig, oracle_result: SatResult
) -> DatasetRecord:
    features = np.concatenate([encode_kripke(k, cfg), encode_formula(phi, cfg, k.props)])
    return DatasetRecord(features, bool(oracle_result.holds), int(oracle_result.elapsed_ns))


@dataclass
class Dataset:
    """Column-stacked records: ``X`` (n, d) float64, ``y`` bool, ``check_time_ns`` int64."""

    X: np.ndarray
    y: np.ndarray
    check_time_ns: np.ndarray

    def __post_init__(self):
        self.X = np.asarray(self.X, dtype=np.float64)
        self.y = np.asarray(self.y, dtype=bool)
        self.check_time_ns = np.asarray(self.check_time_ns, dtype=np.int64)
        if self.X.ndim != 2 or len(self.y) != len(self.X) or len(self.check_time_ns) != len(self.X):
            raise ValueError("inconsistent dataset shapes")

    def __len__(self) -> int:
        return len(self.y)

    @property
    def dim(self) -> int:
        return self.X.shape[1]

    def subset(self, idx) -> Dataset:
        idx = np.asarray(idx, dtype=np.int64)
        return Dataset(self.X[idx], self.y[idx], self.check_time_ns[idx])

    @classmethod
    def from_records(cls, records: Iterable[DatasetRecord], dim: int | None = None) -> Dataset:
        records = list(records)
        if not records:
            d = dim or 0
            return cls(np.zeros((0, d)), np.zeros(0, bool), np.zeros(0, np.int64))
        X = np.vstack([r.features for r in records])
        if dim is not None and X.shape[1] != dim:
            raise ValueError(f"record dimension {X.shape[1]} != {dim}")
        return cls(X, [r.label for r in records], [r.check_time_ns for r in records])


def _fmt(v: float) -> str:
    return format(float(v), ".17g")


def dataset_lines(ds: Dataset, include_timing: bool = True) -> Iterable[str]:
    yield f"{HEADER_PREFIX}{ds.dim}"
    for x, y, t in zip(ds.X, ds.y, ds.check_time_ns):
        row = [_fmt(v) for v in x]
        row.append("1" if y else "0")
        if include_timing:
            row.append(str(int(t)))
        yield ",".join(row)


def write_dataset(ds: Dataset, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        for line in dataset_lines(ds):
            f.write(line + "\n")


def read_dataset(path: str | Path) -> Dataset:
    with open(path, encoding="utf-8") as f:
        header = f.readline().rstrip("\n")
        if not header.startswith(HEADER_PREFIX):
            raise ValueError(f"{path}: missing dataset header")
        d = int(header[len(HEADER_PREFIX):])
        X, y, t = [], [], []
        for lineno, line in enumerate(f, start=2):
            line = line.strip()
            if not line:
                continue
            cells = line.split(",")
            if len(cells) != d + 2:
                raise ValueError(f"{path}:{lineno}: expected {d + 2} fields, got {len(cells)}")
            X.append([float(c) for c in cells[:d]])
            if cells[d] not in ("0", "1"):
                raise ValueError(f"{path}:{lineno}: label must be 0 or 1")
            y.append(cells[d] == "1")
            t.append(int(cells[d + 1]))
    if not X:
        return Dataset(np.zeros((0, d)), np.zeros(0, bool), np.zeros(0, np.int64))
    return Dataset(np.array(X), y, t)
