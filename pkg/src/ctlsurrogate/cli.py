"""Command-line entry point: ``ctl-surrogate <subcommand>``.

Settings resolve as flags > ``--config`` file (key=value lines) > defaults,
and the resolved set is echoed as ``# key=value`` lines before any work.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path
from typing import Any, Callable

from . import bench, checker, ctl, ml
from .features import EncodingConfig, read_dataset
from .kripke import GenConfig, export_smv, parse_kripke

EXIT_ERROR = 2


class UsageError(Exception):
    pass


def read_config_file(path: str | None) -> dict[str, str]:
    if not path:
        return {}
    out = {}
    for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected key=value")
        key, value = line.split("=", 1)
        out[key.strip().replace("-", "_")] = value.strip()
    return out


def _parse_value(text: str) -> Any:
    for conv in (int, float):
        try:
            return conv(text)
        except ValueError:
            pass
    return text


def _positive_int(text) -> int:
    v = int(text)
    if v < 1:
        raise UsageError(f"expected a positive integer, got {text}")
    return v


def _seed(text) -> int:
    v = int(text)
    if not 0 <= v < 2**64:
        raise UsageError(f"seed must be a 64-bit unsigned integer, got {text}")
    return v


# option name -> (converter, default)
EXPERIMENT_OPTIONS: dict[str, tuple[Callable, Any]] = {
    "records": (_positive_int, 400),
    "formula_len": (_positive_int, 500),
    "seed": (_seed, 1),
    "states": (_positive_int, 10),
    "props": (_positive_int, 4),
    "edge_prob": (float, 0.25),
    "label_prob": (float, 0.5),
    "max_states": (_positive_int, 10),
    "max_props": (_positive_int, 4),
    "max_formula_len": (_positive_int, 500),
    "jobs": (_positive_int, 1),
}


def resolve(args: argparse.Namespace, options: dict, file_cfg: dict) -> dict:
    resolved = {}
    for name, (conv, default) in options.items():
        flag = getattr(args, name, None)
        if flag is not None:
            value = flag
        elif name in file_cfg:
            value = file_cfg[name]
        else:
            value = default
        try:
            resolved[name] = conv(value) if value is not None else None
        except (TypeError, ValueError) as exc:
            raise UsageError(f"bad value for {name}: {value!r} ({exc})") from None
    return resolved


def echo_config(command: str, resolved: dict, stream=None) -> None:
    stream = stream or sys.stdout
    print(f"# command={command}", file=stream)
    for key in sorted(resolved):
        print(f"# {key}={resolved[key]}", file=stream)


def _hp_overrides(entries: list[str], file_cfg: dict) -> dict[str, dict]:
    out: dict[str, dict] = {}
    pairs = [(k[3:], v) for k, v in file_cfg.items() if k.startswith("hp.")]
    for entry in entries or []:
        if "=" not in entry:
            raise UsageError(f"--hp expects ALGO.name=value, got {entry!r}")
        key, value = entry.split("=", 1)
        pairs.append((key, value))
    for key, value in pairs:
        if "." not in key:
            raise UsageError(f"hyperparameter key must be ALGO.name, got {key!r}")
        algo, name = key.split(".", 1)
        out.setdefault(algo.upper(), {})[name] = _parse_value(value)
    return out


def _split_overrides(entries: list[str], file_cfg: dict) -> dict[str, ml.SplitConfig]:
    splits = dict(bench.PAPER_SPLITS)
    pairs = [(k[6:], v) for k, v in file_cfg.items() if k.startswith("split.")]
    pairs += [tuple(e.split("=", 1)) for e in entries or [] if "=" in e]
    if any("=" not in e for e in entries or []):
        raise UsageError("--split expects ALGO=SEED:FRACTION")
    for algo, value in pairs:
        try:
            seed, fraction = value.split(":")
            splits[algo.upper()] = ml.SplitConfig(_seed(seed), float(fraction))
        except ValueError as exc:
            raise UsageError(f"bad split {algo}={value}: {exc}") from None
    return splits


def experiment_config(r: dict, splits=None, hyperparams=None) -> bench.ExperimentConfig:
    try:
        return bench.ExperimentConfig(
            n_records=r["records"],
            formula_length=r["formula_len"],
            gen=GenConfig(r["states"], r["props"], r["edge_prob"], r["label_prob"]),
            encoding=EncodingConfig(r["max_states"], r["max_props"], r["max_formula_len"]),
            splits=splits if splits is not None else dict(bench.PAPER_SPLITS),
            master_seed=r["seed"],
            hyperparams=hyperparams or {},
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _add_experiment_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--records", help="number of records (default 400)")
    p.add_argument("--formula-len", dest="formula_len", help="AST node count per formula (default 500)")
    p.add_argument("--seed", help="master seed (default 1)")
    p.add_argument("--states", help="states per structure (default 10)")
    p.add_argument("--props", help="propositions per structure (default 4)")
    p.add_argument("--edge-prob", dest="edge_prob", help="edge probability (default 0.25)")
    p.add_argument("--label-prob", dest="label_prob", help="label probability (default 0.5)")
    p.add_argument("--max-states", dest="max_states")
    p.add_argument("--max-props", dest="max_props")
    p.add_argument("--max-formula-len", dest="max_formula_len")
    p.add_argument("--jobs", help="worker processes (default 1)")


def _read_formula(args) -> ctl.Formula:
    if args.formula is not None:
        text = args.formula
    else:
        text = Path(args.formula_file).read_text(encoding="utf-8")
    return ctl.parse_formula(text)


# --- subcommands ---------------------------------------------------------------

def cmd_gen_data(args) -> int:
    file_cfg = read_config_file(args.config)
    r = resolve(args, {**EXPERIMENT_OPTIONS, "out": (str, None)}, file_cfg)
    if not r["out"]:
        raise UsageError("--out is required")
    cfg = experiment_config(r)
    echo_config("gen-data", {**r, "config_hash": cfg.config_hash()})
    ds = bench.generate_dataset(cfg, jobs=r["jobs"], out=r["out"])
    print(f"records={len(ds)} dim={ds.dim} yes_fraction={ds.y.mean():.4f}")
    print(f"fingerprint={bench.dataset_fingerprint(ds)}")
    return 0


def cmd_check(args) -> int:
    echo_config("check", {"kripke": args.kripke, "formula": args.formula, "formula_file": args.formula_file})
    k = parse_kripke(Path(args.kripke).read_text(encoding="utf-8"))
    phi = _read_formula(args)
    res = checker.check(k, phi)
    print(f"verdict: {'yes' if res.holds else 'no'}")
    print("sat_states: " + " ".join(str(s) for s in sorted(res.sat_states)))
    print(f"elapsed_ns: {res.elapsed_ns}")
    return 0 if res.holds else 1


def _split_for(algo: str, args, file_cfg) -> ml.SplitConfig:
    base = bench.PAPER_SPLITS.get(algo, ml.SplitConfig(0, 0.8))
    r = resolve(args, {"split_seed": (_seed, base.seed), "fraction": (float, base.fraction)}, file_cfg)
    try:
        return ml.SplitConfig(r["split_seed"], r["fraction"])
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def cmd_train(args) -> int:
    file_cfg = read_config_file(args.config)
    r = resolve(args, {"algo": (str.upper, None), "data": (str, None), "out": (str, None),
                       "train_seed": (_seed, 0)}, file_cfg)
    if not (r["algo"] and r["data"] and r["out"]):
        raise UsageError("--algo, --data and --out are required")
    if r["algo"] not in ml.ALGORITHMS:
        raise UsageError(f"unknown algorithm {r['algo']}")
    split_cfg = _split_for(r["algo"], args, file_cfg)
    hp = ml.resolve_hyperparams(r["algo"], _hp_overrides(args.hp, file_cfg).get(r["algo"]))
    echo_config("train", {**r, "split_seed": split_cfg.seed, "fraction": split_cfg.fraction,
                          **{f"hp.{r['algo']}.{k}": v for k, v in hp.items()}})
    train_ds, _ = ml.split(read_dataset(r["data"]), split_cfg)
    model = ml.train(r["algo"], train_ds, hp, r["train_seed"])
    Path(r["out"]).write_text(ml.dumps_model(model), encoding="utf-8")
    print(f"trained {r['algo']} on {len(train_ds)} records -> {r['out']}")
    return 0


def cmd_eval(args) -> int:
    file_cfg = read_config_file(args.config)
    r = resolve(args, {"model": (str, None), "data": (str, None)}, file_cfg)
    if not (r["model"] and r["data"]):
        raise UsageError("--model and --data are required")
    model = ml.loads_model(Path(r["model"]).read_text(encoding="utf-8"))
    split_cfg = _split_for(model.algorithm, args, file_cfg)
    echo_config("eval", {**r, "split_seed": split_cfg.seed, "fraction": split_cfg.fraction})
    _, test_ds = ml.split(read_dataset(r["data"]), split_cfg)
    rep = ml.evaluate(model, test_ds)
    print(f"algorithm={model.algorithm} accuracy={rep.accuracy:.4f} "
          f"mean_predict_ns={rep.mean_predict_ns:.1f} n_test={rep.n_test}")
    return 0


def cmd_bench(args) -> int:
    file_cfg = read_config_file(args.config)
    options = {**EXPERIMENT_OPTIONS, "data": (str, None), "out": (str, None),
               "algos": (str, ",".join(ml.ALGORITHMS)), "repeats": (_positive_int, 5)}
    # generation settings only feed the config hash here; default them to fit the caps
    for key in ("formula_len", "states", "props"):
        options[key] = (_positive_int, None)
    r = resolve(args, options, file_cfg)
    r["formula_len"] = r["formula_len"] or r["max_formula_len"]
    r["states"] = r["states"] or min(EXPERIMENT_OPTIONS["states"][1], r["max_states"])
    r["props"] = r["props"] or min(EXPERIMENT_OPTIONS["props"][1], r["max_props"])
    if not r["data"]:
        raise UsageError("--data is required")
    algos = tuple(a.strip().upper() for a in r["algos"].split(",") if a.strip())
    unknown = [a for a in algos if a not in ml.ALGORITHMS]
    if unknown or not algos:
        raise UsageError(f"unknown algorithms {unknown}; choose from {','.join(ml.ALGORITHMS)}")
    splits = _split_overrides(args.split, file_cfg)
    hyper = _hp_overrides(args.hp, file_cfg)
    for algo, hp in hyper.items():
        ml.resolve_hyperparams(algo, hp)
    ds = read_dataset(r["data"])
    r["records"] = len(ds)
    cfg = experiment_config(r, splits, hyper)
    echo_config("bench", {**r, "algos": ",".join(algos), "config_hash": cfg.config_hash(),
                          **{f"split.{a}": f"{s.seed}:{s.fraction}" for a, s in splits.items()}})
    report = bench.run_benchmark(ds, cfg, algos, repeats=r["repeats"])
    csv_text = report.to_csv()
    if r["out"]:
        Path(r["out"]).write_text(csv_text, encoding="utf-8")
    print(report.summary())
    print(f"fingerprint={report.dataset_fingerprint}")
    return 0


def cmd_export_smv(args) -> int:
    echo_config("export-smv", {"kripke": args.kripke, "formula": args.formula,
                               "formula_file": args.formula_file, "out": args.out},
                stream=sys.stdout if args.out else sys.stderr)
    k = parse_kripke(Path(args.kripke).read_text(encoding="utf-8"))
    text = export_smv(k, _read_formula(args))
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ctl-surrogate", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-data", help="generate a labelled dataset")
    _add_experiment_flags(p)
    p.add_argument("--out")
    p.add_argument("--config")
    p.set_defaults(func=cmd_gen_data)

    for name, func, helptext in (("check", cmd_check, "model-check one structure"),
                                 ("export-smv", cmd_export_smv, "write a NuSMV model")):
        p = sub.add_parser(name, help=helptext)
        p.add_argument("--kripke", required=True, help="structure file")
        g = p.add_mutually_exclusive_group(required=True)
        g.add_argument("--formula", help="CTL formula text")
        g.add_argument("--formula-file", dest="formula_file")
        if name == "export-smv":
            p.add_argument("--out")
        p.set_defaults(func=func)

    p = sub.add_parser("train", help="train one classifier on the train split")
    p.add_argument("--algo")
    p.add_argument("--data")
    p.add_argument("--out")
    p.add_argument("--split-seed", dest="split_seed")
    p.add_argument("--fraction")
    p.add_argument("--train-seed", dest="train_seed")
    p.add_argument("--hp", action="append", metavar="ALGO.NAME=VALUE")
    p.add_argument("--config")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="evaluate a saved model on the test split")
    p.add_argument("--model")
    p.add_argument("--data")
    p.add_argument("--split-seed", dest="split_seed")
    p.add_argument("--fraction")
    p.add_argument("--config")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("bench", help="train and time all classifiers")
    _add_experiment_flags(p)
    p.add_argument("--data")
    p.add_argument("--out", help="report CSV path")
    p.add_argument("--algos", help="comma-separated subset of RF,BT,KNN,DT,LR")
    p.add_argument("--repeats", help="timed repetitions per record (default 5)")
    p.add_argument("--split", action="append", metavar="ALGO=SEED:FRACTION")
    p.add_argument("--hp", action="append", metavar="ALGO.NAME=VALUE")
    p.add_argument("--config")
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"ctl-surrogate {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except (ValueError, OSError) as exc:
        print(f"ctl-surrogate {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
