"""Test accuracy of each classifier as the dataset grows.

Shows how much signal the structural encoding carries about the verdict
for a given generator setting, e.g.

    python scripts/learning_curve.py --sizes 200 400 1600 --formula-len 500
"""

import argparse
from dataclasses import replace

from ctlsurrogate import bench, ml
from ctlsurrogate.features import EncodingConfig
from ctlsurrogate.kripke import GenConfig


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", type=int, nargs="+", default=[200, 400, 800])
    ap.add_argument("--formula-len", type=int, default=500)
    ap.add_argument("--states", type=int, default=10)
    ap.add_argument("--edge-prob", type=float, default=0.25)
    ap.add_argument("--label-prob", type=float, default=0.5)
    ap.add_argument("--jobs", type=int, default=1)
    args = ap.parse_args()

    base = bench.ExperimentConfig(
        formula_length=args.formula_len,
        gen=GenConfig(args.states, 4, args.edge_prob, args.label_prob),
        encoding=EncodingConfig(max(10, args.states), 4, max(500, args.formula_len)),
    )
    largest = bench.generate_dataset(replace(base, n_records=max(args.sizes)), jobs=args.jobs)
    print(f"{'n':>6} {'base':>6} " + " ".join(f"{a:>6}" for a in ml.ALGORITHMS))
    for n in args.sizes:
        ds = largest.subset(range(n))
        split_cfg = ml.SplitConfig(0, 0.8)
        tr, te = ml.split(ds, split_cfg)
        accs = [ml.evaluate(ml.train(a, tr), te, repeats=1, warmup=False).accuracy for a in ml.ALGORITHMS]
        print(f"{n:>6} {ml.majority_baseline(tr, te):>6.3f} " + " ".join(f"{a:>6.3f}" for a in accs))


if __name__ == "__main__":
    main()
