"""Random pure symmetric targets: 2-RDM fidelity bounds versus N (histograms).

    python scripts/fig1_random_pure.py --trials 1000 --N 2 4 6 8 10 12 14 16 18 20 --seed 1 -o fig1.csv
"""

import argparse
import sys

import numpy as np

from symcert.cli import FIG1_COLUMNS, csv_text, run_random_study


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--N", type=int, nargs="+", default=list(range(2, 21, 2)))
    p.add_argument("--m", type=int, default=2)
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("-o", "--output", default="fig1.csv")
    args = p.parse_args(argv)

    rows = run_random_study({"mode": "fig1", "N": args.N, "m": [args.m], "trials": args.trials,
                             "seed": args.seed, "workers": args.workers})
    with open(args.output, "w") as fh:
        fh.write(csv_text(rows, FIG1_COLUMNS))

    edges = np.linspace(0, 1, 11)
    print("N    " + " ".join(f"{e:>5.1f}" for e in edges[:-1]) + "   (fraction of trials per bound decile)")
    for N in args.N:
        b = np.array([r["bound"] for r in rows if r["N"] == N])
        hist, _ = np.histogram(np.clip(b, 0, 1 - 1e-12), bins=edges)
        print(f"{N:<4d} " + " ".join(f"{h / len(b):5.2f}" for h in hist))
    return 0


if __name__ == "__main__":
    sys.exit(main())
