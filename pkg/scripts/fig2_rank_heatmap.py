"""Mean fidelity bound of random rank-k targets from their m-RDM, N = 10 by default.

    python scripts/fig2_rank_heatmap.py --N 10 --trials 100 --seed 2024 -o fig2.csv

For rank k >= 2 the certified quantity is the linear overlap min <rho, rho^t>;
at m = N it equals the target purity, printed alongside for reference.
"""

import argparse
import sys

from symcert.cli import FIG2_COLUMNS, csv_text, run_random_study


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--N", type=int, default=10)
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--seed", type=int, default=2024)
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("-o", "--output", default="fig2.csv")
    args = p.parse_args(argv)

    rows = run_random_study({"mode": "fig2", "N": [args.N], "trials": args.trials, "seed": args.seed,
                             "workers": args.workers, "ranks": None, "m_list": None})
    with open(args.output, "w") as fh:
        fh.write(csv_text(rows, FIG2_COLUMNS))

    ms = sorted({r["m"] for r in rows})
    print("rank\\m " + " ".join(f"{m:>6d}" for m in ms) + "   purity")
    for k in sorted({r["rank"] for r in rows}):
        cells = {r["m"]: r for r in rows if r["rank"] == k}
        print(f"{k:<6d} " + " ".join(f"{cells[m]['mean_bound']:6.3f}" for m in ms)
              + f"   {cells[ms[0]]['mean_purity']:.3f}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
