"""Full m-RDM fidelity bounds of one-axis-twisted states versus mu, with the Wineland parameter.

    python scripts/fig3_squeezed_scan.py --N 100 --mu 0.0:0.3:31 --m 1 2 3 4 -o fig3.csv
"""

import argparse
import sys

from symcert.cli import SCAN_COLUMNS, csv_text, parse_grid, run_scan


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--N", type=int, default=100)
    p.add_argument("--mu", default="0.01:0.3:30")
    p.add_argument("--m", type=int, nargs="+", default=[1, 2, 3, 4])
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("-o", "--output", default="fig3.csv")
    args = p.parse_args(argv)

    rows = run_scan({"N": args.N, "mu": parse_grid(args.mu), "m": args.m, "workers": args.workers})
    with open(args.output, "w") as fh:
        fh.write(csv_text(rows, SCAN_COLUMNS))

    print("mu      xi2[dB] " + " ".join(f"   m={m}" for m in args.m))
    for mu in sorted({r["mu"] for r in rows}):
        cell = {r["m"]: r for r in rows if r["mu"] == mu}
        print(f"{mu:<7.4f} {cell[args.m[0]]['xi2_db']:7.3f} " + " ".join(f"{cell[m]['bound']:6.4f}" for m in args.m))
    return 0


if __name__ == "__main__":
    sys.exit(main())
