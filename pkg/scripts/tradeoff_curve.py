"""Trace the PPT trade-off between orthogonal-input and equal-input success."""
from __future__ import annotations

import argparse
import csv
import sys

import numpy as np

from qpvlab.sdp.programs import tradeoff_closed_form, tradeoff_curve


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--points", type=int, default=21)
    ap.add_argument("--eta", type=float, default=1.0)
    ap.add_argument("--csv", help="write x, y, closed form to this file instead of stdout")
    args = ap.parse_args()

    grid = np.linspace(0.0, 1.0, args.points)
    fh = open(args.csv, "w", newline="") if args.csv else sys.stdout
    w = csv.writer(fh)
    w.writerow(["x", "y_sdp", "y_closed_form", "abs_error"])
    for x, y in tradeoff_curve(grid, args.eta):
        ref = tradeoff_closed_form(x)
        w.writerow([f"{x:.6f}", f"{y:.10f}", f"{ref:.10f}", f"{abs(y - ref):.2e}"])
    if args.csv:
        fh.close()


if __name__ == "__main__":
    main()
