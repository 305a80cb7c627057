"""Recompute the optimal values and check them against the analytic certificates."""
from __future__ import annotations

import argparse
import time

from qpvlab.certificates import certificate_for, verify
from qpvlab.sdp.programs import build_lossy_parallel, build_parallel, build_sym_antisym, optimal_value


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--max-n", type=int, default=3)
    args = ap.parse_args()

    print(f"{'program':<22}{'sdp':>16}{'certificate':>14}{'passed':>8}{'sec':>8}")
    rows = [(f"parallel n={n}", lambda n=n: build_parallel(n), ("parallel", n, 1.0))
            for n in range(1, args.max_n + 1)]
    rows += [(f"lossy n={n} eta={eta}", lambda n=n, eta=eta: build_lossy_parallel(n, eta), ("lossy", n, eta))
             for n in (1, 2) for eta in (0.05, 0.3, 1.0)]
    rows += [("symasym", lambda: build_sym_antisym(False), ("symasym", 1, 1.0)),
             ("symasym doubled", lambda: build_sym_antisym(True), ("symasym-doubled", 2, 1.0))]
    for label, build, (prog, n, eta) in rows:
        t = time.perf_counter()
        value = optimal_value(build()).value
        rep = verify(certificate_for(prog, n, eta), value)
        print(f"{label:<22}{value:>16.10f}{str(rep.value):>14}{str(rep.passed):>8}"
              f"{time.perf_counter() - t:>8.2f}")


if __name__ == "__main__":
    main()
