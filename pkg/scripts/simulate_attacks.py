"""Run the protocol against the honest prover and each attack, many seeds each."""
from __future__ import annotations

import argparse

from qpvlab.protocol import ProtocolConfig, acceptance_rate

SCENARIOS = {
    "honest": {},
    "mub": {"mode": "attack", "strategy": "mub", "a_pos": 0.5, "b_pos": 1.5},
    "epr-swap": {"mode": "attack", "strategy": "epr-swap", "a_pos": 0.5, "b_pos": 1.5, "purified": True},
    "single": {"mode": "attack", "strategy": "single", "a_pos": 0.5},
}


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--trials", type=int, default=100)
    ap.add_argument("--rounds", type=int, default=500, help="conclusive rounds per overlap")
    ap.add_argument("--eta", type=float, default=1.0)
    ap.add_argument("--overlaps", default="0,1")
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    overlaps = tuple(float(x) for x in args.overlaps.split(","))
    for name, extra in SCENARIOS.items():
        cfg = ProtocolConfig(overlaps=overlaps, eta=args.eta, rounds_per_overlap=args.rounds,
                             seed=args.seed, **extra)
        rate = acceptance_rate(cfg, args.trials)
        print(f"{name:<10} accepted in {rate:6.1%} of {args.trials} runs")


if __name__ == "__main__":
    main()
