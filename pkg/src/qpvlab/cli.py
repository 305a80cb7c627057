"""Command-line entry point: ``qpvlab <subcommand> ...``.

Exit codes: 0 success, 1 domain failure (including a failed check), 2 usage error.
"""
from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
import time
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import __version__, attacks, certificates, protocol, regression
from .errors import QpvError
from .linalg import Bipartition, eigvalsh, to_json
from .sdp.programs import (
    build_discrimination,
    build_lossy_parallel,
    build_min_delta,
    build_parallel,
    build_subset_loss,
    build_sym_antisym,
    tradeoff_closed_form,
    tradeoff_curve,
)
from .sdp.solver import solve
from .states import bell_state, rho_beta, rho_sym_antisym, sym_antisym_projectors
from .stats import acceptance_region, honest_p0, suppression_bound, two_sample_binomial_test

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _num(x: float) -> str:
    if math.isnan(x):
        return "NaN"
    if math.isinf(x):
        return "Infinity" if x > 0 else "-Infinity"
    if x == int(x) and abs(x) < 2**53:
        return repr(float(x))
    return format(x, ".17g")


def dumps(obj, indent: int = 2, _level: int = 0) -> str:
    """JSON with every float written to 17 significant digits."""
    pad = " " * (indent * (_level + 1))
    end = " " * (indent * _level)
    if isinstance(obj, (bool, np.bool_)) or obj is None:
        return json.dumps(bool(obj) if obj is not None else None)
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _num(float(obj))
    if isinstance(obj, Fraction):
        return json.dumps(str(obj))
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {dumps(v, indent, _level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        seq = list(obj)
        if not seq:
            return "[]"
        if all(isinstance(v, (int, float, np.integer, np.floating)) for v in seq):
            return "[" + ", ".join(dumps(v) for v in seq) + "]"
        return "[\n" + ",\n".join(pad + dumps(v, indent, _level + 1) for v in seq) + "\n" + end + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _floats(text: str) -> list[float]:
    out = []
    for tok in text.split(","):
        tok = tok.strip()
        if tok:
            out.append(float(Fraction(tok)) if "/" in tok else float(tok))
    return out


def _seed(args) -> int:
    env = os.environ.get("QPVLAB_SEED")
    if env is not None:
        try:
            return int(env)
        except ValueError as exc:
            raise UsageError(f"QPVLAB_SEED must be an integer, got {env!r}") from exc
    return int(args.seed)


def _emit(result: dict, args, manifest: dict) -> None:
    manifest["wall_clock_seconds"] = time.perf_counter() - manifest.pop("_t0")
    result = {**result, "manifest": manifest}
    text = dumps(result)
    print(text)
    if getattr(args, "output", None):
        Path(args.output).write_text(text + "\n")


# ---------------------------------------------------------------------------
# subcommands


def cmd_states(args, manifest):
    if args.which == "rho":
        m = rho_beta(args.beta)
    elif args.which == "sym":
        m = rho_sym_antisym()[0]
    elif args.which == "antisym":
        m = rho_sym_antisym()[1]
    elif args.which == "pi-sym":
        m = sym_antisym_projectors()[0]
    else:
        v = bell_state(args.which)
        m = np.outer(v, v.conj())
    if args.dump_matrix:
        Path(args.dump_matrix).write_text(json.dumps(to_json(m, (2, 2))))
        manifest["outputs"].append(args.dump_matrix)
    return {
        "which": args.which, "beta": args.beta, "trace": float(np.trace(m).real),
        "eigenvalues": [float(x) for x in eigvalsh(m)],
        "p0_honest": honest_p0(args.beta) if args.which == "rho" else None,
        "matrix": to_json(m, (2, 2)),
    }, True


def cmd_stats(args, manifest):
    rows = []
    for beta in _floats(args.overlaps):
        p = honest_p0(beta)
        for r in [int(x) for x in _floats(args.R)]:
            region = acceptance_region(beta, r, args.alpha, randomized=False)
            q = min(1.0, max(0.0, p - args.delta))
            mass = region.mass(q)
            try:
                bound = suppression_bound(args.delta, r, args.alpha, p, q)
            except QpvError:
                bound = float("nan")
            rows.append({"beta": beta, "R": r, "alpha": args.alpha, "lower": region.lower,
                         "upper": region.upper, "exact_mass": mass, "bound": bound})
    if args.csv:
        with open(args.csv, "w", newline="") as fh:
            w = csv.DictWriter(fh, fieldnames=list(rows[0]) if rows else ["beta"])
            w.writeheader()
            for row in rows:
                w.writerow({k: (_num(v) if isinstance(v, float) else v) for k, v in row.items()})
        manifest["outputs"].append(args.csv)
    return {"delta": args.delta, "rows": rows}, True


def _sdp_problem(args):
    prog = args.program
    params = {"program": prog}
    if prog == "discrim":
        return build_discrimination([(rho_beta(1.0), 0.5), (rho_beta(0.0), 0.5)],
                                    Bipartition.party_major(1)), params, None
    if prog == "parallel":
        params["n"] = args.n
        return build_parallel(args.n), params, None
    if prog == "lossy":
        params.update(n=args.n, eta=args.eta)
        return build_lossy_parallel(args.n, args.eta), params, None
    if prog == "min-delta":
        overlaps = _floats(args.overlaps)
        params.update(overlaps=overlaps, eta=args.eta)
        mp = build_min_delta(overlaps, args.eta)
        return mp.problem, params, mp
    if prog == "symasym":
        params["doubled"] = args.doubled
        return build_sym_antisym(args.doubled), params, None
    if prog == "subset-loss":
        subset = [int(x) for x in _floats(args.subset)]
        params.update(n=args.n, subset=subset)
        return build_subset_loss(args.n, subset), params, None
    raise UsageError(f"unknown program {prog!r}")


def cmd_sdp(args, manifest):
    if args.program == "tradeoff":
        grid = _floats(args.x) if args.x else list(np.linspace(0, 1, 11))
        curve = tradeoff_curve(grid, args.eta)
        pts = [{"x": x, "y": y, "closed_form": tradeoff_closed_form(x)} for x, y in curve]
        ok = all(abs(p["y"] - p["closed_form"]) <= 1e-5 for p in pts)
        return {"program": "tradeoff", "params": {"eta": args.eta}, "points": pts}, ok
    prob, params, mp = _sdp_problem(args)
    sol = solve(prob)
    out = {"program": args.program, "params": params, **sol.to_dict()}
    if mp is not None:
        out["deltas"] = {repr(b): d for b, d in mp.deltas(sol).items()}
    return out, sol.status == "optimal"


def cmd_certify(args, manifest):
    cert = certificates.certificate_for(args.program, args.n, args.eta)
    rep = certificates.verify(cert)
    return rep.to_dict(), rep.passed


def cmd_attack(args, manifest):
    seed = _seed(args)
    rng = np.random.default_rng(seed)
    n = args.rounds
    strategy = args.strategy
    out = {"strategy": strategy, "rounds": n, "seed": seed}
    if strategy in ("mub", "epr-swap"):
        strat = attacks.STRATEGIES[strategy]()
        per_beta = []
        for beta in _floats(args.overlaps):
            rinput = (attacks.purified_round_input(beta) if strategy == "epr-swap"
                      else attacks.swap_round_input(beta))
            pairs = attacks.sample_answers(strat, rinput, n, rng)
            honest = attacks.honest_answers(beta, n, rng)
            p_value = two_sample_binomial_test(int(np.sum(pairs[:, 0] == 0)), n, int(np.sum(honest == 0)), n)
            per_beta.append({
                "beta": beta, "answer0_rate": attacks.answer_zero_fraction(pairs),
                "honest_p0": honest_p0(beta), "success_rate": (float(np.mean(pairs[:, 0] == (0 if beta == 1.0 else 1)))
                                 if beta in (0.0, 1.0) else None),
                "two_sample_p_value": p_value,
            })
        out["per_beta"] = per_beta
        return out, True
    if strategy == "teleport":
        strat = attacks.teleport_guess_attack(args.d, args.k)
        xs = rng.integers(args.k, size=n)
        ys = rng.integers(args.k, size=n)
        inputs = [attacks.guessing_round_input(args.d, args.k, int(x), int(y)) for x, y in zip(xs, ys)]
        pairs = attacks.run_rounds(strat, inputs, rng)
        labels = np.array([r.label for r in inputs])
        answered = pairs[:, 0] != attacks.EMPTY
        rate = float(answered.mean())
        out.update(d=args.d, k=args.k, answer_rate=rate,
                   expected_rate=attacks.teleport_answer_rate(args.d, args.k),
                   conditional_success=float(np.mean(pairs[answered, 0] == labels[answered])) if answered.any() else None,
                   sides_agree=bool(np.all(pairs[:, 0] == pairs[:, 1])))
        return out, True
    if strategy in ("symasym-qc", "xor"):
        doubled = strategy == "symasym-qc" or args.doubled
        strat = (attacks.doubled_symasym_qc_attack() if strategy == "symasym-qc"
                 else attacks.xor_locc_attack(doubled))
        inputs = [attacks.sample_symasym_input(rng, doubled) for _ in range(n)]
        pairs = attacks.run_rounds(strat, inputs, rng)
        labels = np.array([r.label for r in inputs])
        ok = (pairs[:, 0] == labels) & (pairs[:, 1] == labels)
        out.update(doubled=doubled, success_rate=float(ok.mean()),
                   exact_success=attacks.symasym_success(strat, doubled))
        return out, True
    raise UsageError(f"unknown strategy {strategy!r}")


def cmd_simulate(args, manifest):
    path = Path(args.config)
    if not path.is_file():
        raise UsageError(f"config file {args.config} not found")
    try:
        data = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise UsageError(f"config is not valid JSON: {exc}") from exc
    if args.seed is not None or "QPVLAB_SEED" in os.environ:
        data["seed"] = _seed(args)
    cfg = protocol.ProtocolConfig.from_dict(data)
    verdict, tr = protocol.run(cfg)
    if args.csv:
        tr.write_csv(args.csv)
        manifest["outputs"].append(args.csv)
    return {"config": cfg.to_dict(), "verdict": verdict.to_dict()}, True


def cmd_regression(args, manifest):
    pattern = args.filter if args.filter is not None else None
    rows = regression.run_regression(pattern, perturb=0.05 if args.inject_fault else 0.0)
    if args.csv:
        with open(args.csv, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["name", "expected", "computed", "tolerance", "pass"])
            for r in rows:
                w.writerow([r["name"], _num(r["expected"]), _num(r["computed"]), _num(r["tolerance"]), r["pass"]])
        manifest["outputs"].append(args.csv)
    for r in rows:
        print(f"{r['name']:<28} expected={_num(r['expected']):<22} computed={_num(r['computed']):<22} "
              f"tol={r['tolerance']:.0e} {'PASS' if r['pass'] else 'FAIL'}", file=sys.stderr)
    return {"rows": rows, "passed": all(r["pass"] for r in rows)}, all(r["pass"] for r in rows)


# ---------------------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="qpvlab", description="QPV SWAP-test protocol toolkit")
    p.add_argument("--version", action="version", version=__version__)
    p.add_argument("--output", help="also write the JSON result to this path")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)

    s = sub.add_parser("states", help="print a state or projector")
    s.add_argument("--which", default="rho", choices=["rho", "sym", "antisym", "pi-sym", "phi+", "phi-", "psi+", "psi-"])
    s.add_argument("--beta", type=float, default=1.0)
    s.add_argument("--dump-matrix", help="write the matrix in JSON exchange format")
    s.set_defaults(func=cmd_states)

    s = sub.add_parser("stats", help="acceptance regions and suppression bounds")
    s.add_argument("--overlaps", default="0,1")
    s.add_argument("--R", default="100,400,1600")
    s.add_argument("--alpha", type=float, default=1e-3)
    s.add_argument("--delta", type=float, default=0.1)
    s.add_argument("--csv")
    s.set_defaults(func=cmd_stats)

    s = sub.add_parser("sdp", help="semidefinite programs")
    ss = s.add_subparsers(dest="action", parser_class=_Parser)
    sv = ss.add_parser("solve")
    sv.add_argument("--program", required=True,
                    choices=["discrim", "parallel", "lossy", "min-delta", "tradeoff", "symasym", "subset-loss"])
    sv.add_argument("--n", type=int, default=1)
    sv.add_argument("--eta", type=float, default=1.0)
    sv.add_argument("--overlaps", default="0,1")
    sv.add_argument("--x", default=None, help="comma-separated trade-off grid")
    sv.add_argument("--subset", default="0")
    sv.add_argument("--doubled", action="store_true")
    sv.set_defaults(func=cmd_sdp)

    s = sub.add_parser("certify", help="check an analytic dual certificate")
    s.add_argument("--program", required=True, choices=["single", "parallel", "lossy", "symasym", "symasym-doubled"])
    s.add_argument("--n", type=int, default=1)
    s.add_argument("--eta", type=float, default=1.0)
    s.set_defaults(func=cmd_certify)

    s = sub.add_parser("attack", help="simulate an attack strategy")
    s.add_argument("--strategy", required=True, choices=["mub", "epr-swap", "teleport", "symasym-qc", "xor"])
    s.add_argument("--rounds", type=int, default=10_000)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--overlaps", default="0,0.25,0.5,0.75,1")
    s.add_argument("--d", type=int, default=2)
    s.add_argument("--k", type=int, default=1)
    s.add_argument("--doubled", action="store_true")
    s.set_defaults(func=cmd_attack)

    s = sub.add_parser("simulate", help="run the protocol from a JSON config")
    s.add_argument("--config", required=True)
    s.add_argument("--seed", type=int, default=None)
    s.add_argument("--csv", help="write the round transcript")
    s.set_defaults(func=cmd_simulate)

    s = sub.add_parser("regression", help="recompute the golden values")
    s.add_argument("--filter", default=None, help="substring of case names; empty selects nothing")
    s.add_argument("--inject-fault", action="store_true", help="perturb the input state to force a failure")
    s.add_argument("--csv")
    s.set_defaults(func=cmd_regression)
    return p


def main(argv: list[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if getattr(args, "func", None) is None:
            raise UsageError("missing subcommand")
        if args.command == "sdp" and getattr(args, "action", None) is None:
            raise UsageError("usage: qpvlab sdp solve --program ...")
        manifest = {
            "subcommand": args.command, "parameters": {k: v for k, v in vars(args).items() if k != "func"},
            "seed": getattr(args, "seed", None), "version": __version__, "outputs": [],
            "_t0": time.perf_counter(),
        }
        if args.output:
            manifest["outputs"].append(args.output)
        result, ok = args.func(args, manifest)
        _emit(result, args, manifest)
        return EXIT_OK if ok else EXIT_FAIL
    except UsageError as exc:
        print(f"qpvlab: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except QpvError as exc:
        print(f"qpvlab: error: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
