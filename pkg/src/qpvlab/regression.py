"""Golden values recomputed from scratch on every run."""
from __future__ import annotations

import math
import time
from dataclasses import dataclass
from typing import Callable

from .attacks import entanglement_bound
from .certificates import certificate_for, verify
from .linalg import Bipartition
from .sdp.programs import (
    build_discrimination,
    build_lossy_parallel,
    build_min_delta,
    build_parallel,
    build_sym_antisym,
    optimal_value,
)
from .sdp.solver import solve
from .states import rho_beta
from .stats import acceptance_region, attacker_accept_prob, delta_relation, DeltaVector

SDP_TOL = 1e-6


@dataclass(frozen=True)
class Golden:
    name: str
    expected: float
    tolerance: float
    compute: Callable[[float], float]


def _single_round(perturb: float) -> float:
    rho0 = (1 - perturb) * rho_beta(1.0) + perturb * rho_beta(0.0)
    states = [(rho0, 0.5), (rho_beta(0.0), 0.5)]
    return optimal_value(build_discrimination(states, Bipartition.party_major(1))).value


def _min_delta(_: float) -> float:
    prog = build_min_delta((0.0, 1.0))
    return solve(prog.problem).value


def _certified(program: str, n: int = 1) -> float:
    rep = verify(certificate_for(program, n))
    return float(rep.value) if rep.passed else float("nan")


def _case3(_: float) -> float:
    region = acceptance_region(1.0, 20, 1e-3)
    return attacker_accept_prob(DeltaVector((1.0,), (0.25,)), [region])


GOLDENS = [
    Golden("single-round", 2 / 3, SDP_TOL, _single_round),
    Golden("parallel-n2", 4 / 9, SDP_TOL, lambda _: optimal_value(build_parallel(2)).value),
    Golden("parallel-n3", 8 / 27, SDP_TOL, lambda _: optimal_value(build_parallel(3)).value),
    Golden("lossy-n1-eta0.3", 2 / 3, SDP_TOL, lambda _: optimal_value(build_lossy_parallel(1, 0.3)).value),
    Golden("lossy-n2-eta0.05", 4 / 9, SDP_TOL, lambda _: optimal_value(build_lossy_parallel(2, 0.05)).value),
    Golden("symasym", 5 / 6, SDP_TOL, lambda _: optimal_value(build_sym_antisym(False)).value),
    Golden("symasym-doubled", 17 / 18, SDP_TOL, lambda _: optimal_value(build_sym_antisym(True)).value),
    Golden("min-delta-l1", 0.25, SDP_TOL, _min_delta),
    Golden("certificate-single", 2 / 3, 0.0, lambda _: _certified("single")),
    Golden("certificate-parallel-n3", (2 / 3) ** 3, 1e-15,
           lambda _: _certified("parallel", 3)),
    Golden("epr-threshold-per-round", 0.25 * math.log2(4 / 3), 1e-12,
           lambda _: entanglement_bound(100, 0).threshold / 100),
    Golden("epr-threshold-approx", 0.103, 1e-3, lambda _: entanglement_bound(1000, 0).threshold / 1000),
    Golden("delta-relation", 1 / 6, 1e-15, lambda _: delta_relation(2 / 3)),
    Golden("case3-power", 0.75**20, 1e-15, _case3),
]


def run_regression(pattern: str | None = None, perturb: float = 0.0) -> list[dict]:
    """Evaluate every golden whose name contains ``pattern``.

    ``perturb`` mixes the orthogonal-input state into the equal-input one for
    the single-round case; used to check that failures surface.
    """
    if pattern == "":
        return []
    rows = []
    for g in GOLDENS:
        if pattern is not None and pattern not in g.name:
            continue
        t = time.perf_counter()
        got = g.compute(perturb)
        err = abs(got - g.expected)
        rows.append({
            "name": g.name, "expected": g.expected, "computed": got, "abs_error": err,
            "tolerance": g.tolerance, "pass": bool(err <= g.tolerance),
            "seconds": time.perf_counter() - t,
        })
    return rows
