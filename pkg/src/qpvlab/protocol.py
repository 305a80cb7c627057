"""Space-time Monte Carlo of the SWAP-test position-verification protocol.

Positions live on a line, the signal speed is 1. Verifiers time their
emissions so both inputs reach the claimed position ``P`` at time
``D = max(P - v0, v1 - P)``; an answer from ``P`` is then due at ``V_i`` at
``D + d_i`` with ``d_i`` the distance from ``P`` to ``V_i``.

Rounds are generated in fixed blocks, each with its own seeded substreams, so a
run is a deterministic function of the config and seed.
"""
from __future__ import annotations

import csv
import itertools
import json
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from . import attacks
from .errors import DomainError, StructuralError
from .sdp.programs import MAX_LOSSY_ROUNDS, build_subset_loss, optimal_value
from .states import OverlapSet, honest_p0
from .stats import acceptance_region, inconclusive_region

BLOCK = 4096
MAX_BLOCKS = 10_000
PROTOCOL_STRATEGIES = ("mub", "epr-swap", "single")
_STREAMS = {"beta": 0, "loss": 1, "answer": 2, "verdict": 3}


@dataclass
class ProtocolConfig:
    v0_pos: float = 0.0
    v1_pos: float = 2.0
    prover_pos: float = 1.0
    timing_tolerance: float = 1e-9
    overlaps: tuple[float, ...] = (0.0, 1.0)
    eta: float = 1.0
    rounds_per_overlap: int = 1000
    alpha: float = 1e-3
    seed: int = 0
    mode: str = "honest"
    strategy: str = "mub"
    a_pos: float | None = None
    b_pos: float | None = None
    purified: bool = False
    attackers_mimic_loss: bool = True
    random_subset: bool = False

    def __post_init__(self):
        self.overlaps = OverlapSet(tuple(self.overlaps)).betas
        if not self.v0_pos < self.prover_pos < self.v1_pos:
            raise StructuralError("need v0_pos < prover_pos < v1_pos")
        if not 0.0 < self.eta <= 1.0:
            raise DomainError(f"eta must lie in (0, 1], got {self.eta}")
        if not 0.0 < self.alpha < 1.0:
            raise DomainError(f"alpha must lie in (0, 1), got {self.alpha}")
        if self.rounds_per_overlap < 1:
            raise DomainError("rounds_per_overlap must be positive")
        if self.timing_tolerance < 0:
            raise DomainError("timing_tolerance must be non-negative")
        if self.mode not in ("honest", "attack"):
            raise DomainError(f"mode must be 'honest' or 'attack', got {self.mode!r}")
        if self.mode == "attack":
            if self.strategy not in PROTOCOL_STRATEGIES:
                raise DomainError(f"strategy must be one of {PROTOCOL_STRATEGIES}")
            if self.a_pos is None:
                raise StructuralError("attack mode needs a_pos")
            if self.strategy == "single":
                if not self.v0_pos <= self.a_pos <= self.v1_pos:
                    raise StructuralError("attacker must sit between the verifiers")
            else:
                if self.b_pos is None:
                    raise StructuralError("a two-party attack needs b_pos")
                if not self.v0_pos <= self.a_pos < self.prover_pos < self.b_pos <= self.v1_pos:
                    raise StructuralError("need v0 <= a_pos < prover_pos < b_pos <= v1")
            if self.strategy == "epr-swap" and not self.purified:
                raise StructuralError("the EPR swapping attack needs purified mode")

    @classmethod
    def from_dict(cls, data: dict) -> "ProtocolConfig":
        known = set(cls.__dataclass_fields__)
        extra = set(data) - known
        if extra:
            raise StructuralError(f"unknown config keys {sorted(extra)}")
        return cls(**data)

    @classmethod
    def from_json(cls, path: str | Path) -> "ProtocolConfig":
        return cls.from_dict(json.loads(Path(path).read_text()))

    def to_dict(self) -> dict:
        d = asdict(self)
        d["overlaps"] = list(self.overlaps)
        return d

    @property
    def distances(self) -> tuple[float, float]:
        return self.prover_pos - self.v0_pos, self.v1_pos - self.prover_pos

    def expected_arrivals(self) -> tuple[float, float]:
        d0, d1 = self.distances
        big = max(d0, d1)
        return big + d0, big + d1

    def emission_times(self) -> tuple[float, float]:
        d0, d1 = self.distances
        big = max(d0, d1)
        return big - d0, big - d1


@dataclass(frozen=True)
class RoundTranscript:
    round_id: int
    beta: float
    answer_v0: int
    answer_v1: int
    arrival_time_v0: float
    arrival_time_v1: float
    loss_flag: bool


@dataclass
class Transcripts:
    """Columnar transcript of a run, sorted by ``round_id``."""

    round_id: np.ndarray
    beta: np.ndarray
    answer_v0: np.ndarray
    answer_v1: np.ndarray
    t_v0: np.ndarray
    t_v1: np.ndarray
    loss: np.ndarray

    def __len__(self) -> int:
        return len(self.round_id)

    def rows(self):
        for i in range(len(self)):
            yield RoundTranscript(
                int(self.round_id[i]), float(self.beta[i]), int(self.answer_v0[i]),
                int(self.answer_v1[i]), float(self.t_v0[i]), float(self.t_v1[i]), bool(self.loss[i]),
            )

    def write_csv(self, path: str | Path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["round_id", "beta", "answer", "t_v0", "t_v1", "loss"])
            for r in self.rows():
                if r.answer_v0 == r.answer_v1:
                    ans = "null" if r.answer_v0 == attacks.EMPTY else str(r.answer_v0)
                else:
                    ans = f"{_fmt_answer(r.answer_v0)}/{_fmt_answer(r.answer_v1)}"
                w.writerow([r.round_id, repr(r.beta), ans, repr(r.arrival_time_v0),
                            repr(r.arrival_time_v1), int(r.loss_flag)])


def _fmt_answer(a: int) -> str:
    return "null" if a == attacks.EMPTY else str(a)


@dataclass
class Verdict:
    accepted: bool
    reasons: list[str]
    per_beta: list[dict]
    inconclusive: dict = field(default_factory=dict)
    total_rounds: int = 0

    def to_dict(self) -> dict:
        return asdict(self)


def _stream(seed: int, block: int, name: str) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([int(seed) & (2**64 - 1), block, _STREAMS[name]]))


def answer_laws(config: ProtocolConfig) -> list[tuple[list[tuple[int, int]], np.ndarray]]:
    """Per-overlap exact law of ``(a, b)`` for conclusive rounds."""
    laws = []
    for beta in config.overlaps:
        if config.mode == "honest" or config.strategy == "single":
            p0 = attacks.honest_answer_distribution(beta).get(0, 0.0)
            law = {(0, 0): p0, (1, 1): 1.0 - p0}
        else:
            strat = attacks.STRATEGIES[config.strategy]()
            rinput = (attacks.purified_round_input(beta) if config.purified
                      else attacks.swap_round_input(beta))
            law = attacks.answer_distribution(strat, rinput)
        keys = sorted(law)
        laws.append((keys, np.cumsum([law[k] for k in keys])))
    return laws


def arrival_times(config: ProtocolConfig) -> tuple[float, float]:
    """When answers reach ``(V0, V1)`` for the configured mode."""
    e0, e1 = config.emission_times()
    v0, v1 = config.v0_pos, config.v1_pos
    if config.mode == "honest":
        return config.expected_arrivals()
    a = config.a_pos
    if config.strategy == "single":
        # one attacker needs both inputs before answering either verifier
        ready = max(e0 + (a - v0), e1 + (v1 - a))
        return ready + (a - v0), ready + (v1 - a)
    b = config.b_pos
    in_a = e0 + (a - v0)
    in_b = e1 + (v1 - b)
    gap = b - a
    out_a = max(in_a, in_b + gap)
    out_b = max(in_b, in_a + gap)
    return out_a + (a - v0), out_b + (v1 - b)


def _block(config: ProtocolConfig, block: int, laws) -> dict[str, np.ndarray]:
    k = len(config.overlaps)
    ids = np.arange(block * BLOCK, (block + 1) * BLOCK)
    beta_idx = _stream(config.seed, block, "beta").integers(k, size=BLOCK)
    lost = _stream(config.seed, block, "loss").random(BLOCK) >= config.eta
    u = _stream(config.seed, block, "answer").random(BLOCK)
    a = np.empty(BLOCK, dtype=int)
    b = np.empty(BLOCK, dtype=int)
    for j, (keys, cdf) in enumerate(laws):
        sel = beta_idx == j
        pick = np.minimum(np.searchsorted(cdf, u[sel] * cdf[-1], side="right"), len(keys) - 1)
        arr = np.array(keys, dtype=int)[pick]
        a[sel], b[sel] = arr[:, 0], arr[:, 1]
    attacker_answers_all = config.mode == "attack" and not config.attackers_mimic_loss
    if not attacker_answers_all:
        a[lost] = attacks.EMPTY
        b[lost] = attacks.EMPTY
    else:
        lost = np.zeros(BLOCK, dtype=bool)
    return {"round_id": ids, "beta_idx": beta_idx, "a": a, "b": b, "loss": lost}


def run(config: ProtocolConfig) -> tuple[Verdict, Transcripts]:
    """Play rounds until every overlap has ``R`` conclusive answers, then judge."""
    laws = answer_laws(config)
    k = len(config.overlaps)
    blocks = []
    counts = np.zeros(k, dtype=int)
    for block in range(MAX_BLOCKS):
        data = _block(config, block, laws)
        blocks.append(data)
        conclusive = (data["a"] != attacks.EMPTY)
        counts += np.bincount(data["beta_idx"][conclusive], minlength=k)
        if np.all(counts >= config.rounds_per_overlap):
            break
    else:
        raise DomainError("round budget exhausted before every overlap reached R answers")
    merged = {key: np.concatenate([d[key] for d in blocks]) for key in blocks[0]}
    # stop right after the round that completes the last overlap
    conc = merged["a"] != attacks.EMPTY
    cum = np.zeros((len(conc), k), dtype=int)
    cum[np.arange(len(conc)), merged["beta_idx"]] = conc
    cum = np.cumsum(cum, axis=0)
    stop = int(np.argmax(np.all(cum >= config.rounds_per_overlap, axis=1))) + 1
    merged = {key: v[:stop] for key, v in merged.items()}
    t0, t1 = arrival_times(config)
    n = stop
    betas = np.array(config.overlaps)[merged["beta_idx"]]
    tr = Transcripts(
        merged["round_id"], betas, merged["a"], merged["b"],
        np.full(n, t0), np.full(n, t1), merged["loss"],
    )
    return judge(tr, config), tr


def timing_check(tr: Transcripts, config: ProtocolConfig) -> list[dict]:
    """Rounds whose answers arrive outside ``expected +- tolerance`` at either verifier."""
    e0, e1 = config.expected_arrivals()
    tol = config.timing_tolerance
    bad = (np.abs(tr.t_v0 - e0) > tol) | (np.abs(tr.t_v1 - e1) > tol)
    out = []
    for i in np.flatnonzero(bad):
        out.append({
            "round_id": int(tr.round_id[i]),
            "t_v0": float(tr.t_v0[i]), "expected_v0": e0,
            "t_v1": float(tr.t_v1[i]), "expected_v1": e1,
        })
    return out


def inconclusive_rate_check(tr: Transcripts, eta: float, alpha: float) -> dict:
    """Central binomial test on the number of loss answers at rate ``1 - eta``."""
    total = len(tr)
    empties = int(np.sum((tr.answer_v0 == attacks.EMPTY) & (tr.answer_v1 == attacks.EMPTY)))
    region = inconclusive_region(total, eta, alpha) if total else None
    passed = True if region is None else region.k_lo <= empties <= region.k_hi
    return {
        "rounds": total, "empty": empties, "expected_rate": 1.0 - eta,
        "k_lo": None if region is None else region.k_lo,
        "k_hi": None if region is None else region.k_hi,
        "pass": bool(passed),
    }


def judge(tr: Transcripts, config: ProtocolConfig) -> Verdict:
    reasons = []
    late = timing_check(tr, config)
    if late:
        reasons.append(f"timing: {len(late)} rounds outside tolerance")
    mismatch = int(np.sum(tr.answer_v0 != tr.answer_v1))
    if mismatch:
        reasons.append(f"mismatch: {mismatch} rounds with different answers")
    inc = inconclusive_rate_check(tr, config.eta, config.alpha)
    if not inc["pass"]:
        reasons.append(f"inconclusive-rate: {inc['empty']} of {inc['rounds']} outside [{inc['k_lo']}, {inc['k_hi']}]")
    picker = _stream(config.seed, 0, "verdict")
    per_beta = []
    for beta in config.overlaps:
        sel = (tr.beta == beta) & (tr.answer_v0 == tr.answer_v1) & (tr.answer_v0 != attacks.EMPTY)
        answers = tr.answer_v0[sel]
        if config.random_subset and len(answers) > config.rounds_per_overlap:
            answers = picker.choice(answers, size=config.rounds_per_overlap, replace=False)
        r = len(answers)
        zeros = int(np.sum(answers == 0))
        region = acceptance_region(beta, r, config.alpha, randomized=False)
        ok = region.k_lo <= zeros <= region.k_hi
        per_beta.append({
            "beta": float(beta), "R_beta": r, "p_hat": zeros / r if r else float("nan"),
            "p_beta": honest_p0(beta), "lower": region.lower, "upper": region.upper, "pass": bool(ok),
        })
        if not ok:
            reasons.append(f"statistics: beta={beta} p_hat={zeros / r:.6g} outside [{region.lower:.6g}, {region.upper:.6g}]")
    return Verdict(not reasons, reasons, per_beta, inc, len(tr))


def subset_loss_check(n: int, k: int) -> dict:
    """Best PPT success when answering only on a fixed ``k``-subset of ``n`` rounds."""
    if not 1 <= n <= MAX_LOSSY_ROUNDS:
        raise DomainError(f"subset-loss check supports 1 <= n <= {MAX_LOSSY_ROUNDS}, got {n}")
    if not 0 <= k <= n:
        raise DomainError(f"need 0 <= k <= n, got k={k}")
    bound = (2.0 / 3.0) ** k
    if k == 0:
        return {"n": n, "k": 0, "bound": 1.0, "subsets": [], "pass": True}
    subsets = []
    for sub in itertools.combinations(range(n), k):
        sol = optimal_value(build_subset_loss(n, sub))
        subsets.append({
            "subset": list(sub), "value": sol.value, "gap": sol.gap,
            "pass": bool(sol.value <= bound + 1e-6),
        })
    return {"n": n, "k": k, "bound": bound, "subsets": subsets,
            "pass": all(s["pass"] for s in subsets)}


def acceptance_rate(config: ProtocolConfig, trials: int, seeds: Sequence[int] | None = None) -> float:
    """Fraction of accepted runs over ``trials`` seeds derived from ``config.seed``."""
    if seeds is None:
        seeds = [config.seed * 1_000_003 + t for t in range(trials)]
    acc = 0
    for s in seeds:
        cfg = ProtocolConfig.from_dict({**config.to_dict(), "seed": int(s)})
        acc += run(cfg)[0].accepted
    return acc / len(seeds)
