"""Attack strategies and the round executor that keeps them causal.

A round is played in two phases. In the local phase each attacker sees only
the registers it owns, its own classical inputs and the shared randomness,
and emits one message. In the respond phase it additionally sees the message
from the other side and produces its answer. Quantum messages move register
ownership and are only allowed for strategies that declare quantum
communication.

Every random event (measurement outcome, private or shared coin) goes through a
chooser. ``Sampler`` draws from an RNG; ``answer_distribution`` replays the
round over every branch to obtain the exact answer law, which is what large-N
experiments sample from.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, Hashable, Mapping, Sequence

import numpy as np

from .errors import DomainError, StructuralError
from .linalg import kron, partial_trace, permute_factors, projector
from .states import (
    BELL_LABELS,
    bell_state,
    mub_bases,
    rho_beta,
    rho_sym_antisym,
    swap_operator,
    sym_antisym_projectors,
)
from .stats import two_sample_binomial_test

EMPTY = -1
SIDES = ("A", "B")
VERIFIER = "V"
SYM_LABELS = ("phi+", "phi-", "psi+")
PROB_FLOOR = 1e-13


# ---------------------------------------------------------------------------
# registers and randomness


class QuantumRegisters:
    """Density matrix over named qubits, each owned by one party."""

    def __init__(self, names: Sequence[str], rho: np.ndarray, owners: Mapping[str, str]):
        names = list(names)
        if len(set(names)) != len(names):
            raise StructuralError(f"duplicate register names {names}")
        if rho.shape != (2 ** len(names),) * 2:
            raise StructuralError(f"state of shape {rho.shape} does not fit {len(names)} qubits")
        self.names = names
        self.rho = np.asarray(rho, dtype=complex)
        self.owner = {n: owners[n] for n in names}

    def add(self, names: Sequence[str], rho: np.ndarray, owners: Mapping[str, str]) -> None:
        """Append fresh registers in state ``rho`` (uncorrelated with the rest)."""
        for n in names:
            if n in self.owner:
                raise StructuralError(f"register {n} already exists")
        self.names += list(names)
        self.rho = np.kron(self.rho, rho)
        self.owner.update({n: owners[n] for n in names})

    def _front(self, regs: Sequence[str]) -> list[int]:
        idx = [self.names.index(r) for r in regs]
        return idx + [i for i in range(len(self.names)) if i not in idx]

    def _lift(self, op: np.ndarray, regs: Sequence[str]) -> tuple[np.ndarray, list[int]]:
        perm = self._front(regs)
        rest = 2 ** (len(self.names) - len(regs))
        return np.kron(op, np.eye(rest)), perm

    def apply(self, unitary: np.ndarray, regs: Sequence[str]) -> None:
        dims = [2] * len(self.names)
        full, perm = self._lift(unitary, regs)
        moved = permute_factors(self.rho, dims, perm)
        moved = full @ moved @ full.conj().T
        self.rho = permute_factors(moved, dims, list(np.argsort(perm)))

    def measure(self, projectors: Sequence[np.ndarray], regs: Sequence[str], chooser) -> int:
        dims = [2] * len(self.names)
        perm = self._front(regs)
        moved = permute_factors(self.rho, dims, perm)
        rest = 2 ** (len(self.names) - len(regs))
        lifted = [np.kron(p, np.eye(rest)) for p in projectors]
        probs = np.array([max(0.0, float(np.real(np.trace(p @ moved)))) for p in lifted])
        k = chooser.choose(probs / probs.sum())
        post = lifted[k] @ moved @ lifted[k]
        post /= np.real(np.trace(post))
        self.rho = permute_factors(post, dims, list(np.argsort(perm)))
        return k

    def reduced(self, regs: Sequence[str]) -> np.ndarray:
        perm = self._front(regs)
        moved = permute_factors(self.rho, [2] * len(self.names), perm)
        return partial_trace(moved, [2] * len(self.names), range(len(regs)))


class Sampler:
    """Chooser that draws every random event from ``rng``."""

    def __init__(self, rng: np.random.Generator):
        self.rng = rng

    def choose(self, probs: np.ndarray) -> int:
        return int(self.rng.choice(len(probs), p=probs))


class _Replay:
    """Chooser that follows a forced prefix, then takes the first possible branch."""

    def __init__(self, prefix: Sequence[int]):
        self.prefix = list(prefix)
        self.trace: list[tuple[int, np.ndarray]] = []

    def choose(self, probs: np.ndarray) -> int:
        pos = len(self.trace)
        if pos < len(self.prefix):
            k = self.prefix[pos]
        else:
            k = int(np.argmax(probs > PROB_FLOOR))
        self.trace.append((k, np.asarray(probs, dtype=float)))
        return k


def enumerate_branches(play: Callable[[object], Hashable]) -> dict[Hashable, float]:
    """Exact outcome law of ``play(chooser)`` by depth-first replay over its choices."""
    law: dict[Hashable, float] = {}
    stack: list[list[int]] = [[]]
    while stack:
        prefix = stack.pop()
        chooser = _Replay(prefix)
        outcome = play(chooser)
        weight = 1.0
        for pos, (k, probs) in enumerate(chooser.trace):
            weight *= probs[k]
            if pos >= len(prefix):
                taken = [c for c, _ in chooser.trace[:pos]]
                for alt in range(k + 1, len(probs)):
                    if probs[alt] > PROB_FLOOR:
                        stack.append(taken + [alt])
        law[outcome] = law.get(outcome, 0.0) + float(weight)
    return law


class SharedRandomness:
    """Coins fixed before the round; both sides read the same value per key."""

    def __init__(self, chooser):
        self._chooser = chooser
        self._values: dict[Hashable, int] = {}

    def choice(self, key: Hashable, k: int) -> int:
        if key not in self._values:
            self._values[key] = self._chooser.choose(np.full(k, 1.0 / k))
        return self._values[key]


# ---------------------------------------------------------------------------
# causal views


class _Inputs(dict):
    def __missing__(self, key):
        raise StructuralError(f"classical input {key!r} is not available to this attacker")


@dataclass
class Message:
    classical: object = None
    qubits: tuple[str, ...] = ()


class LocalView:
    """Everything one attacker may touch."""

    def __init__(self, side: str, regs: QuantumRegisters, inputs: Mapping, shared: SharedRandomness, chooser):
        self.side = side
        self._regs = regs
        self.inputs = _Inputs(inputs)
        self.shared = shared
        self._chooser = chooser

    def owned(self) -> list[str]:
        return [n for n in self._regs.names if self._regs.owner[n] == self.side]

    def _check(self, regs: Sequence[str]) -> None:
        for r in regs:
            if r not in self._regs.owner:
                raise StructuralError(f"no register named {r!r}")
            if self._regs.owner[r] != self.side:
                raise StructuralError(f"attacker {self.side} does not hold register {r!r}")

    def apply(self, unitary: np.ndarray, regs: Sequence[str]) -> None:
        self._check(regs)
        self._regs.apply(unitary, regs)

    def measure(self, projectors: Sequence[np.ndarray], regs: Sequence[str]) -> int:
        self._check(regs)
        return self._regs.measure(projectors, regs, self._chooser)

    def measure_basis(self, vectors: Sequence[np.ndarray], regs: Sequence[str]) -> int:
        return self.measure([projector(v) for v in vectors], regs)

    def private(self, k: int) -> int:
        return self._chooser.choose(np.full(k, 1.0 / k))


# ---------------------------------------------------------------------------
# round inputs


@dataclass
class RoundInput:
    """Registers handed to the attackers in one round plus classical side inputs.

    ``label`` is the honest answer class (overlap for SWAP rounds, 0/1 for
    sym/antisym rounds, ``f(x, y)`` for the guessing game).
    """

    names: tuple[str, ...]
    rho: np.ndarray
    owners: dict[str, str]
    label: object = None
    purified: bool = False
    classical: dict[str, dict] = field(default_factory=lambda: {"A": {}, "B": {}})

    def registers(self) -> QuantumRegisters:
        return QuantumRegisters(self.names, self.rho.copy(), self.owners)


_AB_OWNERS = {"A1": "A", "B1": "B", "A2": "A", "B2": "B"}


def swap_round_input(beta: float) -> RoundInput:
    """Twirled input ``rho_beta`` on ``(A1, B1)``."""
    return RoundInput(("A1", "B1"), rho_beta(beta), dict(_AB_OWNERS), label=float(beta))


def pure_pair_input(psi: np.ndarray, phi: np.ndarray, beta: float | None = None) -> RoundInput:
    if beta is None:
        beta = float(abs(np.vdot(psi, phi)))
    return RoundInput(("A1", "B1"), projector(np.kron(psi, phi)), dict(_AB_OWNERS), label=float(beta))


def purified_round_input(beta: float) -> RoundInput:
    """Canonical purification of ``rho_beta``: the verifiers keep ``(V0, V1)``.

    ``|Omega> = sum_k (sqrt(rho) |k>)_{A1 B1} |k>_{V0 V1}``. Averaged over a
    symmetric overlap set the verifiers' halves are maximally mixed, as in a
    protocol where they send halves of EPR pairs.
    """
    rho = rho_beta(beta)
    vals, vecs = np.linalg.eigh(rho)
    root = (vecs * np.sqrt(np.clip(vals, 0, None))) @ vecs.conj().T
    omega = root.reshape(16)  # index order (A1, B1, V0, V1)
    owners = dict(_AB_OWNERS, V0=VERIFIER, V1=VERIFIER)
    # reorder (A1, B1, V0, V1) -> (V0, V1, A1, B1)
    state = permute_factors(projector(omega), [2, 2, 2, 2], [2, 3, 0, 1])
    return RoundInput(("V0", "V1", "A1", "B1"), state, owners, label=float(beta), purified=True)


def symasym_round_input(bell: str | Sequence[str]) -> RoundInput:
    """Bell pair(s) on ``(A_i, B_i)``; label 1 iff the pairs are the singlet."""
    labels = [bell] if isinstance(bell, str) else list(bell)
    kinds = {w == "psi-" for w in labels}
    if len(kinds) != 1:
        raise DomainError("doubled rounds are either all symmetric or all antisymmetric")
    vec = kron(*[bell_state(w) for w in labels])
    n = len(labels)
    names = tuple(itertools.chain.from_iterable((f"A{i + 1}", f"B{i + 1}") for i in range(n)))
    owners = {nm: nm[0] for nm in names}
    return RoundInput(names, projector(vec), owners, label=int(kinds.pop()))


def symasym_mixture_input(antisym: bool, doubled: bool) -> RoundInput:
    """Averaged input of one class (``rho_sym`` or ``rho_antisym``), one or two pairs."""
    rho = rho_sym_antisym()[1 if antisym else 0]
    if doubled:
        rho = np.kron(rho, rho)
        names = ("A1", "B1", "A2", "B2")
    else:
        names = ("A1", "B1")
    return RoundInput(names, rho, {nm: nm[0] for nm in names}, label=int(antisym))


def sample_symasym_input(rng: np.random.Generator, doubled: bool) -> RoundInput:
    antisym = bool(rng.integers(2))
    n = 2 if doubled else 1
    if antisym:
        return symasym_round_input(["psi-"] * n)
    return symasym_round_input([SYM_LABELS[int(rng.integers(3))] for _ in range(n)])


def guessing_round_input(d: int, k: int, x: int, y: int) -> RoundInput:
    """Abstract teleportation game: ``f(x, y) = (x + y) mod k``."""
    return RoundInput(
        (), np.ones((1, 1)), {}, label=(x + y) % k,
        classical={"A": {"x": x, "d": d, "k": k}, "B": {"y": y, "d": d, "k": k}},
    )


# ---------------------------------------------------------------------------
# strategies


@dataclass(frozen=True)
class Resources:
    epr_pairs: int = 0
    communication: str = "classical"

    def __post_init__(self):
        if self.communication not in ("classical", "quantum", "none"):
            raise DomainError(f"unknown communication type {self.communication!r}")


class AttackStrategy:
    """Two-phase strategy run by the executor for each side."""

    name = "base"
    resources = Resources()
    requires_purified = False

    def prepare(self, regs: QuantumRegisters) -> None:
        """Add pre-shared resources before the inputs arrive."""

    def local(self, view: LocalView) -> Message:
        raise NotImplementedError

    def respond(self, view: LocalView, memory: object, received: Message) -> int:
        raise NotImplementedError

    def __repr__(self):
        return f"{type(self).__name__}({self.name!r})"


def play_round(strategy: AttackStrategy, rinput: RoundInput, chooser) -> tuple[int, int]:
    """One round: local phase on both sides, one exchange, then answers ``(a, b)``."""
    if strategy.requires_purified and not rinput.purified:
        raise StructuralError(f"{strategy.name} needs the purified protocol mode")
    regs = rinput.registers()
    strategy.prepare(regs)
    shared = SharedRandomness(chooser)
    views = {s: LocalView(s, regs, rinput.classical.get(s, {}), shared, chooser) for s in SIDES}
    outgoing = {}
    memory = {}
    for s in SIDES:
        out = strategy.local(views[s])
        msg, mem = out if isinstance(out, tuple) else (out, None)
        if msg.qubits:
            if strategy.resources.communication != "quantum":
                raise StructuralError(f"{strategy.name} sent qubits over a classical channel")
            views[s]._check(msg.qubits)
        outgoing[s], memory[s] = msg, mem
    for s, other in (("A", "B"), ("B", "A")):
        for q in outgoing[s].qubits:
            regs.owner[q] = other
    a = strategy.respond(views["A"], memory["A"], outgoing["B"])
    b = strategy.respond(views["B"], memory["B"], outgoing["A"])
    return int(a), int(b)


def answer_distribution(strategy: AttackStrategy, rinput: RoundInput) -> dict[tuple[int, int], float]:
    """Exact law of ``(a, b)`` for one input."""
    return enumerate_branches(lambda ch: play_round(strategy, rinput, ch))


def sample_answers(
    strategy: AttackStrategy, rinput: RoundInput, n: int, rng: np.random.Generator
) -> np.ndarray:
    """``n`` i.i.d. answer pairs drawn from the exact law, shape ``(n, 2)``."""
    law = answer_distribution(strategy, rinput)
    keys = list(law)
    p = np.array([law[k] for k in keys])
    idx = rng.choice(len(keys), size=n, p=p / p.sum())
    return np.array(keys, dtype=int).reshape(-1, 2)[idx]


def run_rounds(
    strategy: AttackStrategy, inputs: Sequence[RoundInput], rng: np.random.Generator
) -> np.ndarray:
    """Operational simulation, one state-level round per input."""
    sampler = Sampler(rng)
    return np.array([play_round(strategy, r, sampler) for r in inputs], dtype=int).reshape(-1, 2)


def bell_measurement_projectors() -> list[np.ndarray]:
    return [projector(bell_state(w)) for w in BELL_LABELS]




def _pair_register(view: LocalView, i: int = 1) -> str:
    return f"{view.side}{i}"


class MubLocc(AttackStrategy):
    """Shared random basis from {Z, X, Y}; both measure, exchange, answer 'equal'."""

    name = "mub"
    resources = Resources(0, "classical")

    def local(self, view):
        basis = list(mub_bases().values())[view.shared.choice("basis", 3)]
        k = view.measure_basis(basis, [_pair_register(view)])
        return Message(k), k

    def respond(self, view, memory, received):
        return 0 if memory == received.classical else 1


def mub_locc_attack() -> AttackStrategy:
    return MubLocc()


# Outcome of the Bell measurements on (A1, A2) and (B1, B2) -> (sign, Bell state
# left on the verifiers' (V0, V1)), from expanding
# |Phi+>_{V0 A1} |Phi+>_{V1 B1} |Phi+>_{A2 B2} in Bell bases.
SWAP_LOOKUP: dict[tuple[str, str], tuple[int, str]] = {
    ("phi+", "phi+"): (1, "phi+"), ("phi-", "phi-"): (1, "phi+"),
    ("psi+", "psi+"): (1, "phi+"), ("psi-", "psi-"): (1, "phi+"),
    ("phi+", "phi-"): (1, "phi-"), ("phi-", "phi+"): (1, "phi-"),
    ("psi+", "psi-"): (1, "phi-"), ("psi-", "psi+"): (1, "phi-"),
    ("phi+", "psi+"): (1, "psi+"), ("phi-", "psi-"): (-1, "psi+"),
    ("psi+", "phi+"): (1, "psi+"), ("psi-", "phi-"): (-1, "psi+"),
    ("phi-", "psi+"): (1, "psi-"), ("psi+", "phi-"): (-1, "psi-"),
    ("psi-", "phi+"): (1, "psi-"), ("phi+", "psi-"): (-1, "psi-"),
}


def generate_swap_lookup(tol: float = 1e-12) -> dict[tuple[str, str], tuple[int, str]]:
    """Recompute ``SWAP_LOOKUP`` by projecting the three-EPR state onto every Bell pair."""
    phi = bell_state("phi+").reshape(2, 2)
    # axes: V0 A1 V1 B1 A2 B2
    psi = np.einsum("ab,cd,ef->abcdef", phi, phi, phi)
    table = {}
    for wa, wb in itertools.product(BELL_LABELS, repeat=2):
        a = bell_state(wa).reshape(2, 2).conj()
        b = bell_state(wb).reshape(2, 2).conj()
        v = np.einsum("abcdef,be,df->ac", psi, a, b).reshape(4) * 4.0
        hits = [(w, np.vdot(bell_state(w), v)) for w in BELL_LABELS]
        hits = [(w, c) for w, c in hits if abs(c) > tol]
        if len(hits) != 1 or abs(abs(hits[0][1]) - 1.0) > tol or abs(hits[0][1].imag) > tol:
            raise StructuralError(f"outcome {(wa, wb)} does not leave a single Bell state")
        w, c = hits[0]
        table[(wa, wb)] = (int(np.sign(c.real)), w)
    return table


class EprSwap(AttackStrategy):
    """One pre-shared EPR pair, local Bell measurements, one classical exchange."""

    name = "epr-swap"
    resources = Resources(1, "classical")
    requires_purified = True

    def prepare(self, regs):
        regs.add(("A2", "B2"), projector(bell_state("phi+")), {"A2": "A", "B2": "B"})

    def local(self, view):
        k = view.measure(bell_measurement_projectors(), [f"{view.side}1", f"{view.side}2"])
        return Message(BELL_LABELS[k]), BELL_LABELS[k]

    def respond(self, view, memory, received):
        pair = (memory, received.classical) if view.side == "A" else (received.classical, memory)
        _, left = SWAP_LOOKUP[pair]
        return 0 if left in SYM_LABELS else 1


def epr_swap_attack() -> AttackStrategy:
    return EprSwap()


def swap_simulation_operators() -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """``(W, Pi0, Pi1)`` on ``(V0, A2, V1, B2)``; the projectors are Bell pairs on (V0A2)(V1B2)."""
    w = kron(np.eye(2), swap_operator(2), np.eye(2))
    pi1_pairs = [("phi-", "psi+"), ("psi+", "phi-"), ("psi-", "phi+"), ("phi+", "psi-")]
    pi0_pairs = [p for p in itertools.product(BELL_LABELS, repeat=2) if p not in pi1_pairs]
    pi0 = sum(projector(np.kron(bell_state(a), bell_state(b))) for a, b in pi0_pairs)
    pi1 = sum(projector(np.kron(bell_state(a), bell_state(b))) for a, b in pi1_pairs)
    return w, pi0, pi1


def verify_swap_simulation_identity(beta: float) -> float:
    """Largest entrywise gap in ``Pi_{sym/asym} rho = Tr_{A2B2}[W Pi_{0/1} W^dag (rho ⊗ Phi+)]``."""
    rho = rho_beta(beta)
    w, pi0, pi1 = swap_simulation_operators()
    p_sym, p_asym = sym_antisym_projectors()
    # rho on (V0, V1) and Phi+ on (A2, B2), reordered to (V0, A2, V1, B2)
    joint = permute_factors(np.kron(rho, projector(bell_state("phi+"))), [2] * 4, [0, 2, 1, 3])
    dev = 0.0
    for honest, pi in ((p_sym, pi0), (p_asym, pi1)):
        prod = w @ pi @ w.conj().T @ joint
        rhs = partial_trace(prod, [2] * 4, [0, 2])
        dev = max(dev, float(np.max(np.abs(honest @ rho - rhs))))
    return dev


class TeleportGuess(AttackStrategy):
    """Teleport the d-dimensional input, guess that no correction is needed and guess f.

    Teleportation is abstract: the correction index is uniform over ``d^2`` with 0
    meaning none. The game is ``f(x, y) = (x + y) mod k``; the answer is the value
    B acted on, and both sides declare loss unless both guesses were right.
    """

    name = "teleport"
    resources = Resources(1, "classical")

    def __init__(self, d: int, k: int):
        if d < 1 or k < 1:
            raise DomainError(f"need d >= 1 and k >= 1, got d={d}, k={k}")
        self.d, self.k = int(d), int(k)
        self.resources = Resources(int(math.ceil(math.log2(d))) if d > 1 else 0, "classical")

    def local(self, view):
        if view.side == "A":
            c = view.private(self.d * self.d)
            return Message({"c": c, "x": view.inputs["x"]}), c
        g = view.private(self.k)
        return Message({"g": g, "y": view.inputs["y"]}), g

    def respond(self, view, memory, received):
        if view.side == "A":
            c, g = memory, received.classical["g"]
            f = (view.inputs["x"] + received.classical["y"]) % self.k
        else:
            c, g = received.classical["c"], memory
            f = (received.classical["x"] + view.inputs["y"]) % self.k
        return g if (c == 0 and g == f) else EMPTY


def teleport_guess_attack(d: int, k: int) -> AttackStrategy:
    return TeleportGuess(d, k)


def teleport_answer_rate(d: int, k: int) -> float:
    return 1.0 / (k * d * d)


PAULI_CORRECTIONS = {
    "phi+": np.eye(2),
    "phi-": np.diag([1.0, -1.0]),
    "psi+": np.array([[0.0, 1.0], [1.0, 0.0]]),
    "psi-": np.array([[0.0, 1.0], [-1.0, 0.0]]),
}


def teleport_demo(psi: np.ndarray) -> dict[str, dict[str, float]]:
    """State-vector qubit teleportation of ``psi`` over one EPR pair.

    For each Bell outcome on (Q, A2): its probability, the fidelity of B's qubit
    with ``psi`` as received and after the Pauli correction.
    """
    psi = np.asarray(psi, dtype=complex)
    psi = psi / np.linalg.norm(psi)
    state = np.einsum("a,bc->abc", psi, bell_state("phi+").reshape(2, 2))  # Q A2 B2
    out = {}
    for w in BELL_LABELS:
        bvec = np.einsum("abc,ab->c", state, bell_state(w).reshape(2, 2).conj())
        prob = float(np.vdot(bvec, bvec).real)
        bvec = bvec / math.sqrt(prob)
        fixed = PAULI_CORRECTIONS[w] @ bvec
        out[w] = {
            "probability": prob,
            "fidelity_raw": float(abs(np.vdot(psi, bvec)) ** 2),
            "fidelity_corrected": float(abs(np.vdot(psi, fixed)) ** 2),
        }
    return out


@dataclass(frozen=True)
class EntanglementBound:
    n_rounds: int
    epr_pairs: int
    threshold: float
    breakable_expected: bool

    def success_bound(self) -> float:
        """Expected-value dimension bound ``4^m (3/4)^(n/2)``."""
        return 4.0**self.epr_pairs * 0.75 ** (self.n_rounds / 2)


def entanglement_bound(n: int, m_epr: int) -> EntanglementBound:
    """Pre-shared EPR pairs below ``log2(4/3) n / 4`` cannot break ``n`` rounds in expectation.

    ``breakable_expected`` is True when the bound is silent, not a proof of an attack.
    """
    if n < 0 or m_epr < 0:
        raise DomainError(f"need n >= 0 and m >= 0, got n={n}, m={m_epr}")
    threshold = 0.25 * math.log2(4.0 / 3.0) * n
    return EntanglementBound(int(n), int(m_epr), threshold, not m_epr < threshold)


class SymAsymQc(AttackStrategy):
    """Doubled sym/antisym: swap halves so that each side holds one whole Bell pair."""

    name = "symasym-qc"
    resources = Resources(0, "quantum")

    def local(self, view):
        # A keeps pair 1 and sends A2; B keeps pair 2 and sends B1
        return Message(qubits=("A2",)) if view.side == "A" else Message(qubits=("B1",))

    def respond(self, view, memory, received):
        pair = ["A1", "B1"] if view.side == "A" else ["A2", "B2"]
        k = view.measure(bell_measurement_projectors(), pair)
        return int(BELL_LABELS[k] == "psi-")


def doubled_symasym_qc_attack() -> AttackStrategy:
    return SymAsymQc()


class XorLocc(AttackStrategy):
    """Computational-basis measurements; answer 'antisymmetric' iff every pair is unequal."""

    resources = Resources(0, "classical")

    def __init__(self, pairs: int):
        self.pairs = int(pairs)
        self.name = "xor" if pairs == 1 else "xor-doubled"

    def local(self, view):
        bits = tuple(
            view.measure_basis(mub_bases()["Z"], [f"{view.side}{i + 1}"]) for i in range(self.pairs)
        )
        return Message(bits), bits

    def respond(self, view, memory, received):
        return int(all(a != b for a, b in zip(memory, received.classical)))


def xor_locc_attack(doubled: bool = False) -> AttackStrategy:
    return XorLocc(2 if doubled else 1)


def symasym_success(strategy: AttackStrategy, doubled: bool) -> float:
    """Exact success probability with equal priors on the two classes."""
    total = 0.0
    for antisym in (False, True):
        law = answer_distribution(strategy, symasym_mixture_input(antisym, doubled))
        total += 0.5 * sum(p for (a, b), p in law.items() if a == b == int(antisym))
    return total


# ---------------------------------------------------------------------------
# honest prover and comparisons


def honest_answer_distribution(beta: float) -> dict[int, float]:
    """SWAP test on ``rho_beta`` run through the same register machinery."""
    proj = sym_antisym_projectors()

    def play(chooser):
        regs = swap_round_input(beta).registers()
        return regs.measure(proj, ["A1", "B1"], chooser)

    return enumerate_branches(play)


def honest_answers(beta: float, n: int, rng: np.random.Generator) -> np.ndarray:
    law = honest_answer_distribution(beta)
    return (rng.random(n) >= law.get(0, 0.0)).astype(int)


def answer_zero_fraction(pairs: np.ndarray) -> float:
    """Fraction of conclusive rounds with answer 0 (both sides must agree)."""
    ok = (pairs[:, 0] == pairs[:, 1]) & (pairs[:, 0] != EMPTY)
    return float(np.mean(pairs[ok, 0] == 0)) if ok.any() else float("nan")


def compare_with_honest(
    strategy: AttackStrategy, beta: float, n: int, rng: np.random.Generator, purified: bool = False
) -> float:
    """Two-sample p-value for the attack's answer-0 rate against an honest SWAP test."""
    rinput = purified_round_input(beta) if purified else swap_round_input(beta)
    attack = sample_answers(strategy, rinput, n, rng)[:, 0]
    honest = honest_answers(beta, n, rng)
    return two_sample_binomial_test(int(np.sum(attack == 0)), n, int(np.sum(honest == 0)), n)


STRATEGIES = {
    "mub": mub_locc_attack,
    "epr-swap": epr_swap_attack,
    "teleport": teleport_guess_attack,
    "symasym-qc": doubled_symasym_qc_attack,
}
