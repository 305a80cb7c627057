"""Analytic primal and dual solutions of the PPT discrimination programs.

Matrices are built as exact ``Fraction`` object arrays; only PSD verdicts go
through floating point (the self-contained eigensolver in :mod:`qpvlab.linalg`).
Multi-round operators use party-major factor order and the partial transpose
acts on all B factors.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from .errors import DomainError, StructuralError
from .linalg import Bipartition, eigvalsh, pair_to_party_major, partial_transpose, permute_factors

#: a constraint passes when its minimum eigenvalue is at least ``-CERT_TOL``
CERT_TOL = 1e-12
MAX_CERT_ROUNDS = 4
NULL = "null"

ExactMatrix = np.ndarray


def exact(rows: Sequence[Sequence[int]], scale: Fraction | int = 1) -> ExactMatrix:
    scale = Fraction(scale)
    return np.array([[Fraction(v) * scale for v in row] for row in rows], dtype=object)


def exact_eye(d: int) -> ExactMatrix:
    m = np.full((d, d), Fraction(0), dtype=object)
    for i in range(d):
        m[i, i] = Fraction(1)
    return m


def exact_zeros(d: int) -> ExactMatrix:
    return np.full((d, d), Fraction(0), dtype=object)


def exact_trace(m: ExactMatrix) -> Fraction:
    return sum((m[i, i] for i in range(m.shape[0])), Fraction(0))


def to_float(m: ExactMatrix) -> np.ndarray:
    return np.array(m, dtype=float)


def is_zero(m: ExactMatrix) -> bool:
    return all(v == 0 for v in m.ravel())


def exact_kron(*mats: ExactMatrix) -> ExactMatrix:
    out = mats[0]
    for m in mats[1:]:
        out = np.kron(out, m)
    return out


# equal inputs (bit 0) and orthogonal inputs (bit 1), overlap-twirled
RHO0 = exact([[2, 0, 0, 0], [0, 1, 1, 0], [0, 1, 1, 0], [0, 0, 0, 2]], Fraction(1, 6))
RHO1 = exact([[1, 0, 0, 0], [0, 2, -1, 0], [0, -1, 2, 0], [0, 0, 0, 1]], Fraction(1, 6))
RHO_ANTISYM = exact([[0, 0, 0, 0], [0, 1, -1, 0], [0, -1, 1, 0], [0, 0, 0, 0]], Fraction(1, 2))
PHI_PLUS = exact([[1, 0, 0, 1], [0, 0, 0, 0], [0, 0, 0, 0], [1, 0, 0, 1]], Fraction(1, 2))
PI0_SINGLE = exact([[2, 0, 0, 0], [0, 1, 1, 0], [0, 1, 1, 0], [0, 0, 0, 2]], Fraction(1, 3))
PI0_XOR = exact([[1, 0, 0, 0], [0, 0, 0, 0], [0, 0, 0, 0], [0, 0, 0, 1]])


def pt(m: ExactMatrix, n_rounds: int) -> ExactMatrix:
    """Partial transpose on the B factors of an ``n``-round party-major operator."""
    return partial_transpose(m, [2] * (2 * n_rounds), Bipartition.party_major(n_rounds))


def rounds_product(per_round: Sequence[ExactMatrix]) -> ExactMatrix:
    """Tensor product of two-qubit round operators, reordered to party-major."""
    n = len(per_round)
    return permute_factors(exact_kron(*per_round), [2] * (2 * n), pair_to_party_major(n))


def append_round(m: ExactMatrix, n_rounds: int, last: ExactMatrix) -> ExactMatrix:
    """``m (x) last`` with the new round's A and B factors slotted in party-major order."""
    perm = list(range(n_rounds)) + [2 * n_rounds] + list(range(n_rounds, 2 * n_rounds)) + [2 * n_rounds + 1]
    return permute_factors(np.kron(m, last), [2] * (2 * n_rounds + 2), perm)


def rho_bits(bits: str) -> ExactMatrix:
    return rounds_product([RHO0 if b == "0" else RHO1 for b in bits])


def reverse_sorted(bits: str) -> str:
    """All ``1`` rounds first, then all ``0`` rounds."""
    return "1" * bits.count("1") + "0" * bits.count("0")


def sorting_permutation(bits: str) -> list[int]:
    """Round permutation (a product of disjoint transpositions) taking ``bits`` to its reverse-sorted form."""
    n, ones = len(bits), bits.count("1")
    misplaced_ones = [i for i in range(ones, n) if bits[i] == "1"]
    misplaced_zeros = [i for i in range(ones) if bits[i] == "0"]
    perm = list(range(n))
    for i, j in zip(misplaced_ones, misplaced_zeros):
        perm[i], perm[j] = j, i
    return perm


def apply_round_permutation(m: ExactMatrix, n_rounds: int, perm: Sequence[int]) -> ExactMatrix:
    """Conjugate by the unitary that permutes rounds identically on the A and B sides."""
    factor_perm = list(perm) + [n_rounds + p for p in perm]
    return permute_factors(m, [2] * (2 * n_rounds), factor_perm)


def round_permutation_unitary(n_rounds: int, perm: Sequence[int]) -> np.ndarray:
    """Explicit permutation matrix ``P`` with ``P M P^T == apply_round_permutation(M)``."""
    d = 4**n_rounds
    eye = np.eye(d)
    # columns of the unitary are the permuted basis vectors
    factor_perm = list(perm) + [n_rounds + p for p in perm]
    k = 2 * n_rounds
    return eye.reshape([2] * k + [d]).transpose(factor_perm + [k]).reshape(d, d)


@dataclass
class ConstraintCheck:
    name: str
    min_eigenvalue: float
    ok: bool
    exact_zero: bool = False


@dataclass
class DualCertificate:
    program: str
    n: int
    y: ExactMatrix
    q_blocks: dict[str, ExactMatrix]
    gamma: Fraction | None = None
    eta: Fraction | None = None
    states: dict[str, ExactMatrix] = field(default_factory=dict)
    priors: dict[str, Fraction] = field(default_factory=dict)

    def value(self) -> Fraction:
        tr = exact_trace(self.y)
        if self.gamma is None:
            return tr
        return (tr - (1 - self.eta) * self.gamma) / self.eta

    def constraint_matrices(self) -> dict[str, ExactMatrix]:
        """``Y - Q_s^TB - prior_s rho_s`` per outcome, plus the loss row if present."""
        out = {}
        for s, rho in self.states.items():
            out[f"Y-Q[{s}]^TB-rho[{s}]/{1 / self.priors[s]}"] = (
                self.y - pt(self.q_blocks[s], self.n) - rho * self.priors[s]
            )
        if self.gamma is not None:
            d = self.y.shape[0]
            out["4^n(Y-Q[null]^TB)-gamma*I"] = (
                (self.y - pt(self.q_blocks[NULL], self.n)) * d - exact_eye(d) * self.gamma
            )
        return out


def _check(name: str, m: ExactMatrix) -> ConstraintCheck:
    if is_zero(m):
        return ConstraintCheck(name, 0.0, True, True)
    lo = float(eigvalsh(to_float(m))[0])
    return ConstraintCheck(name, lo, lo >= -CERT_TOL)


def _check_rounds(n: int) -> None:
    if not 1 <= n <= MAX_CERT_ROUNDS:
        raise DomainError(f"certificates are built for 1 <= n <= {MAX_CERT_ROUNDS}, got {n}")


def single_round_certificate() -> DualCertificate:
    return parallel_certificate(1)


def q_all_ones(n: int) -> ExactMatrix:
    d = 4**n
    return exact_eye(d) / Fraction(6) ** n - rounds_product([pt(RHO1, 1)] * n) / 2**n


def q_sorted(ones: int, zeros: int) -> ExactMatrix:
    """``Q`` for ``1^ones 0^zeros``: extend the all-ones solution by ``rho_0^TB / 2`` per equal round."""
    if ones == 0:
        return exact_zeros(4 ** zeros)
    q = q_all_ones(ones)
    for k in range(zeros):
        q = append_round(q, ones + k, pt(RHO0, 1) / 2)
    return q


def q_general(bits: str) -> ExactMatrix:
    """``Q_s = P_s Q_T(s) P_s`` with ``P_s`` the round-sorting permutation."""
    n = len(bits)
    t = reverse_sorted(bits)
    base = q_sorted(t.count("1"), t.count("0"))
    return apply_round_permutation(base, n, sorting_permutation(bits))


def parallel_certificate(n: int) -> DualCertificate:
    _check_rounds(n)
    strings = ["".join(b) for b in itertools.product("01", repeat=n)]
    y = exact_eye(4**n) / Fraction(6) ** n
    q = {s: q_general(s) for s in strings}
    states = {s: rho_bits(s) for s in strings}
    priors = {s: Fraction(1, 2**n) for s in strings}
    return DualCertificate("parallel" if n > 1 else "single", n, y, q, states=states, priors=priors)


def as_fraction(x: float | Fraction) -> Fraction:
    """Exact rational for a decimal parameter (``0.1`` becomes ``1/10``)."""
    if isinstance(x, Fraction):
        return x
    return Fraction(repr(float(x)))


def lossy_certificate(n: int, eta: float | Fraction) -> DualCertificate:
    _check_rounds(n)
    eta_f = as_fraction(eta)
    if not 0 < eta_f <= 1:
        raise DomainError(f"eta must lie in (0, 1], got {eta}")
    base = parallel_certificate(n)
    q = dict(base.q_blocks)
    q[NULL] = exact_zeros(4**n)
    return DualCertificate(
        "lossy", n, base.y, q, gamma=Fraction(2, 3) ** n, eta=eta_f,
        states=base.states, priors=base.priors,
    )


def sym_antisym_certificates() -> tuple[DualCertificate, DualCertificate]:
    half = Fraction(1, 2)
    y1 = exact(
        [[2, 0, 0, 0], [0, 3, -1, 0], [0, -1, 3, 0], [0, 0, 0, 2]], Fraction(1, 12)
    )
    single = DualCertificate(
        "symasym", 1, y1, {"0": exact_zeros(4), "1": PHI_PLUS / 3},
        states={"0": RHO0, "1": RHO_ANTISYM}, priors={"0": half, "1": half},
    )
    r00 = rounds_product([RHO0, RHO0])
    r11 = rounds_product([RHO_ANTISYM, RHO_ANTISYM])
    y2 = (r00 * 9 + r11 * 8) / 18
    q1 = (rounds_product([pt(RHO0, 1) * 3, pt(RHO0, 1) * 3]) - rounds_product([pt(RHO_ANTISYM, 1)] * 2)) / 18
    doubled = DualCertificate(
        "symasym-doubled", 2, y2, {"0": exact_zeros(16), "1": q1},
        states={"0": r00, "1": r11}, priors={"0": half, "1": half},
    )
    return single, doubled


def certificate_for(program: str, n: int = 1, eta: float = 1.0) -> DualCertificate:
    if program in ("single", "discrim"):
        return single_round_certificate()
    if program == "parallel":
        return parallel_certificate(n)
    if program == "lossy":
        return lossy_certificate(n, eta)
    if program == "symasym":
        return sym_antisym_certificates()[0]
    if program == "symasym-doubled":
        return sym_antisym_certificates()[1]
    raise DomainError(f"no certificate for program {program!r}")


@dataclass
class VerificationReport:
    program: str
    n: int
    value: Fraction
    checks: list[ConstraintCheck]
    sdp_value: float | None = None

    @property
    def passed(self) -> bool:
        ok = all(c.ok for c in self.checks)
        if self.sdp_value is not None:
            ok = ok and abs(self.sdp_value - float(self.value)) <= 1e-6
        return ok

    @property
    def min_eigenvalue(self) -> float:
        return min(c.min_eigenvalue for c in self.checks)

    def to_dict(self) -> dict:
        return {
            "program": self.program,
            "n": self.n,
            "value": str(self.value),
            "value_float": float(self.value),
            "sdp_value": self.sdp_value,
            "passed": self.passed,
            "min_eigenvalue": self.min_eigenvalue,
            "constraints": [
                {"name": c.name, "min_eigenvalue": c.min_eigenvalue, "ok": c.ok, "exact_zero": c.exact_zero}
                for c in self.checks
            ],
        }


def verify(cert: DualCertificate, sdp_value: float | Callable[[], float] | None = None) -> VerificationReport:
    """Check every dual constraint and every ``Q`` for PSD-ness.

    ``sdp_value`` (a number or a thunk returning one) is compared with the
    certificate value at tolerance ``1e-6``.
    """
    d = cert.y.shape[0]
    if any(m.shape != (d, d) for m in cert.q_blocks.values()):
        raise StructuralError("certificate blocks have mismatched dimensions")
    herm = cert.y - cert.y.T
    if not is_zero(herm):
        raise StructuralError("Y must be Hermitian (real symmetric here)")
    checks = [_check(name, m) for name, m in cert.constraint_matrices().items()]
    checks += [_check(f"Q[{s}]>=0", q) for s, q in cert.q_blocks.items()]
    if callable(sdp_value):
        sdp_value = sdp_value()
    return VerificationReport(cert.program, cert.n, cert.value(), checks, sdp_value)


def induction_parts(bits: str) -> tuple[ExactMatrix, ExactMatrix, ExactMatrix]:
    """Split the ``(bits, 0)`` constraint into its two PSD summands.

    Returns ``(part_a, part_b, constraint)`` with ``part_a + part_b == constraint``.
    """
    n = len(bits)
    y_n = exact_eye(4**n) / Fraction(6) ** n
    inner = y_n - pt(q_general(bits), n) - rho_bits(bits) / 2**n
    part_a = append_round(inner, n, RHO0 / 2)
    part_b = append_round(y_n, n, (RHO1 * 2 - RHO0) / 6)
    y_next = exact_eye(4 ** (n + 1)) / Fraction(6) ** (n + 1)
    q_next = append_round(q_general(bits), n, pt(RHO0, 1) / 2)
    constraint = y_next - pt(q_next, n + 1) - rho_bits(bits + "0") / 2 ** (n + 1)
    return part_a, part_b, constraint


# ---------------------------------------------------------------- primal side


@dataclass
class Povm:
    """Labelled POVM elements on a bipartite space."""

    elements: dict[str, np.ndarray]
    n_rounds: int

    def completeness_error(self) -> float:
        total = sum(np.asarray(to_float(e) if e.dtype == object else e) for e in self.elements.values())
        return float(np.abs(total - np.eye(total.shape[0])).max())

    def min_eigenvalue(self, transpose: bool = False) -> float:
        lo = np.inf
        for e in self.elements.values():
            m = to_float(e) if e.dtype == object else np.asarray(e)
            if transpose:
                m = partial_transpose(m, [2] * (2 * self.n_rounds), Bipartition.party_major(self.n_rounds))
            lo = min(lo, float(eigvalsh(m)[0]))
        return lo

    def value(self, states: dict[str, ExactMatrix], priors: dict[str, Fraction], scale=1):
        """``scale * sum_s prior_s Tr[Pi_s rho_s]``, exact when all inputs are exact."""
        total = sum(
            (priors[s] * exact_trace(self.elements[s].dot(rho)) for s, rho in states.items()),
            Fraction(0),
        )
        return total * scale


def _complement(elements: dict[str, ExactMatrix], d: int) -> ExactMatrix:
    rest = exact_eye(d)
    for e in elements.values():
        rest = rest - e
    return rest


def single_round_povm() -> Povm:
    return Povm({"0": PI0_SINGLE, "1": exact_eye(4) - PI0_SINGLE}, 1)


def parallel_povm(n: int) -> Povm:
    _check_rounds(n)
    single = single_round_povm().elements
    return Povm(
        {"".join(bits): rounds_product([single[b] for b in bits])
         for bits in itertools.product("01", repeat=n)},
        n,
    )


def lossy_povm(n: int, eta: float | Fraction) -> Povm:
    eta_f = as_fraction(eta)
    base = parallel_povm(n).elements
    elements = {s: e * eta_f for s, e in base.items()}
    elements[NULL] = exact_eye(4**n) * (1 - eta_f)
    return Povm(elements, n)


def xor_povm() -> Povm:
    return Povm({"0": PI0_XOR, "1": exact_eye(4) - PI0_XOR}, 1)


def doubled_xor_povm() -> Povm:
    """Answer 'antisymmetric' only if both pairs show unequal computational outcomes."""
    unequal = exact_eye(4) - PI0_XOR
    pi1 = rounds_product([unequal, unequal])
    return Povm({"0": exact_eye(16) - pi1, "1": pi1}, 2)


def primal_witnesses(n: int = 2, eta: float | Fraction = Fraction(2, 5)) -> dict[str, tuple[Povm, Fraction]]:
    """Each POVM with its exact value (conditional on answering for the lossy one)."""
    single_states = {"0": RHO0, "1": RHO1}
    half = {"0": Fraction(1, 2), "1": Fraction(1, 2)}
    par = parallel_certificate(n)
    eta_f = as_fraction(eta)
    sym1, sym2 = sym_antisym_certificates()
    out = {}
    p = single_round_povm()
    out["single"] = (p, p.value(single_states, half))
    p = parallel_povm(n)
    out["parallel"] = (p, p.value(par.states, par.priors))
    p = lossy_povm(n, eta_f)
    out["lossy"] = (p, p.value(par.states, par.priors, 1 / eta_f))
    p = xor_povm()
    out["symasym"] = (p, p.value(sym1.states, sym1.priors))
    p = doubled_xor_povm()
    out["symasym-doubled"] = (p, p.value(sym2.states, sym2.priors))
    return out
