"""Builders for the discrimination programs of the SWAP-test protocol family.

Every program optimizes over PPT measurements: each POVM element and its
partial transpose on the B factors is PSD. Multi-round operators use the
party-major factor order ``(A_1..A_n, B_1..B_n)``.

Symmetry reductions (``basis``):

* ``"hermitian"``: no reduction, full complex Hermitian variables.
* ``"real"``: real symmetric variables (valid because all states are real).
* ``"phase"``: real and supported on :func:`excitation_mask`, valid because every
  state is invariant under ``(u_i (x) u_i)`` with ``u_i = diag(1, e^{i t_i})``.
* ``"twirl"``: span of products of per-round ``Pi_sym`` / ``Pi_asym``, valid because
  the states are invariant under independent ``U_i (x) U_i`` twirls per round.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ..errors import DomainError, StructuralError
from ..linalg import Bipartition, kron, pair_to_party_major, permute_factors
from ..states import (
    OverlapSet,
    doubled_rho,
    honest_p0,
    rho_beta,
    rho_string,
    rho_sym_antisym,
    sym_antisym_projectors,
)
from .problem import SdpProblem, Term, excitation_mask, functional_op, identity_op
from .solver import SdpSolution, SolverSettings, solve

NULL = "null"
MAX_PARALLEL_ROUNDS = 4
MAX_LOSSY_ROUNDS = 3


def bit_strings(n: int) -> list[str]:
    return ["".join(b) for b in itertools.product("01", repeat=n)]


def twirl_basis(n: int) -> np.ndarray:
    """Products of per-round ``Pi_sym`` / ``Pi_asym`` in party-major order."""
    ps, pa = sym_antisym_projectors()
    mats = []
    for choice in itertools.product((ps, pa), repeat=n):
        m = kron(*choice)
        mats.append(permute_factors(m, [2] * (2 * n), pair_to_party_major(n)))
    return np.array(mats, dtype=complex)


def resolve_basis(basis: str, n_rounds: int):
    """Translate a basis name into what :meth:`SdpProblem.add_matrix` accepts."""
    if basis == "auto":
        basis = "hermitian" if n_rounds <= 2 else ("phase" if n_rounds == 3 else "twirl")
    if basis in ("hermitian", "real"):
        return basis
    if basis == "phase":
        return excitation_mask(n_rounds)
    if basis == "twirl":
        return twirl_basis(n_rounds)
    raise DomainError(f"unknown basis {basis!r}")


def _pi_labels(labels: Sequence[str]) -> list[str]:
    return [f"P[{lab}]" for lab in labels]


def build_discrimination(
    states: Sequence[tuple[np.ndarray, float]],
    cut: Bipartition,
    factor_dims: Sequence[int] | None = None,
    labels: Sequence[str] | None = None,
    basis="hermitian",
) -> SdpProblem:
    """Maximize ``sum_k prior_k Tr[Pi_k rho_k]`` over complete PPT POVMs."""
    if len(states) < 2:
        raise DomainError("need at least two hypotheses")
    dim = np.asarray(states[0][0]).shape[0]
    if any(np.asarray(r).shape != (dim, dim) for r, _ in states):
        raise StructuralError("all states must have the same dimension")
    priors = np.array([float(q) for _, q in states])
    if np.any(priors < 0) or abs(priors.sum() - 1.0) > 1e-12:
        raise DomainError(f"priors must be a probability vector, got {priors}")
    if factor_dims is None:
        factor_dims = [2] * (len(cut.a_factors) + len(cut.b_factors))
    labels = list(labels) if labels is not None else [str(k) for k in range(len(states))]
    names = _pi_labels(labels)
    prob = SdpProblem("max")
    for name in names:
        prob.add_matrix(name, dim, basis=basis, factor_dims=factor_dims, ppt=cut)
    prob.add_equality("completeness", [Term(nm, identity_op()) for nm in names], np.eye(dim))
    prob.set_objective({nm: q * np.asarray(r) for nm, (r, q) in zip(names, states)})
    return prob


def build_parallel(n: int, basis: str = "auto") -> SdpProblem:
    """``n`` parallel rounds of the ``{0, 1}`` protocol (bit 0: equal inputs)."""
    if not 1 <= n <= MAX_PARALLEL_ROUNDS:
        raise DomainError(f"parallel repetition supports 1 <= n <= {MAX_PARALLEL_ROUNDS}, got {n}")
    strings = bit_strings(n)
    states = [(rho_string(s), 1.0 / 2**n) for s in strings]
    return build_discrimination(
        states, Bipartition.party_major(n), labels=strings, basis=resolve_basis(basis, n)
    )


def build_lossy_parallel(n: int, eta: float, basis: str = "auto") -> SdpProblem:
    """Parallel rounds with a loss outcome declared at rate exactly ``1 - eta``.

    The objective is the success probability conditioned on a conclusive answer.
    At ``eta = 1`` the loss equalities force ``Pi_null = 0`` (the states have full
    joint support), so that block is left out rather than pinned to a face.
    """
    if not 1 <= n <= MAX_LOSSY_ROUNDS:
        raise DomainError(f"lossy program supports 1 <= n <= {MAX_LOSSY_ROUNDS}, got {n}")
    if not 0.0 < eta <= 1.0:
        raise DomainError(f"eta must lie in (0, 1], got {eta}")
    strings = bit_strings(n)
    dim = 4**n
    cut = Bipartition.party_major(n)
    b = resolve_basis(basis, n)
    fd = [2] * (2 * n)
    prob = SdpProblem("max")
    names = _pi_labels(strings + ([NULL] if eta < 1.0 else []))
    for name in names:
        prob.add_matrix(name, dim, basis=b, factor_dims=fd, ppt=cut)
    prob.add_equality("completeness", [Term(nm, identity_op()) for nm in names], np.eye(dim))
    rhos = {s: rho_string(s) for s in strings}
    if eta < 1.0:
        for s in strings:
            prob.add_equality(f"loss[{s}]", [Term(names[-1], functional_op(rhos[s]))], [[1.0 - eta]])
    prob.set_objective({nm: rhos[s] / (2**n * eta) for nm, s in zip(names, strings)})
    return prob


@dataclass(frozen=True)
class MinDeltaProgram:
    problem: SdpProblem
    overlaps: OverlapSet
    eta: float

    def deltas(self, sol: SdpSolution) -> dict[float, float]:
        """``Delta_beta = p_beta - Tr[Pi_0 rho_beta] / eta`` at the returned POVM."""
        p0 = sol.primal_blocks["P[0]"]
        return {
            b: honest_p0(b) - float(np.trace(p0 @ rho_beta(b)).real) / self.eta
            for b in self.overlaps
        }


def build_min_delta(overlaps: OverlapSet | Sequence[float], eta: float = 1.0,
                    basis: str = "hermitian") -> MinDeltaProgram:
    """Minimize ``||Delta||_1`` over PPT POVMs ``{Pi_0, Pi_1, Pi_null}`` with loss rate ``1 - eta``.

    ``Pi_null`` is omitted at ``eta = 1``, where the loss equalities force it to zero.
    """
    if not isinstance(overlaps, OverlapSet):
        overlaps = OverlapSet(tuple(overlaps))
    if len(overlaps) < 2:
        raise DomainError("need at least two overlaps (one overlap is trivially matched)")
    if not 0.0 < eta <= 1.0:
        raise DomainError(f"eta must lie in (0, 1], got {eta}")
    cut = Bipartition.party_major(1)
    prob = SdpProblem("min")
    names = _pi_labels(["0", "1"] + ([NULL] if eta < 1.0 else []))
    for name in names:
        prob.add_matrix(name, 4, basis=resolve_basis(basis, 1), factor_dims=(2, 2), ppt=cut)
    prob.add_equality("completeness", [Term(nm, identity_op()) for nm in names], np.eye(4))
    obj = {}
    for i, b in enumerate(overlaps):
        rho = rho_beta(b)
        if eta < 1.0:
            prob.add_equality(f"loss[{b}]", [Term(names[2], functional_op(rho))], [[1.0 - eta]])
        t = f"t[{i}]"
        prob.add_scalar(t, nonneg=False)
        p = honest_p0(b)
        # t >= p - Tr[P0 rho]/eta  and  t >= Tr[P0 rho]/eta - p
        prob.add_cone(f"{t}>=+d", [[-p]], [Term(t, identity_op()), Term(names[0], functional_op(rho, 1 / eta))])
        prob.add_cone(f"{t}>=-d", [[p]], [Term(t, identity_op()), Term(names[0], functional_op(rho, -1 / eta))])
        obj[t] = np.ones((1, 1))
    prob.set_objective(obj)
    return MinDeltaProgram(prob, overlaps, eta)


def build_tradeoff_point(x: float, eta: float = 1.0, basis: str = "hermitian") -> SdpProblem:
    """Maximize the equal-input success ``y`` given orthogonal-input success ``x``."""
    if not 0.0 <= x <= 1.0:
        raise DomainError(f"x must lie in [0, 1], got {x}")
    if not 0.0 < eta <= 1.0:
        raise DomainError(f"eta must lie in (0, 1], got {eta}")
    cut = Bipartition.party_major(1)
    rho_eq, rho_ne = rho_beta(1.0), rho_beta(0.0)
    prob = SdpProblem("max")
    names = _pi_labels(["0", "1"] + ([NULL] if eta < 1.0 else []))
    for name in names:
        prob.add_matrix(name, 4, basis=resolve_basis(basis, 1), factor_dims=(2, 2), ppt=cut)
    prob.add_equality("completeness", [Term(nm, identity_op()) for nm in names], np.eye(4))
    if eta < 1.0:
        for lab, rho in (("eq", rho_eq), ("ne", rho_ne)):
            prob.add_equality(f"loss[{lab}]", [Term(names[2], functional_op(rho))], [[1.0 - eta]])
    prob.add_equality("x", [Term(names[1], functional_op(rho_ne, 1 / eta))], [[x]])
    prob.set_objective({names[0]: rho_eq / eta})
    return prob


def tradeoff_closed_form(x: float) -> float:
    return 1.0 - x / 2.0 if x <= 2.0 / 3.0 else 2.0 - 2.0 * x


def tradeoff_curve(x_grid: Sequence[float], eta: float = 1.0,
                   settings: SolverSettings = SolverSettings()) -> list[tuple[float, float]]:
    return [(float(x), solve(build_tradeoff_point(x, eta), settings).primal_value) for x in x_grid]


def build_sym_antisym(doubled: bool = False) -> SdpProblem:
    """Discriminate a random symmetric Bell state from the singlet (one or two pairs)."""
    rs, ra = rho_sym_antisym()
    if doubled:
        states = [(doubled_rho(rs), 0.5), (doubled_rho(ra), 0.5)]
        return build_discrimination(states, Bipartition.party_major(2), labels=["0", "1"])
    return build_discrimination([(rs, 0.5), (ra, 0.5)], Bipartition.party_major(1), labels=["0", "1"])


def build_subset_loss(n: int, subset: Sequence[int], basis: str = "auto") -> SdpProblem:
    """Answer conclusively on the rounds in ``subset`` only; success is judged there.

    Each outcome ``t`` on the subset faces the average of ``rho_s`` over the
    unanswered rounds' bits.
    """
    if not 1 <= n <= MAX_LOSSY_ROUNDS:
        raise DomainError(f"subset-loss program supports 1 <= n <= {MAX_LOSSY_ROUNDS}, got {n}")
    subset = sorted(set(int(i) for i in subset))
    if not subset or subset[0] < 0 or subset[-1] >= n:
        raise DomainError(f"subset {subset} must be a nonempty subset of rounds 0..{n - 1}")
    k = len(subset)
    groups: dict[str, np.ndarray] = {}
    for s in bit_strings(n):
        key = "".join(s[i] for i in subset)
        groups[key] = groups.get(key, 0) + rho_string(s) / 2 ** (n - k)
    keys = bit_strings(k)
    states = [(groups[t], 1.0 / 2**k) for t in keys]
    return build_discrimination(
        states, Bipartition.party_major(n), labels=keys, basis=resolve_basis(basis, n)
    )


def optimal_value(prob: SdpProblem, settings: SolverSettings = SolverSettings()) -> SdpSolution:
    sol = solve(prob, settings)
    if sol.status != "optimal":
        raise DomainError(f"solver finished with status {sol.status!r}")
    return sol
