"""States and projectors used by the protocol and its attacks."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DomainError, StructuralError
from .linalg import kron, permute_factors, pair_to_party_major, projector

SQRT_HALF = 1.0 / np.sqrt(2.0)

_BELL_ALIASES = {
    "phi+": "phi+", "Φ+": "phi+", "phi_plus": "phi+",
    "phi-": "phi-", "Φ−": "phi-", "Φ-": "phi-", "phi_minus": "phi-",
    "psi+": "psi+", "Ψ+": "psi+", "psi_plus": "psi+",
    "psi-": "psi-", "Ψ−": "psi-", "Ψ-": "psi-", "psi_minus": "psi-",
}
BELL_LABELS = ("phi+", "phi-", "psi+", "psi-")


def bell_state(which: str) -> np.ndarray:
    """Bell vector in the ``|00>, |01>, |10>, |11>`` basis."""
    key = _BELL_ALIASES.get(which)
    if key is None:
        raise DomainError(f"unknown Bell label {which!r}")
    s = SQRT_HALF
    return {
        "phi+": np.array([s, 0, 0, s], dtype=complex),
        "phi-": np.array([s, 0, 0, -s], dtype=complex),
        "psi+": np.array([0, s, s, 0], dtype=complex),
        "psi-": np.array([0, s, -s, 0], dtype=complex),
    }[key]


def bell_basis() -> np.ndarray:
    """Columns are the Bell vectors in ``BELL_LABELS`` order."""
    return np.stack([bell_state(w) for w in BELL_LABELS], axis=1)


def swap_operator(d: int = 2) -> np.ndarray:
    f = np.zeros((d * d, d * d))
    for i in range(d):
        for j in range(d):
            f[j * d + i, i * d + j] = 1.0
    return f


def sym_antisym_projectors() -> tuple[np.ndarray, np.ndarray]:
    """Projectors onto the symmetric (rank 3) and antisymmetric (rank 1) two-qubit subspaces."""
    f = swap_operator(2)
    eye = np.eye(4)
    return (eye + f) / 2, (eye - f) / 2


def honest_p0(beta: float) -> float:
    """SWAP-test probability of outcome 0 for inputs of overlap ``beta``."""
    return (1.0 + beta * beta) / 2.0


def rho_beta(beta: float) -> np.ndarray:
    """Haar-twirled two-qubit state of a pair with overlap ``beta``."""
    if not 0.0 <= beta <= 1.0:
        raise DomainError(f"overlap must lie in [0, 1], got {beta}")
    p_sym, p_asym = sym_antisym_projectors()
    b2 = beta * beta
    return (1 + b2) / 6 * p_sym + (1 - b2) / 2 * p_asym


def rho_sym_antisym() -> tuple[np.ndarray, np.ndarray]:
    """Uniform mixture of the three symmetric Bell states, and the singlet."""
    p_sym, p_asym = sym_antisym_projectors()
    return p_sym / 3, p_asym.copy()


def rho_string(bits: Sequence[int]) -> np.ndarray:
    """``rho_{s_1} ⊗ ... ⊗ rho_{s_n}`` in party-major factor order.

    Bit 0 means identical inputs (overlap 1), bit 1 orthogonal inputs (overlap 0).
    """
    bits = [int(b) for b in bits]
    if not bits or any(b not in (0, 1) for b in bits):
        raise DomainError(f"bad round string {bits}")
    per_round = {0: rho_beta(1.0), 1: rho_beta(0.0)}
    m = kron(*[per_round[b] for b in bits])
    n = len(bits)
    return permute_factors(m, [2] * (2 * n), pair_to_party_major(n))


@dataclass(frozen=True)
class OverlapSet:
    betas: tuple[float, ...]

    def __post_init__(self):
        betas = tuple(float(b) for b in self.betas)
        if not betas:
            raise DomainError("overlap set is empty")
        if any(not 0.0 <= b <= 1.0 for b in betas):
            raise DomainError(f"overlaps must lie in [0, 1]: {betas}")
        if len(set(betas)) != len(betas):
            raise DomainError(f"duplicate overlaps: {betas}")
        object.__setattr__(self, "betas", tuple(sorted(betas)))

    def __len__(self) -> int:
        return len(self.betas)

    def __iter__(self):
        return iter(self.betas)


@dataclass(frozen=True)
class StatePair:
    psi: np.ndarray
    phi: np.ndarray
    beta: float

    def overlap(self) -> float:
        return float(abs(np.vdot(self.psi, self.phi)))

    def density(self) -> np.ndarray:
        return projector(np.kron(self.psi, self.phi))


def haar_qubits(rng: np.random.Generator, size: int) -> np.ndarray:
    """``size`` Haar-random qubit vectors as rows."""
    z = rng.normal(size=(size, 2)) + 1j * rng.normal(size=(size, 2))
    return z / np.linalg.norm(z, axis=1, keepdims=True)


def sample_state_pairs(beta: float, size: int, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized fixed-overlap sampler; returns ``(psi, phi)`` arrays of shape ``(size, 2)``.

    ``psi`` is Haar-uniform and ``phi = beta psi + e^{i delta} sqrt(1-beta^2) psi_perp``
    with ``delta`` uniform, so ``<psi|phi> = beta`` exactly.
    """
    if not 0.0 <= beta <= 1.0:
        raise DomainError(f"overlap must lie in [0, 1], got {beta}")
    psi = haar_qubits(rng, size)
    perp = np.stack([-psi[:, 1].conj(), psi[:, 0].conj()], axis=1)
    delta = rng.uniform(0.0, 2 * np.pi, size=size)
    phi = beta * psi + (np.exp(1j * delta) * np.sqrt(1.0 - beta * beta))[:, None] * perp
    return psi, phi


def sample_state_pair(beta: float, rng: np.random.Generator) -> StatePair:
    psi, phi = sample_state_pairs(beta, 1, rng)
    return StatePair(psi[0], phi[0], float(beta))


def mub_bases() -> dict[str, tuple[np.ndarray, np.ndarray]]:
    """Eigenbases of Z, X and Y."""
    s = SQRT_HALF
    return {
        "Z": (np.array([1, 0], dtype=complex), np.array([0, 1], dtype=complex)),
        "X": (np.array([s, s], dtype=complex), np.array([s, -s], dtype=complex)),
        "Y": (np.array([s, 1j * s], dtype=complex), np.array([s, -1j * s], dtype=complex)),
    }


def mub_equal_projector() -> np.ndarray:
    """Average over the three bases of the projectors onto equal outcome pairs."""
    acc = np.zeros((4, 4), dtype=complex)
    for e0, e1 in mub_bases().values():
        for e in (e0, e1):
            acc += projector(np.kron(e, e))
    return acc / 3


def doubled_rho(single: np.ndarray) -> np.ndarray:
    """Two copies of a two-qubit state in party-major order ``(A_1, A_2, B_1, B_2)``."""
    if single.shape != (4, 4):
        raise StructuralError("expected a two-qubit operator")
    return permute_factors(np.kron(single, single), [2, 2, 2, 2], pair_to_party_major(2))
