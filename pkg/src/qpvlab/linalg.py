"""Dense complex-matrix kernel.

Operators are plain ``numpy`` arrays. Tensor structure is passed explicitly as
a sequence of subsystem dimensions (``dims``); for multi-round objects the
factor order is party-major, ``(A_1, ..., A_n, B_1, ..., B_n)``.

The Hermitian eigensolver is self-contained (Householder reduction to a real
tridiagonal matrix followed by implicit-shift QL) so that every PSD verdict on
a certificate is independent of LAPACK.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import reduce
from typing import Iterable, NamedTuple, Sequence

import numpy as np

from .errors import DomainError, StructuralError

HERMITIAN_TOL = 1e-12
PSD_TOL = 1e-9


@dataclass(frozen=True)
class Bipartition:
    """Split of tensor factors between party A and party B."""

    a_factors: tuple[int, ...]
    b_factors: tuple[int, ...]

    def __post_init__(self):
        if not self.a_factors or not self.b_factors:
            raise StructuralError("both parties must own at least one factor")
        if set(self.a_factors) & set(self.b_factors):
            raise StructuralError("a factor cannot belong to both parties")

    @classmethod
    def party_major(cls, n_rounds: int) -> "Bipartition":
        """A owns factors ``0..n-1``, B owns ``n..2n-1``."""
        return cls(tuple(range(n_rounds)), tuple(range(n_rounds, 2 * n_rounds)))

    def validate(self, n_factors: int) -> None:
        covered = sorted(self.a_factors + self.b_factors)
        if covered != list(range(n_factors)):
            raise StructuralError(
                f"bipartition {self} does not cover factors 0..{n_factors - 1} exactly once"
            )


def _check_dims(m: np.ndarray, dims: Sequence[int] | None) -> tuple[int, ...]:
    if dims is None:
        raise StructuralError("operation needs the tensor factor dimensions")
    dims = tuple(int(d) for d in dims)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise StructuralError(f"expected a square matrix, got shape {m.shape}")
    if any(d < 1 for d in dims) or math.prod(dims) != m.shape[0]:
        raise StructuralError(f"factor dims {dims} do not multiply to {m.shape[0]}")
    return dims


def kron(*mats: np.ndarray) -> np.ndarray:
    """Kronecker product of one or more operands (left to right)."""
    if not mats:
        raise StructuralError("kron needs at least one operand")
    return reduce(np.kron, mats)


def kron_power(m: np.ndarray, n: int) -> np.ndarray:
    if n < 0:
        raise DomainError("negative tensor power")
    if n == 0:
        return np.ones((1, 1), dtype=m.dtype)
    return reduce(np.kron, [m] * n)


def partial_transpose(
    m: np.ndarray, dims: Sequence[int] | None, sys: Bipartition | Iterable[int]
) -> np.ndarray:
    """Transpose the factors in ``sys`` (or the B side of a bipartition).

    Works for object arrays too, so exact rational matrices keep their type.
    """
    dims = _check_dims(m, dims)
    if isinstance(sys, Bipartition):
        sys.validate(len(dims))
        targets = set(sys.b_factors)
    else:
        targets = set(int(i) for i in sys)
    if not targets <= set(range(len(dims))):
        raise StructuralError(f"factor indices {sorted(targets)} out of range")
    k = len(dims)
    t = m.reshape(dims + dims)
    axes = list(range(2 * k))
    for i in targets:
        axes[i], axes[k + i] = axes[k + i], axes[i]
    return t.transpose(axes).reshape(m.shape)


def partial_trace(m: np.ndarray, dims: Sequence[int] | None, keep: Iterable[int]) -> np.ndarray:
    """Trace out every factor not listed in ``keep``; kept factors stay in order."""
    dims = _check_dims(m, dims)
    keep = sorted(set(int(i) for i in keep))
    if not keep:
        raise StructuralError("partial_trace needs a nonempty set of kept factors")
    if keep[-1] >= len(dims) or keep[0] < 0:
        raise StructuralError(f"kept factors {keep} out of range")
    k = len(dims)
    t = m.reshape(dims + dims)
    letters = [chr(ord("a") + i) for i in range(2 * k)]
    row = letters[:k]
    col = [letters[k + i] if i in keep else letters[i] for i in range(k)]
    out = [row[i] for i in keep] + [col[i] for i in keep]
    spec = "".join(row) + "".join(col) + "->" + "".join(out)
    d = math.prod(dims[i] for i in keep)
    return np.einsum(spec, t).reshape(d, d)


def permute_factors(m: np.ndarray, dims: Sequence[int] | None, perm: Sequence[int]) -> np.ndarray:
    """Reorder tensor factors: output factor ``j`` is input factor ``perm[j]``."""
    dims = _check_dims(m, dims)
    k = len(dims)
    perm = [int(p) for p in perm]
    if sorted(perm) != list(range(k)):
        raise StructuralError(f"{perm} is not a permutation of {k} factors")
    t = m.reshape(dims + dims)
    return t.transpose(perm + [k + p for p in perm]).reshape(m.shape)


def pair_to_party_major(n_rounds: int) -> list[int]:
    """Permutation taking ``(A_1,B_1,...,A_n,B_n)`` to ``(A_1..A_n,B_1..B_n)``."""
    return [2 * i for i in range(n_rounds)] + [2 * i + 1 for i in range(n_rounds)]


def hermiticity_error(m: np.ndarray) -> float:
    return float(np.max(np.abs(m - m.conj().T))) if m.size else 0.0


def is_hermitian(m: np.ndarray, tol: float = HERMITIAN_TOL) -> bool:
    return m.ndim == 2 and m.shape[0] == m.shape[1] and hermiticity_error(m) <= tol


def _as_hermitian(m: np.ndarray, tol: float) -> np.ndarray:
    m = np.asarray(m)
    if m.dtype == object:
        m = m.astype(complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise StructuralError(f"expected a square matrix, got shape {m.shape}")
    scale = max(1.0, float(np.max(np.abs(m)))) if m.size else 1.0
    if hermiticity_error(m) > tol * scale:
        raise DomainError(f"matrix is not Hermitian within {tol:g}")
    m = m.astype(complex)
    return (m + m.conj().T) / 2


def _tridiagonalize(a: np.ndarray, want_vectors: bool):
    """Householder reduction of a Hermitian matrix to a real symmetric tridiagonal.

    Returns ``(diag, offdiag, Q)`` with ``a = Q T Q^dagger``.
    """
    a = a.copy()
    n = a.shape[0]
    q = np.eye(n, dtype=complex) if want_vectors else None
    for k in range(n - 2):
        x = a[k + 1 :, k]
        norm = np.linalg.norm(x)
        if norm == 0.0:
            continue
        phase = x[0] / abs(x[0]) if x[0] != 0 else 1.0
        alpha = -phase * norm
        v = x.copy()
        v[0] -= alpha
        vnorm = np.linalg.norm(v)
        if vnorm == 0.0:
            continue
        v /= vnorm
        sub = a[k + 1 :, k + 1 :]
        w = sub @ v
        c = np.vdot(v, w).real
        u = w - c * v
        sub -= 2.0 * (np.outer(v, u.conj()) + np.outer(u, v.conj()))
        a[k + 1 :, k] = 0.0
        a[k, k + 1 :] = 0.0
        a[k + 1, k] = alpha
        a[k, k + 1] = np.conj(alpha)
        if want_vectors:
            blk = q[:, k + 1 :]
            blk -= 2.0 * np.outer(blk @ v, v.conj())
    diag = a.diagonal().real.copy()
    off = a.diagonal(-1).copy()
    # unitary diagonal phase making the off-diagonal real and nonnegative
    phases = np.ones(n, dtype=complex)
    for k in range(n - 1):
        mag = abs(off[k])
        if mag > 0:
            phases[k + 1] = phases[k] * off[k] / mag
        else:
            phases[k + 1] = phases[k]
        off[k] = mag
    if want_vectors:
        q = q * phases[np.newaxis, :]
    return diag, off.real.copy(), q


def _tridiagonal_ql(d: list[float], e: list[float], z: np.ndarray | None) -> list[float]:
    """Implicit-shift QL on a symmetric tridiagonal matrix (in place)."""
    n = len(d)
    e = list(e) + [0.0]
    eps = np.finfo(float).eps
    # absolute floor eps*||T||: blocks of (near-)zero diagonal still deflate, at
    # the backward error the Householder stage already incurs
    floor = eps * max([abs(x) for x in d] + [abs(x) for x in e] + [np.finfo(float).tiny])
    for l in range(n):
        it = 0
        while True:
            m = l
            while m < n - 1:
                dd = abs(d[m]) + abs(d[m + 1])
                if abs(e[m]) <= max(eps * dd, floor):
                    break
                m += 1
            if m == l:
                break
            it += 1
            if it > 60:
                raise DomainError("tridiagonal QL iteration did not converge")
            g = (d[l + 1] - d[l]) / (2.0 * e[l])
            r = math.hypot(g, 1.0)
            g = d[m] - d[l] + e[l] / (g + math.copysign(r, g))
            s = c = 1.0
            p = 0.0
            i = m - 1
            underflow = False
            while i >= l:
                f = s * e[i]
                b = c * e[i]
                r = math.hypot(f, g)
                e[i + 1] = r
                if r == 0.0:
                    d[i + 1] -= p
                    e[m] = 0.0
                    underflow = True
                    break
                s = f / r
                c = g / r
                g = d[i + 1] - p
                r = (d[i] - g) * s + 2.0 * c * b
                p = s * r
                d[i + 1] = g + p
                g = c * r - b
                if z is not None:
                    f_col = z[:, i + 1].copy()
                    z[:, i + 1] = s * z[:, i] + c * f_col
                    z[:, i] = c * z[:, i] - s * f_col
                i -= 1
            if underflow:
                continue
            d[l] -= p
            e[l] = g
            e[m] = 0.0
    return d


def eigh(m: np.ndarray, tol: float = HERMITIAN_TOL) -> tuple[np.ndarray, np.ndarray]:
    """Eigen-decomposition of a Hermitian matrix.

    Returns ascending real eigenvalues and a unitary whose columns are the
    matching eigenvectors. Raises :class:`DomainError` on non-Hermitian input.
    """
    a = _as_hermitian(m, tol)
    n = a.shape[0]
    if n == 0:
        return np.zeros(0), np.zeros((0, 0), dtype=complex)
    diag, off, q = _tridiagonalize(a, want_vectors=True)
    z = np.eye(n)
    vals = _tridiagonal_ql(diag.tolist(), off.tolist(), z)
    vecs = q @ z
    order = np.argsort(vals, kind="stable")
    return np.asarray(vals)[order], vecs[:, order]


def eigvalsh(m: np.ndarray, tol: float = HERMITIAN_TOL) -> np.ndarray:
    a = _as_hermitian(m, tol)
    if a.shape[0] == 0:
        return np.zeros(0)
    diag, off, _ = _tridiagonalize(a, want_vectors=False)
    return np.sort(np.asarray(_tridiagonal_ql(diag.tolist(), off.tolist(), None)))


class PsdCheck(NamedTuple):
    ok: bool
    min_eigenvalue: float

    def __bool__(self) -> bool:
        return self.ok


def is_psd(m: np.ndarray, tol: float = PSD_TOL) -> PsdCheck:
    """PSD test with the smallest eigenvalue as witness."""
    vals = eigvalsh(m)
    lo = float(vals[0]) if vals.size else 0.0
    return PsdCheck(lo >= -tol, lo)


def projector(vec: np.ndarray) -> np.ndarray:
    v = np.asarray(vec, dtype=complex).reshape(-1)
    return np.outer(v, v.conj())


def to_json(m: np.ndarray, factor_dims: Sequence[int] | None = None) -> dict:
    """Matrix exchange format ``{dims, factor_dims, entries}``; entries row-major ``[re, im]``."""
    m = np.asarray(m, dtype=complex)
    if factor_dims is not None:
        _check_dims(m, factor_dims)
    return {
        "dims": list(m.shape),
        "factor_dims": None if factor_dims is None else [int(d) for d in factor_dims],
        "entries": [[float(z.real), float(z.imag)] for z in m.reshape(-1)],
    }


def from_json(obj: dict) -> tuple[np.ndarray, tuple[int, ...] | None]:
    rows, cols = (int(x) for x in obj["dims"])
    entries = obj["entries"]
    if len(entries) != rows * cols:
        raise StructuralError("entry count does not match dims")
    m = np.array([complex(re, im) for re, im in entries], dtype=complex).reshape(rows, cols)
    fd = obj.get("factor_dims")
    if fd is not None:
        fd = _check_dims(m, fd)
    return m, fd
