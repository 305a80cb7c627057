"""Modeling layer: matrix variables, affine PSD cones and linear equalities.

A problem is compiled into the linear-matrix-inequality form consumed by the
interior-point engine::

    maximize   c . y
    subject to F0_j + sum_i y_i F_ij  >= 0   for every cone block j
               G y = h

where ``y`` collects the real coordinates of every matrix variable in its
chosen basis. Complex Hermitian blocks are mapped to real symmetric ones via
``H = R + iI -> [[R, -I], [I, R]]``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from ..errors import DomainError, StructuralError
from ..linalg import Bipartition, partial_transpose

LinearOp = Callable[[np.ndarray], np.ndarray]

#: equality rows whose singular value falls below this (relative) are dropped as redundant
RANK_TOL = 1e-10


def hermitian_basis(d: int, real_only: bool = False) -> np.ndarray:
    """Orthonormal (under ``Re Tr(A^dag B)``) basis of ``d x d`` Hermitian matrices."""
    mats = []
    s = 1.0 / np.sqrt(2.0)
    for j in range(d):
        e = np.zeros((d, d), dtype=complex)
        e[j, j] = 1.0
        mats.append(e)
    for j in range(d):
        for k in range(j + 1, d):
            e = np.zeros((d, d), dtype=complex)
            e[j, k] = e[k, j] = s
            mats.append(e)
            if not real_only:
                e = np.zeros((d, d), dtype=complex)
                e[j, k] = -1j * s
                e[k, j] = 1j * s
                mats.append(e)
    return np.array(mats)


def mask_basis(mask: np.ndarray) -> np.ndarray:
    """Real symmetric basis supported on a symmetric boolean pattern."""
    mask = np.asarray(mask, dtype=bool)
    if mask.shape[0] != mask.shape[1] or not np.array_equal(mask, mask.T):
        raise StructuralError("support mask must be square and symmetric")
    d = mask.shape[0]
    s = 1.0 / np.sqrt(2.0)
    mats = []
    for j in range(d):
        for k in range(j, d):
            if not mask[j, k]:
                continue
            e = np.zeros((d, d), dtype=complex)
            if j == k:
                e[j, j] = 1.0
            else:
                e[j, k] = e[k, j] = s
            mats.append(e)
    return np.array(mats)


def orthonormalize(mats: Sequence[np.ndarray]) -> np.ndarray:
    """Orthonormal basis for the real span of Hermitian matrices."""
    arr = np.array([np.asarray(m, dtype=complex) for m in mats])
    k, d, _ = arr.shape
    flat = np.concatenate([arr.real.reshape(k, -1), arr.imag.reshape(k, -1)], axis=1)
    u, sv, vt = np.linalg.svd(flat, full_matrices=False)
    r = int(np.sum(sv > RANK_TOL * max(1.0, sv[0])))
    v = vt[:r]
    out = v[:, : d * d] + 1j * v[:, d * d :]
    out = out.reshape(r, d, d)
    return (out + out.conj().transpose(0, 2, 1)) / 2


def excitation_mask(n_rounds: int) -> np.ndarray:
    """Support pattern invariant under per-round phases ``u_i (x) u_i``.

    Entry ``(r, c)`` survives iff, in every round, the number of ``1`` bits among
    ``(A_i, B_i)`` agrees between row and column (party-major qubit ordering).
    """
    d = 4**n_rounds
    idx = np.arange(d)
    counts = []
    for i in range(n_rounds):
        a_bit = (idx >> (2 * n_rounds - 1 - i)) & 1
        b_bit = (idx >> (n_rounds - 1 - i)) & 1
        counts.append(a_bit + b_bit)
    counts = np.stack(counts, axis=1)
    return np.all(counts[:, None, :] == counts[None, :, :], axis=2)


@dataclass
class MatrixVar:
    label: str
    dim: int
    basis: np.ndarray
    factor_dims: tuple[int, ...] | None = None
    ppt: Bipartition | None = None

    @property
    def size(self) -> int:
        return self.basis.shape[0]

    def assemble(self, coords: np.ndarray) -> np.ndarray:
        return np.tensordot(coords, self.basis, axes=1)


@dataclass
class Term:
    """Linear image ``op(X_var)``; ``op`` must be real-linear."""

    var: str
    op: LinearOp


@dataclass
class Cone:
    label: str
    dim: int
    const: np.ndarray
    terms: list[Term]


@dataclass
class Equality:
    label: str
    terms: list[Term]
    rhs: np.ndarray


def identity_op(scale: float = 1.0) -> LinearOp:
    return lambda x: scale * x


def pt_op(dims: Sequence[int], cut: Bipartition, scale: float = 1.0) -> LinearOp:
    dims = tuple(dims)
    return lambda x: scale * partial_transpose(x, dims, cut)


def functional_op(coeff: np.ndarray, scale: float = 1.0) -> LinearOp:
    """``X -> [[scale * Re Tr(coeff X)]]``."""
    c = np.asarray(coeff, dtype=complex)
    return lambda x: np.array([[scale * np.sum(c.T * x).real]], dtype=complex)


@dataclass
class SdpProblem:
    """Semidefinite program over Hermitian matrix variables."""

    sense: str = "max"
    variables: dict[str, MatrixVar] = field(default_factory=dict)
    cones: list[Cone] = field(default_factory=list)
    equalities: list[Equality] = field(default_factory=list)
    objective: list[tuple[str, np.ndarray]] = field(default_factory=list)
    objective_const: float = 0.0

    def __post_init__(self):
        if self.sense not in ("max", "min"):
            raise DomainError(f"sense must be 'max' or 'min', got {self.sense!r}")

    def add_matrix(
        self,
        label: str,
        dim: int,
        basis="hermitian",
        factor_dims: Sequence[int] | None = None,
        ppt: Bipartition | None = None,
        psd: bool = True,
    ) -> MatrixVar:
        """Add a matrix variable, constrained PSD (and PPT across ``ppt``) by default.

        ``basis`` is ``'hermitian'``, ``'real'``, a boolean support mask, or an
        explicit list of Hermitian matrices spanning the allowed subspace.
        """
        if label in self.variables:
            raise StructuralError(f"duplicate variable {label!r}")
        if isinstance(basis, str):
            if basis not in ("hermitian", "real"):
                raise DomainError(f"unknown basis {basis!r}")
            mats = hermitian_basis(dim, real_only=basis == "real")
        else:
            arr = np.asarray(basis)
            if arr.dtype == bool:
                mats = mask_basis(arr)
            else:
                mats = orthonormalize(arr)
        if mats.shape[1:] != (dim, dim):
            raise StructuralError(f"basis for {label!r} has wrong shape {mats.shape}")
        if ppt is not None and factor_dims is None:
            raise StructuralError("a PPT variable needs its factor dimensions")
        var = MatrixVar(label, dim, mats, tuple(factor_dims) if factor_dims else None, ppt)
        self.variables[label] = var
        if psd:
            self.add_cone(f"{label}>=0", np.zeros((dim, dim)), [Term(label, identity_op())])
        if ppt is not None:
            self.add_cone(
                f"{label}^TB>=0", np.zeros((dim, dim)), [Term(label, pt_op(factor_dims, ppt))]
            )
        return var

    def add_scalar(self, label: str, nonneg: bool = True) -> MatrixVar:
        """Real scalar, stored as a ``1 x 1`` block."""
        return self.add_matrix(label, 1, basis="real", psd=nonneg)

    def add_cone(self, label: str, const: np.ndarray, terms: Sequence[Term]) -> None:
        const = np.asarray(const, dtype=complex)
        self._check_terms(terms)
        self.cones.append(Cone(label, const.shape[0], const, list(terms)))

    def add_equality(self, label: str, terms: Sequence[Term], rhs) -> None:
        rhs = np.atleast_2d(np.asarray(rhs, dtype=complex))
        self._check_terms(terms)
        self.equalities.append(Equality(label, list(terms), rhs))

    def set_objective(self, coeffs: dict[str, np.ndarray], const: float = 0.0) -> None:
        """Objective ``sum_v Re Tr(C_v X_v) + const``."""
        self._check_terms([Term(v, identity_op()) for v in coeffs])
        self.objective = [(v, np.asarray(c, dtype=complex)) for v, c in coeffs.items()]
        self.objective_const = float(const)

    def _check_terms(self, terms: Sequence[Term]) -> None:
        for t in terms:
            if t.var not in self.variables:
                raise StructuralError(f"unknown variable {t.var!r}")

    @property
    def n_coords(self) -> int:
        return sum(v.size for v in self.variables.values())

    def offsets(self) -> dict[str, int]:
        out, k = {}, 0
        for label, v in self.variables.items():
            out[label] = k
            k += v.size
        return out

    def split(self, y: np.ndarray) -> dict[str, np.ndarray]:
        """Assemble each variable from the stacked coordinate vector."""
        off = self.offsets()
        return {
            lab: v.assemble(y[off[lab] : off[lab] + v.size]) for lab, v in self.variables.items()
        }

    def compile(self) -> "CompiledProblem":
        return compile_problem(self)


@dataclass
class Block:
    """One real symmetric LMI block ``F0 + sum_t y[idx[t]] A[t]``."""

    cone: int
    rows: np.ndarray
    idx: np.ndarray
    f0: np.ndarray
    mats: np.ndarray


@dataclass
class CompiledProblem:
    c: np.ndarray
    blocks: list[Block]
    g: np.ndarray
    h: np.ndarray
    sign: float
    const: float
    cone_shapes: list[tuple[int, bool]]
    raw_equality_rows: int


def _term_images(prob: SdpProblem, terms: Sequence[Term], off: dict[str, int], m: int, dim_hint=None):
    """Map each coordinate to the summed image of all terms; returns {coord: matrix}."""
    images: dict[int, np.ndarray] = {}
    for t in terms:
        var = prob.variables[t.var]
        for k in range(var.size):
            img = np.asarray(t.op(var.basis[k]), dtype=complex)
            gi = off[t.var] + k
            if gi in images:
                images[gi] = images[gi] + img
            else:
                images[gi] = img
    return images


def _embed(m: np.ndarray, complex_block: bool) -> np.ndarray:
    if not complex_block:
        return m.real.copy()
    re, im = m.real, m.imag
    return np.block([[re, -im], [im, re]])


def _components(pattern: np.ndarray) -> list[np.ndarray]:
    """Connected components of a symmetric sparsity pattern (union-find)."""
    n = pattern.shape[0]
    parent = list(range(n))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    rows, cols = np.nonzero(np.triu(pattern, 1))
    for a, b in zip(rows.tolist(), cols.tolist()):
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[ra] = rb
    groups: dict[int, list[int]] = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(i)
    return [np.array(g) for g in groups.values()]


def compile_problem(prob: SdpProblem) -> CompiledProblem:
    off = prob.offsets()
    m = prob.n_coords
    if m == 0:
        raise StructuralError("problem has no variables")
    sign = 1.0 if prob.sense == "max" else -1.0

    c = np.zeros(m)
    for lab, coeff in prob.objective:
        var = prob.variables[lab]
        vals = np.einsum("ij,kji->k", coeff, var.basis).real
        c[off[lab] : off[lab] + var.size] += vals
    c *= sign

    blocks: list[Block] = []
    shapes: list[tuple[int, bool]] = []
    for ci, cone in enumerate(prob.cones):
        images = _term_images(prob, cone.terms, off, m)
        idx = np.array(sorted(images), dtype=int)
        stack = [images[i] for i in idx]
        cplx = bool(np.abs(cone.const.imag).max(initial=0.0) > 0.0) or any(
            np.abs(s.imag).max(initial=0.0) > 0.0 for s in stack
        )
        f0 = _embed(cone.const, cplx)
        mats = np.array([_embed(s, cplx) for s in stack]) if stack else np.zeros((0,) + f0.shape)
        shapes.append((cone.dim, cplx))
        pattern = (f0 != 0) | np.any(mats != 0, axis=0) if len(mats) else f0 != 0
        pattern = pattern | pattern.T
        np.fill_diagonal(pattern, True)
        for comp in _components(pattern):
            sub = mats[:, comp][:, :, comp]
            live = np.any(sub.reshape(len(idx), -1) != 0, axis=1) if len(idx) else np.zeros(0, bool)
            blocks.append(Block(ci, comp, idx[live], f0[np.ix_(comp, comp)], sub[live]))

    rows, rhs = [], []
    for eq in prob.equalities:
        images = _term_images(prob, eq.terms, off, m)
        shape = eq.rhs.shape
        dense = np.zeros((m, 2 * shape[0] * shape[1]))
        for gi, img in images.items():
            if img.shape != shape:
                raise StructuralError(f"equality {eq.label!r}: image shape {img.shape} != {shape}")
            dense[gi] = np.concatenate([img.real.ravel(), img.imag.ravel()])
        r = np.concatenate([eq.rhs.real.ravel(), eq.rhs.imag.ravel()])
        rows.append(dense.T)
        rhs.append(r)
    if rows:
        g_raw = np.vstack(rows)
        h_raw = np.concatenate(rhs)
        g, h = _reduce_equalities(g_raw, h_raw)
        n_raw = g_raw.shape[0]
    else:
        g, h, n_raw = np.zeros((0, m)), np.zeros(0), 0
    return CompiledProblem(c, blocks, g, h, sign, prob.objective_const, shapes, n_raw)


def _reduce_equalities(g: np.ndarray, h: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Replace ``G y = h`` by an equivalent system with orthonormal independent rows."""
    nz = np.any(g != 0, axis=1)
    if np.any(np.abs(h[~nz]) > RANK_TOL):
        raise DomainError("equality constraints are inconsistent (0 = nonzero)")
    g, h = g[nz], h[nz]
    if g.shape[0] == 0:
        return np.zeros((0, g.shape[1])), np.zeros(0)
    u, sv, vt = np.linalg.svd(g, full_matrices=False)
    r = int(np.sum(sv > RANK_TOL * sv[0]))
    proj = u[:, :r].T @ h
    resid = h - u[:, :r] @ proj
    if np.linalg.norm(resid) > 1e-8 * max(1.0, np.linalg.norm(h)):
        raise DomainError("equality constraints are inconsistent")
    # G = U S V^T  =>  (S_r^-1 U_r^T) G = V_r^T
    return vt[:r], proj / sv[:r]
