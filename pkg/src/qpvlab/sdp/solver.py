"""Primal-dual interior-point method for small dense SDPs in LMI form.

Solves ``max c.y  s.t.  S_j = F0_j + sum_i y_i F_ij >= 0,  G y = h`` together
with its dual ``min sum_j <F0_j, Z_j> + h.w  s.t.  F_ij-adjoint(Z) - G^T w = -c``
(``Z_j >= 0``). Search directions use the HKM linearisation ``dZ S + Z dS = R``
with a Mehrotra predictor-corrector; the Schur system is solved together with
the equality rows as a symmetric saddle-point system.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from .problem import CompiledProblem

STATUS_OPTIMAL = "optimal"
STATUS_INFEASIBLE = "infeasible"
STATUS_UNBOUNDED = "unbounded"
STATUS_MAX_ITER = "max-iterations"
STATUS_STALLED = "stalled"


@dataclass(frozen=True)
class SolverSettings:
    max_iter: int = 200
    step_fraction: float = 0.98
    feas_tol: float = 1e-9
    gap_tol: float = 1e-9
    #: a stalled run still counts as optimal if its best iterate meets this
    accept_tol: float = 1e-8
    stall_iterations: int = 5
    divergence: float = 1e10
    verbose: bool = False


@dataclass
class RawResult:
    y: np.ndarray
    w: np.ndarray
    s: list[np.ndarray]
    z: list[np.ndarray]
    pobj: float
    dobj: float
    status: str
    iterations: int
    #: per iterate ``(pobj, dobj, primal infeasibility, dual infeasibility)``
    history: list[tuple[float, float, float, float]] = field(default_factory=list)


def _apply(blocks, y):
    """Linear part ``sum_i y_i F_ij`` for each block."""
    return [np.tensordot(y[b.idx], b.mats, axes=1) for b in blocks]


def _adjoint(blocks, mats_z, m):
    out = np.zeros(m)
    for b, z in zip(blocks, mats_z):
        np.add.at(out, b.idx, np.einsum("kab,ab->k", b.mats, z))
    return out


def _sym(a):
    return (a + a.T) / 2


def _max_step(x_chol, dx):
    """Largest ``t`` with ``X + t dX >= 0`` given the Cholesky factor of ``X``."""
    linv_dx = sla.solve_triangular(x_chol, dx, lower=True)
    m = sla.solve_triangular(x_chol, linv_dx.T, lower=True)
    lo = np.linalg.eigvalsh(_sym(m))[0]
    return np.inf if lo >= 0 else -1.0 / lo


def solve_lmi(prob: CompiledProblem, settings: SolverSettings = SolverSettings()) -> RawResult:
    blocks = prob.blocks
    c, g, h = prob.c, prob.g, prob.h
    m, p = c.size, h.size
    dims = [b.f0.shape[0] for b in blocks]
    nu = float(sum(dims))

    data_norm = max([1.0] + [float(np.abs(b.mats).max(initial=0.0)) for b in blocks])
    f0_norm = max([1.0] + [float(np.linalg.norm(b.f0)) for b in blocks])
    c_norm = 1.0 + float(np.linalg.norm(c))
    h_norm = 1.0 + float(np.linalg.norm(h))
    xi = max(10.0, float(np.sqrt(max(dims, default=1))) * max(f0_norm, c_norm) / data_norm)

    y = np.zeros(m)
    w = np.zeros(p)
    s = [xi * np.eye(d) for d in dims]
    z = [xi * np.eye(d) for d in dims]
    history: list[tuple[float, float, float, float]] = []
    status = STATUS_MAX_ITER
    it = 0
    best = (np.inf, 0, y, w, s, z)

    for it in range(1, settings.max_iter + 1):
        fy = _apply(blocks, y)
        r_s = [b.f0 + f - sj for b, f, sj in zip(blocks, fy, s)]
        r_c = -c - _adjoint(blocks, z, m) + g.T @ w
        r_h = h - g @ y
        pobj = float(c @ y)
        dobj = float(sum(np.sum(b.f0 * zj) for b, zj in zip(blocks, z)) + h @ w)
        gap_sz = float(sum(np.sum(sj * zj) for sj, zj in zip(s, z)))
        mu = gap_sz / nu

        pinf = max([0.0] + [float(np.linalg.norm(r)) for r in r_s]) / f0_norm
        dinf = float(np.linalg.norm(r_c)) / c_norm
        einf = float(np.linalg.norm(r_h)) / h_norm if p else 0.0
        rel_gap = abs(dobj - pobj) / (1.0 + abs(pobj) + abs(dobj))
        history.append((pobj, dobj, max(pinf, einf), dinf))
        if settings.verbose:
            print(f"{it:3d} p={pobj:+.10e} d={dobj:+.10e} pinf={pinf:.1e} dinf={dinf:.1e} "
                  f"einf={einf:.1e} gap={rel_gap:.1e} mu={mu:.1e}")
        if (max(pinf, einf) <= settings.feas_tol and dinf <= settings.feas_tol
                and rel_gap <= settings.gap_tol and gap_sz / (1.0 + abs(pobj)) <= settings.gap_tol):
            status = STATUS_OPTIMAL
            best = (0.0, it, y, w, s, z)
            break
        merit = max(pinf, einf, dinf, rel_gap)
        if merit < best[0]:
            best = (merit, it, y, w, s, z)
        elif it - best[1] >= settings.stall_iterations:
            status = STATUS_STALLED
            break
        z_scale = sum(np.trace(zj) for zj in z) + float(np.linalg.norm(w))
        y_scale = float(np.linalg.norm(y))
        if z_scale > settings.divergence and dinf <= 1e-6 * z_scale and dobj < -1e-3 * z_scale:
            status = STATUS_INFEASIBLE
            break
        if y_scale > settings.divergence and pinf + einf <= 1e-6 * y_scale and pobj > 1e-3 * y_scale:
            status = STATUS_UNBOUNDED
            break

        try:
            s_chol = [np.linalg.cholesky(sj) for sj in s]
            z_chol = [np.linalg.cholesky(zj) for zj in z]
        except np.linalg.LinAlgError:
            status = STATUS_STALLED
            break
        s_inv = [sla.cho_solve((lc, True), np.eye(lc.shape[0])) for lc in s_chol]

        schur = np.zeros((m, m))
        for b, zj, si in zip(blocks, z, s_inv):
            k = b.idx.size
            if k == 0:
                continue
            # M_tu = Tr(A_t Z A_u S^-1); rows of A are symmetric so Tr(A_t X) = <A_t, X>
            za = np.matmul(np.matmul(zj, b.mats), si)
            mb = b.mats.reshape(k, -1) @ za.reshape(k, -1).T
            schur[np.ix_(b.idx, b.idx)] += _sym(mb)
        reg = 1e-14 * max(1.0, float(np.trace(schur)) / m) * np.eye(m)
        try:
            solve_kkt = _refined(_kkt_factory(schur + reg, g), schur, g)
        except (np.linalg.LinAlgError, ValueError):
            status = STATUS_STALLED
            break

        def direction(rc_mats):
            # dZ = (Rc - Z dS) S^-1,  dS = r_s + F(dy)
            rhs_m = np.zeros(m)
            for b, zj, si, rs, rcm in zip(blocks, z, s_inv, r_s, rc_mats):
                t = (rcm - zj @ rs) @ si
                if b.idx.size:
                    np.add.at(rhs_m, b.idx, np.einsum("kab,ab->k", b.mats, _sym(t)))
            dy, dw = solve_kkt(rhs_m - r_c, r_h)
            fdy = _apply(blocks, dy)
            ds = [rs + f for rs, f in zip(r_s, fdy)]
            dz = [_sym((rcm - zj @ dsj) @ si) for zj, si, dsj, rcm in zip(z, s_inv, ds, rc_mats)]
            return dy, dw, ds, dz

        def steps(ds, dz):
            ap = min([1.0] + [_max_step(lc, d) for lc, d in zip(s_chol, ds)])
            ad = min([1.0] + [_max_step(lc, d) for lc, d in zip(z_chol, dz)])
            return ap, ad

        # predictor
        rc_aff = [-(zj @ sj) for zj, sj in zip(z, s)]
        dy_a, dw_a, ds_a, dz_a = direction(rc_aff)
        ap, ad = steps(ds_a, dz_a)
        mu_aff = sum(np.sum((sj + ap * d1) * (zj + ad * d2))
                     for sj, zj, d1, d2 in zip(s, z, ds_a, dz_a)) / nu
        sigma = min(1.0, max(0.0, (mu_aff / mu) ** 3)) if mu > 0 else 0.0

        # corrector
        rc_cor = [sigma * mu * np.eye(sj.shape[0]) - zj @ sj - d2 @ d1
                  for sj, zj, d1, d2 in zip(s, z, ds_a, dz_a)]
        dy, dw, ds, dz = direction(rc_cor)
        ap, ad = steps(ds, dz)
        ap = min(1.0, settings.step_fraction * ap)
        ad = min(1.0, settings.step_fraction * ad)

        y = y + ap * dy
        s = [_sym(sj + ap * d) for sj, d in zip(s, ds)]
        w = w + ad * dw
        z = [_sym(zj + ad * d) for zj, d in zip(z, dz)]

    if status in (STATUS_STALLED, STATUS_MAX_ITER) and np.isfinite(best[0]):
        _, _, y, w, s, z = best
        if best[0] <= settings.accept_tol:
            status = STATUS_OPTIMAL
    pobj = float(c @ y)
    dobj = float(sum(np.sum(b.f0 * zj) for b, zj in zip(blocks, z)) + h @ w)
    return RawResult(y, w, s, z, pobj, dobj, status, it, history)


def _refined(solve, schur, g, rounds=2):
    """Iterative refinement of ``solve`` against the unregularised system."""
    def refined(a, b):
        dy, dw = solve(a, b)
        for _ in range(rounds):
            ra = a - schur @ dy - g.T @ dw
            rb = b - g @ dy
            ey, ew = solve(ra, rb)
            dy, dw = dy + ey, dw + ew
        return dy, dw
    return refined


def _kkt_factory(schur: np.ndarray, g: np.ndarray):
    """Solver for ``[[M, G^T], [G, 0]] [dy; dw] = [a; b]`` via Cholesky and a Schur step on G."""
    try:
        fac = sla.cho_factor(schur, lower=True, check_finite=False)
        inv = lambda v: sla.cho_solve(fac, v, check_finite=False)  # noqa: E731
    except np.linalg.LinAlgError:
        lu = sla.lu_factor(schur, check_finite=False)
        inv = lambda v: sla.lu_solve(lu, v, check_finite=False)  # noqa: E731
    if g.shape[0] == 0:
        return lambda a, b: (inv(a), np.zeros(0))
    minv_gt = inv(g.T)
    gmg = _sym(g @ minv_gt)
    try:
        gfac = sla.cho_factor(gmg, lower=True, check_finite=False)
        ginv = lambda v: sla.cho_solve(gfac, v, check_finite=False)  # noqa: E731
    except np.linalg.LinAlgError:
        glu = sla.lu_factor(gmg, check_finite=False)
        ginv = lambda v: sla.lu_solve(glu, v, check_finite=False)  # noqa: E731

    def solve(a, b):
        minv_a = inv(a)
        dw = ginv(g @ minv_a - b)
        dy = minv_a - minv_gt @ dw
        return dy, dw

    return solve


@dataclass
class SdpSolution:
    primal_value: float
    dual_value: float
    primal_blocks: dict[str, np.ndarray]
    dual_multipliers: np.ndarray
    dual_blocks: dict[str, np.ndarray]
    gap: float
    iterations: int
    status: str
    equality_residual: float
    min_cone_eigenvalue: float

    @property
    def value(self) -> float:
        return self.primal_value

    def to_dict(self) -> dict:
        return {
            "primal_value": self.primal_value,
            "dual_value": self.dual_value,
            "gap": self.gap,
            "iterations": self.iterations,
            "status": self.status,
            "equality_residual": self.equality_residual,
            "min_cone_eigenvalue": self.min_cone_eigenvalue,
        }


def _unembed(m: np.ndarray, complex_block: bool, dim: int) -> np.ndarray:
    if not complex_block:
        return m.astype(complex)
    return ((m[:dim, :dim] + m[dim:, dim:]) + 1j * (m[dim:, :dim] - m[:dim, dim:])) / 2


def solve(problem, settings: SolverSettings = SolverSettings()) -> SdpSolution:
    """Compile and solve an :class:`~qpvlab.sdp.problem.SdpProblem`."""
    comp = problem.compile()
    raw = solve_lmi(comp, settings)
    sign = comp.sign
    primal = sign * raw.pobj + comp.const
    dual = sign * raw.dobj + comp.const

    # reassemble cone-level dual matrices and primal slacks
    zs = [np.zeros((2 * d if cx else d,) * 2) for d, cx in comp.cone_shapes]
    for b, zj in zip(comp.blocks, raw.z):
        zs[b.cone][np.ix_(b.rows, b.rows)] = zj
    dual_blocks = {
        cone.label: _unembed(zc, cx, d)
        for cone, zc, (d, cx) in zip(problem.cones, zs, comp.cone_shapes)
    }
    min_eig = np.inf
    for b, fy in zip(comp.blocks, _apply(comp.blocks, raw.y)):
        mat = b.f0 + fy
        if mat.size:
            min_eig = min(min_eig, float(np.linalg.eigvalsh(_sym(mat))[0]))
    resid = float(np.linalg.norm(comp.g @ raw.y - comp.h)) if comp.h.size else 0.0
    return SdpSolution(
        primal_value=float(primal),
        dual_value=float(dual),
        primal_blocks=problem.split(raw.y),
        dual_multipliers=raw.w,
        dual_blocks=dual_blocks,
        gap=float(abs(dual - primal)),
        iterations=raw.iterations,
        status=raw.status,
        equality_residual=resid,
        min_cone_eigenvalue=float(min_eig),
    )
