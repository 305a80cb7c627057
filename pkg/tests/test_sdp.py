import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qpvlab.errors import DomainError
from qpvlab.linalg import Bipartition, is_psd, partial_transpose
from qpvlab.sdp import SdpProblem, SolverSettings, Term, functional_op, identity_op, solve
from qpvlab.sdp.problem import excitation_mask, hermitian_basis, orthonormalize
from qpvlab.sdp.programs import (
    build_discrimination,
    build_lossy_parallel,
    build_min_delta,
    build_parallel,
    build_subset_loss,
    build_sym_antisym,
    build_tradeoff_point,
    optimal_value,
    tradeoff_closed_form,
    twirl_basis,
)
from qpvlab.sdp.solver import solve_lmi
from qpvlab.states import rho_beta

from conftest import random_density

AB = Bipartition.party_major(1)


def single_round():
    return build_discrimination([(rho_beta(1.0), 0.5), (rho_beta(0.0), 0.5)], AB)


def test_single_round_value_and_povm():
    sol = optimal_value(single_round())
    assert sol.value == pytest.approx(2 / 3, abs=1e-6)
    assert sol.dual_value == pytest.approx(2 / 3, abs=1e-6)
    p0, p1 = sol.primal_blocks["P[0]"], sol.primal_blocks["P[1]"]
    assert np.allclose(p0 + p1, np.eye(4), atol=1e-9)
    for p in (p0, p1):
        assert is_psd(p, 1e-8).ok
        assert is_psd(partial_transpose(p, (2, 2), AB), 1e-8).ok


@pytest.mark.parametrize("n", [1, 2, 3])
def test_parallel_repetition(n):
    assert optimal_value(build_parallel(n)).value == pytest.approx((2 / 3) ** n, abs=1e-6)


@pytest.mark.parametrize("basis", ["hermitian", "real", "phase", "twirl"])
def test_symmetry_reductions_agree(basis):
    assert optimal_value(build_parallel(2, basis)).value == pytest.approx(4 / 9, abs=1e-6)


@pytest.mark.slow
def test_parallel_four_rounds():
    assert optimal_value(build_parallel(4, "twirl")).value == pytest.approx(16 / 81, abs=1e-6)


def test_bases_are_orthonormal():
    for mats in (hermitian_basis(4), orthonormalize(twirl_basis(2))):
        flat = np.array([m.reshape(-1) for m in mats])
        assert np.allclose(np.real(flat.conj() @ flat.T), np.eye(len(mats)), atol=1e-12)
    assert len(hermitian_basis(4)) == 16 and len(orthonormalize(twirl_basis(2))) == 4
    mask = excitation_mask(2)
    assert mask.shape == (16, 16) and np.array_equal(mask, mask.T)


@pytest.mark.parametrize("n,eta", [(1, 0.05), (1, 0.3), (1, 1.0), (2, 0.05), (2, 0.3), (2, 1.0)])
def test_lossy_value_is_eta_independent(n, eta):
    assert optimal_value(build_lossy_parallel(n, eta)).value == pytest.approx((2 / 3) ** n, abs=1e-6)


@pytest.mark.parametrize("eta", [1.0, 0.3])
def test_min_delta_on_zero_one(eta):
    prog = build_min_delta((0.0, 1.0), eta)
    sol = optimal_value(prog.problem)
    assert sol.value == pytest.approx(0.25, abs=1e-6)
    d = prog.deltas(sol)
    assert abs(d[0.0]) <= 1e-6
    assert d[1.0] == pytest.approx(0.25, abs=1e-6)


@pytest.mark.parametrize("overlaps,value", [((0.0, 0.5, 1.0), 2 / 7), ((0.0, 2**-0.5, 1.0), 1 / 3)])
def test_min_delta_three_overlaps(overlaps, value):
    prog = build_min_delta(overlaps)
    assert optimal_value(prog.problem).value == pytest.approx(value, abs=1e-6)


@pytest.mark.parametrize("x", np.linspace(0, 1, 11))
def test_tradeoff_curve(x):
    assert optimal_value(build_tradeoff_point(x)).value == pytest.approx(tradeoff_closed_form(x), abs=1e-5)


def test_sym_antisym():
    assert optimal_value(build_sym_antisym(False)).value == pytest.approx(5 / 6, abs=1e-6)
    assert optimal_value(build_sym_antisym(True)).value == pytest.approx(17 / 18, abs=1e-6)


@pytest.mark.parametrize("subset,value", [([0], 2 / 3), ([1], 2 / 3), ([0, 1], 4 / 9)])
def test_subset_loss(subset, value):
    assert optimal_value(build_subset_loss(2, subset)).value == pytest.approx(value, abs=1e-6)


def test_domain_checks():
    with pytest.raises(DomainError):
        build_parallel(5)
    with pytest.raises(DomainError):
        build_lossy_parallel(1, 0.0)
    with pytest.raises(DomainError):
        build_min_delta((0.5,))
    with pytest.raises(DomainError):
        build_subset_loss(2, [2])


def test_infeasible_and_unbounded_are_reported():
    p = SdpProblem()
    p.add_matrix("X", 2)
    p.add_equality("tr", [Term("X", functional_op(np.eye(2)))], [[-1.0]])
    p.set_objective({"X": np.eye(2)})
    assert solve(p).status == "infeasible"
    q = SdpProblem()
    q.add_matrix("X", 2)
    q.set_objective({"X": np.eye(2)})
    assert solve(q).status == "unbounded"


def test_fixed_point_problem():
    p = SdpProblem()
    p.add_matrix("X", 2)
    p.add_equality("fix", [Term("X", identity_op())], np.eye(2))
    p.set_objective({"X": np.diag([0.3, 0.7])})
    assert solve(p).value == pytest.approx(1.0, abs=1e-8)


@pytest.mark.parametrize("build", [lambda: build_parallel(2), lambda: build_lossy_parallel(1, 0.3),
                                   lambda: build_sym_antisym(True), lambda: build_tradeoff_point(0.0)])
def test_weak_duality_at_near_feasible_iterates(build):
    raw = solve_lmi(build().compile(), SolverSettings())
    for pobj, dobj, pinf, dinf in raw.history:
        if max(pinf, dinf) <= 1e-8:
            assert pobj <= dobj + 1e-8


@settings(max_examples=6, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_random_discrimination_against_cvxpy(seed):
    cp = pytest.importorskip("cvxpy")
    rng = np.random.default_rng(seed)
    rhos = [random_density(rng, 4) for _ in range(2)]
    ours = optimal_value(build_discrimination([(r, 0.5) for r in rhos], AB)).value
    xs = [cp.Variable((4, 4), hermitian=True) for _ in rhos]
    cons = [sum(xs) == np.eye(4)]
    for x in xs:
        cons += [x >> 0, cp.partial_transpose(x, [2, 2], 1) >> 0]
    obj = cp.Maximize(cp.real(sum(cp.trace(x @ r) for x, r in zip(xs, rhos))) / 2)
    ref = cp.Problem(obj, cons).solve(solver="CLARABEL")
    assert ours == pytest.approx(ref, abs=1e-5)
