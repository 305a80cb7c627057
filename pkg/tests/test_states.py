import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qpvlab.errors import DomainError
from qpvlab.linalg import is_psd, projector
from qpvlab.states import (
    BELL_LABELS,
    OverlapSet,
    bell_basis,
    bell_state,
    doubled_rho,
    honest_p0,
    mub_bases,
    mub_equal_projector,
    rho_beta,
    rho_string,
    rho_sym_antisym,
    sample_state_pair,
    sample_state_pairs,
    swap_operator,
    sym_antisym_projectors,
)


def test_bell_states():
    s = 1 / np.sqrt(2)
    assert np.allclose(bell_state("Ψ−"), [0, s, -s, 0])
    assert abs(np.vdot(bell_state("phi+"), bell_state("phi-"))) < 1e-15
    b = bell_basis()
    assert np.allclose(b @ b.conj().T, np.eye(4))
    with pytest.raises(DomainError):
        bell_state("omega")


def test_projectors():
    p_sym, p_asym = sym_antisym_projectors()
    assert np.allclose(p_sym + p_asym, np.eye(4))
    assert np.allclose(p_asym, projector(bell_state("psi-")))
    assert np.trace(p_sym) == pytest.approx(3)
    assert np.allclose(p_sym @ p_asym, 0)
    assert np.allclose(p_sym @ p_sym, p_sym)


def test_rho_beta_matches_printed_matrices():
    assert np.allclose(rho_beta(1), np.array([[2, 0, 0, 0], [0, 1, 1, 0], [0, 1, 1, 0], [0, 0, 0, 2]]) / 6)
    assert np.allclose(rho_beta(0), np.array([[1, 0, 0, 0], [0, 2, -1, 0], [0, -1, 2, 0], [0, 0, 0, 1]]) / 6)
    p_sym, _ = sym_antisym_projectors()
    for b in (0, 0.5, 1):
        assert np.trace(p_sym @ rho_beta(b)).real == pytest.approx(honest_p0(b))
    with pytest.raises(DomainError):
        rho_beta(1.5)


@settings(max_examples=40, deadline=None)
@given(st.floats(0, 1))
def test_rho_beta_is_a_swap_invariant_state(beta):
    rho = rho_beta(beta)
    f = swap_operator(2)
    assert np.trace(rho).real == pytest.approx(1)
    assert is_psd(rho, 1e-12).ok
    assert np.allclose(f @ rho @ f, rho)
    assert np.allclose(rho, rho.conj().T)


def test_sym_antisym_states():
    rs, ra = rho_sym_antisym()
    assert np.allclose(rs, rho_beta(1))
    mix = sum(projector(bell_state(w)) for w in ("phi+", "phi-", "psi+")) / 3
    assert np.allclose(rs, mix)
    assert np.allclose(ra, np.array([[0, 0, 0, 0], [0, 1, -1, 0], [0, -1, 1, 0], [0, 0, 0, 0]]) / 2)
    assert np.trace(ra) == pytest.approx(1)


def test_rho_string_and_doubled():
    assert np.allclose(rho_string([0]), rho_beta(1))
    assert np.trace(rho_string([0, 1, 1])).real == pytest.approx(1)
    assert np.allclose(doubled_rho(rho_beta(1)), rho_string([0, 0]))
    with pytest.raises(DomainError):
        rho_string([2])


def test_overlap_set():
    assert OverlapSet((1.0, 0.0)).betas == (0.0, 1.0)
    for bad in ((), (0.5, 0.5), (1.2,)):
        with pytest.raises(DomainError):
            OverlapSet(bad)


@settings(max_examples=50, deadline=None)
@given(st.floats(0, 1), st.integers(0, 2**32 - 1))
def test_sampled_pairs_have_exact_overlap(beta, seed):
    pair = sample_state_pair(beta, np.random.default_rng(seed))
    assert abs(pair.overlap() - beta) <= 1e-10
    assert abs(np.linalg.norm(pair.psi) - 1) <= 1e-12
    assert abs(np.linalg.norm(pair.phi) - 1) <= 1e-12


def test_haar_average_converges_to_rho_beta(rng):
    psi, phi = sample_state_pairs(0.5, 100_000, rng)
    prod = np.einsum("ni,nj->nij", psi, phi).reshape(-1, 4)
    avg = np.einsum("ni,nj->ij", prod, prod.conj()) / len(prod)
    assert np.max(np.abs(avg - rho_beta(0.5))) <= 0.01


def test_mub():
    b = mub_bases()
    assert set(b) == {"Z", "X", "Y"}
    for p, q in (("Z", "X"), ("Z", "Y"), ("X", "Y")):
        for e in b[p]:
            for f in b[q]:
                assert abs(np.vdot(e, f)) ** 2 == pytest.approx(0.5)
    pi0 = np.array([[2, 0, 0, 0], [0, 1, 1, 0], [0, 1, 1, 0], [0, 0, 0, 2]]) / 3
    assert np.allclose(mub_equal_projector(), pi0)
    assert len(BELL_LABELS) == 4
