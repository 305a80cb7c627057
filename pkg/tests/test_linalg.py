import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qpvlab.errors import DomainError, StructuralError
from qpvlab.linalg import (
    Bipartition,
    eigh,
    eigvalsh,
    from_json,
    is_psd,
    kron,
    pair_to_party_major,
    partial_trace,
    partial_transpose,
    permute_factors,
    projector,
    to_json,
)
from qpvlab.states import bell_state, rho_beta

from conftest import random_density, random_hermitian

seeds = st.integers(min_value=0, max_value=2**32 - 1)
AB = Bipartition((0,), (1,))


def test_kron_basics():
    assert np.array_equal(kron(np.eye(2), np.eye(2)), np.eye(4))
    k0, k1 = np.diag([1.0, 0.0]), np.diag([0.0, 1.0])
    assert np.array_equal(kron(k0, k1), np.diag([0.0, 1.0, 0.0, 0.0]))
    assert np.isclose(np.trace(kron(rho_beta(1), rho_beta(1))), 1.0)


def test_partial_transpose_of_bell_state():
    vals = eigvalsh(partial_transpose(projector(bell_state("phi+")), (2, 2), AB))
    assert np.allclose(vals, [-0.5, 0.5, 0.5, 0.5], atol=1e-12)


def test_partial_transpose_of_rho_equal_is_psd():
    assert is_psd(partial_transpose(rho_beta(1.0), (2, 2), AB)).ok


def test_partial_transpose_needs_dims():
    with pytest.raises(StructuralError):
        partial_transpose(np.eye(4), None, AB)


def test_bipartition_validation():
    with pytest.raises(StructuralError):
        Bipartition((), (0,))
    with pytest.raises(StructuralError):
        Bipartition((0, 1), (1,))
    with pytest.raises(StructuralError):
        Bipartition((0,), (2,)).validate(2)


@settings(max_examples=40, deadline=None)
@given(seeds, st.integers(1, 2))
def test_partial_transpose_is_trace_preserving_involution(seed, n):
    rng = np.random.default_rng(seed)
    m = random_hermitian(rng, 4**n)
    cut = Bipartition.party_major(n)
    dims = [2] * (2 * n)
    once = partial_transpose(m, dims, cut)
    assert np.allclose(partial_transpose(once, dims, cut), m, atol=0)
    assert np.isclose(np.trace(once), np.trace(m))
    assert np.allclose(once, once.conj().T)


@settings(max_examples=30, deadline=None)
@given(seeds)
def test_product_states_stay_psd_under_partial_transpose(seed):
    rng = np.random.default_rng(seed)
    sigma = kron(random_density(rng, 2), random_density(rng, 2))
    assert is_psd(partial_transpose(sigma, (2, 2), AB), 1e-12).ok


@settings(max_examples=30, deadline=None)
@given(seeds)
def test_kron_associative_and_trace_multiplicative(seed):
    rng = np.random.default_rng(seed)
    a, b, c = (random_hermitian(rng, 2) for _ in range(3))
    assert np.allclose(kron(kron(a, b), c), kron(a, kron(b, c)))
    assert np.isclose(np.trace(kron(a, b)), np.trace(a) * np.trace(b))


def test_partial_trace_cases(rng):
    a, b = random_density(rng, 2), random_density(rng, 3)
    assert np.allclose(partial_trace(kron(a, b), (2, 3), [0]), a)
    assert np.allclose(partial_trace(projector(bell_state("psi-")), (2, 2), [1]), np.eye(2) / 2)
    with pytest.raises(StructuralError):
        partial_trace(np.eye(4), (2, 2), [])


def test_averaged_inputs_have_maximally_mixed_marginals():
    avg = (rho_beta(0.0) + rho_beta(1.0)) / 2
    assert np.allclose(partial_trace(avg, (2, 2), [1]), np.eye(2) / 2)


def test_permute_factors_roundtrip(rng):
    m = random_hermitian(rng, 16)
    perm = pair_to_party_major(2)
    back = permute_factors(permute_factors(m, [2] * 4, perm), [2] * 4, list(np.argsort(perm)))
    assert np.allclose(back, m)


def test_eigh_examples():
    vals, _ = eigh(rho_beta(1.0))
    assert np.allclose(vals, [0, 1 / 3, 1 / 3, 1 / 3], atol=1e-14)
    assert np.allclose(eigvalsh(np.diag([3.0, 1.0, 2.0])), [1, 2, 3])
    appendix = (2 * rho_beta(0.0) - rho_beta(1.0)) / 6
    assert np.allclose(eigvalsh(appendix), [0, 0, 0, 1 / 6], atol=1e-14)


def test_eigh_rejects_non_hermitian():
    with pytest.raises(DomainError):
        eigh(np.array([[0.0, 1.0], [0.0, 0.0]]))


@pytest.mark.parametrize("d", [1, 2, 5, 16, 64, 256])
def test_eigh_reconstruction(rng, d):
    m = random_hermitian(rng, d)
    vals, vecs = eigh(m)
    assert np.all(np.diff(vals) >= 0)
    assert np.max(np.abs(vecs @ np.diag(vals) @ vecs.conj().T - m)) <= 1e-10


def test_eigh_degenerate_and_graded():
    m = np.diag([1e-300, 1.0, 1e300])
    assert np.allclose(eigvalsh(m), [1e-300, 1.0, 1e300], rtol=1e-12)
    assert np.allclose(eigvalsh(np.zeros((5, 5))), 0)
    assert np.allclose(eigvalsh(np.ones((6, 6))), [0] * 5 + [6], atol=1e-13)


def test_is_psd_witnesses():
    check = is_psd(projector(bell_state("phi+")) / 6, 1e-9)
    assert check.ok and abs(check.min_eigenvalue) < 1e-15
    check = is_psd(-np.eye(2), 1e-9)
    assert not check.ok and check.min_eigenvalue == pytest.approx(-1)
    check = is_psd(np.eye(4) / 6 - rho_beta(1.0) / 2, 1e-9)
    assert check.ok and abs(check.min_eigenvalue) < 1e-15


def test_json_roundtrip(rng):
    m = random_hermitian(rng, 4)
    obj = json.loads(json.dumps(to_json(m, (2, 2))))
    back, fd = from_json(obj)
    assert fd == (2, 2)
    assert np.array_equal(back, m)
