import itertools
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st

from qpvlab.errors import DomainError
from qpvlab.stats import (
    DeltaVector,
    acceptance_region,
    attacker_accept_prob,
    binom_cdf,
    binom_pmf,
    binom_quantile,
    delta_relation,
    erfinv,
    inconclusive_region,
    suppression_bound,
    two_sample_binomial_test,
)
from qpvlab.states import honest_p0


def exact_cdf(k, n, p):
    p = Fraction(p)
    return float(sum(math.comb(n, j) * p**j * (1 - p) ** (n - j) for j in range(k + 1)))


def test_cdf_examples():
    assert binom_cdf(10, 10, 0.3) == 1.0
    assert binom_cdf(5, 10, 0.5) == pytest.approx(0.623046875, abs=1e-15)
    assert binom_cdf(0, 4, 0.5) == pytest.approx(0.0625, abs=1e-15)
    assert binom_pmf(3, 3, 1.0) == 1.0


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 60), st.floats(0.01, 0.99), st.data())
def test_cdf_against_rational_sum(n, p, data):
    k = data.draw(st.integers(0, n))
    assert binom_cdf(k, n, p) == pytest.approx(exact_cdf(k, n, p), abs=1e-12)


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 200), st.floats(0.05, 0.95), st.data())
def test_quantile_cdf_roundtrip(n, p, data):
    k = data.draw(st.integers(0, n - 1))
    c = binom_cdf(k, n, p)
    assume(0.0 < c < 1.0)
    assert binom_quantile(c, n, p) <= k


def test_quantile_examples():
    assert binom_quantile(0.5, 100, 0.5) == 50
    k = binom_quantile(0.025, 100, 0.75)
    assert exact_cdf(k, 100, 0.75) >= 0.025 > exact_cdf(k - 1, 100, 0.75)
    assert binom_quantile(1 - 1e-15, 30, 0.4) == 30


def test_acceptance_regions():
    r = acceptance_region(1.0, 37, 0.01)
    assert r.upper == 1.0
    r = acceptance_region(math.sqrt(0.5), 100, 0.05, randomized=False)
    assert r.lower <= 0.75 <= r.upper
    assert r.k_lo == binom_quantile(0.025, 100, 0.75)
    assert r.k_hi == binom_quantile(0.975, 100, 0.75)


@pytest.mark.parametrize("beta,r", [(0.0, 50), (0.5, 400), (0.9, 2000)])
def test_randomized_region_has_exact_size(beta, r):
    region = acceptance_region(beta, r, 1e-2)
    assert region.mass(honest_p0(beta)) == pytest.approx(1 - 1e-2, abs=1e-12)
    plain = acceptance_region(beta, r, 1e-2, randomized=False)
    assert plain.mass(honest_p0(beta)) >= 1 - 1e-2


def test_honest_monte_carlo_acceptance(rng):
    region = acceptance_region(0.5, 10_000, 1e-3, randomized=False)
    counts = rng.binomial(10_000, honest_p0(0.5), size=1000)
    assert np.mean((counts >= region.k_lo) & (counts <= region.k_hi)) >= 0.999 - 3 * math.sqrt(1e-3 / 1000)


def test_attacker_cases():
    betas = (0.0, 0.5, 1.0)
    regions = [acceptance_region(b, 200, 1e-3) for b in betas]
    zero = DeltaVector(betas, (0.0, 0.0, 0.0))
    assert attacker_accept_prob(zero, regions) == pytest.approx((1 - 1e-3) ** 2, abs=1e-12)
    # case (3): p_beta = 1 and the attacker answers 0 with probability 3/4
    r1 = acceptance_region(1.0, 20, 1e-3)
    assert attacker_accept_prob(DeltaVector((1.0,), (0.25,)), [r1]) == 0.75**20
    # case (2): attacker always answers 0 where p_beta < 1
    r0 = acceptance_region(0.5, 5000, 1e-3)
    assert attacker_accept_prob(DeltaVector((0.5,), (honest_p0(0.5) - 1.0,)), [r0]) == 0.0


def test_monotone_in_delta():
    region = acceptance_region(0.5, 500, 1e-3)
    p = honest_p0(0.5)
    for sign in (1, -1):
        probs = [attacker_accept_prob(DeltaVector((0.5,), (sign * d,)), [region]) for d in np.linspace(0, 0.3, 31)]
        assert all(a >= b - 1e-15 for a, b in zip(probs, probs[1:]))
    assert p == 0.625


def test_suppression_bound_dominates_exact_mass():
    for p_beta, alpha in itertools.product((0.5, 0.625, 0.75, 0.9), (1e-2, 1e-3)):
        for delta in (0.02, 0.05, 0.1, 0.2):
            for r in (100, 400, 1600, 6400, 25_600, 100_000):
                if delta * math.sqrt(r) < 3 or p_beta - delta < 0.5 or r * (1 - p_beta) < 10:
                    continue
                region = acceptance_region(float(np.sqrt(2 * p_beta - 1)), r, alpha)
                exact = region.mass(p_beta - delta)
                assert exact <= suppression_bound(delta, r, alpha, p_beta)


def test_suppression_bound_domain():
    assert suppression_bound(0.1, 400, 1e-3, 0.625) > 0
    for args in ((0.0, 400, 1e-3, 0.625), (-0.1, 400, 1e-3, 0.625), (0.25, 400, 1e-3, 1.0), (0.1, 20, 1e-3, 0.625)):
        with pytest.raises(DomainError):
            suppression_bound(*args)


def test_delta_relation():
    assert delta_relation(2 / 3) == pytest.approx(1 / 6)
    assert delta_relation(0.75) == 0.0
    assert delta_relation(0.5) == pytest.approx(0.5)
    with pytest.raises(DomainError):
        delta_relation(0.8)


def test_erfinv_inverts_erf():
    for y in np.linspace(-0.999, 0.999, 41):
        assert math.erf(erfinv(y)) == pytest.approx(y, abs=1e-12)


def test_inconclusive_region_and_two_sample():
    r = inconclusive_region(1000, 1.0, 1e-3)
    assert r.k_lo == r.k_hi == 0
    assert two_sample_binomial_test(500, 1000, 500, 1000) == 1.0
    assert two_sample_binomial_test(600, 1000, 400, 1000) < 1e-10
    with pytest.raises(DomainError):
        DeltaVector((0.0,), (1.5,))
