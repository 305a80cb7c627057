"""Binomial acceptance tests run by the verifiers, and attacker acceptance odds."""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from statistics import NormalDist
from typing import Sequence

import numpy as np

from .errors import DomainError
from .states import honest_p0

#: above this many trials the CDF switches to a continuity-corrected normal law
EXACT_MAX_N = 100_000

_STD_NORMAL = NormalDist()


def erfinv(x: float) -> float:
    if not -1.0 < x < 1.0:
        raise DomainError(f"erfinv argument must lie in (-1, 1), got {x}")
    return _STD_NORMAL.inv_cdf((x + 1.0) / 2.0) / math.sqrt(2.0)


def _check_np(n: int, p: float) -> None:
    if n < 0:
        raise DomainError(f"number of trials must be >= 0, got {n}")
    if not 0.0 <= p <= 1.0:
        raise DomainError(f"probability must lie in [0, 1], got {p}")


@lru_cache(maxsize=256)
def _pmf_table(n: int, p: float) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """``(pmf, cdf, sf)`` arrays over ``k = 0..n``; ``sf[k] = P(N > k)``."""
    k = np.arange(n + 1)
    if p == 0.0 or p == 1.0:
        pmf = np.zeros(n + 1)
        pmf[0 if p == 0.0 else n] = 1.0
    else:
        lg = np.array([math.lgamma(i + 1.0) for i in range(n + 1)])
        logpmf = lg[n] - lg - lg[::-1] + k * math.log(p) + (n - k) * math.log1p(-p)
        pmf = np.exp(logpmf - logpmf.max())
        pmf /= pmf.sum()
    cdf = np.cumsum(pmf)
    sf = np.concatenate([np.cumsum(pmf[::-1])[::-1][1:], [0.0]])
    cdf = np.minimum(cdf, 1.0)
    return pmf, cdf, sf


def binom_pmf(k: int, n: int, p: float) -> float:
    _check_np(n, p)
    if not 0 <= k <= n:
        return 0.0
    if n > EXACT_MAX_N:
        mu, sd = n * p, math.sqrt(n * p * (1 - p))
        if sd == 0.0:
            return float(k == round(mu))
        return _STD_NORMAL.cdf((k + 0.5 - mu) / sd) - _STD_NORMAL.cdf((k - 0.5 - mu) / sd)
    return float(_pmf_table(n, float(p))[0][k])


def binom_cdf(k: int, n: int, p: float) -> float:
    """``P(N <= k)`` for ``N ~ Bin(n, p)``; exact (log-space) up to ``EXACT_MAX_N`` trials."""
    _check_np(n, p)
    if k < 0:
        return 0.0
    if k >= n:
        return 1.0
    if n > EXACT_MAX_N:
        sd = math.sqrt(n * p * (1 - p))
        if sd == 0.0:
            return float(k >= n * p)
        return _STD_NORMAL.cdf((k + 0.5 - n * p) / sd)
    return float(_pmf_table(n, float(p))[1][k])


def binom_sf(k: int, n: int, p: float) -> float:
    """``P(N > k)``, computed from the upper tail to keep precision."""
    _check_np(n, p)
    if k < 0:
        return 1.0
    if k >= n:
        return 0.0
    if n > EXACT_MAX_N:
        return 1.0 - binom_cdf(k, n, p)
    return float(_pmf_table(n, float(p))[2][k])


def binom_quantile(q: float, n: int, p: float) -> int:
    """Smallest ``k`` with ``P(N <= k) >= q``."""
    if not 0.0 < q < 1.0:
        raise DomainError(f"quantile level must lie in (0, 1), got {q}")
    _check_np(n, p)
    if n > EXACT_MAX_N:
        lo, hi = 0, n
        while lo < hi:
            mid = (lo + hi) // 2
            if binom_cdf(mid, n, p) >= q:
                hi = mid
            else:
                lo = mid + 1
        return lo
    _, cdf, sf = _pmf_table(n, float(p))
    if q <= 0.5:
        return int(np.searchsorted(cdf, q, side="left"))
    # CDF(k) >= q  <=>  SF(k) <= 1 - q; sf is non-increasing. The slack absorbs
    # the rounding gap between the cumulative sums from either end.
    slack = 4.0 * (n + 1) * np.finfo(float).eps
    return int(np.argmax(sf <= 1.0 - q + slack))


@dataclass(frozen=True)
class AcceptanceRegion:
    """Central ``(1 - alpha)`` quantile interval for the fraction of ``0`` answers.

    ``lower``/``upper`` are the quantile counts divided by ``r_rounds``. With
    ``randomized`` boundaries a count sitting exactly on ``k_lo`` (``k_hi``) is
    accepted with probability ``w_lo`` (``w_hi``), which makes the honest
    acceptance probability exactly ``1 - alpha``.
    """

    beta: float
    r_rounds: int
    alpha: float
    lower: float
    upper: float
    k_lo: int
    k_hi: int
    w_lo: float = 1.0
    w_hi: float = 1.0
    p: float = float("nan")

    def contains(self, p_hat: float) -> bool:
        """Deterministic membership of a sample fraction in ``[lower, upper]``."""
        return self.lower - 1e-15 <= p_hat <= self.upper + 1e-15

    def accept_probability(self, count: int) -> float:
        if count < self.k_lo or count > self.k_hi:
            return 0.0
        if self.k_lo == self.k_hi:
            return self.w_lo
        if count == self.k_lo:
            return self.w_lo
        if count == self.k_hi:
            return self.w_hi
        return 1.0

    def accepts(self, count: int, rng: np.random.Generator | None = None) -> bool:
        w = self.accept_probability(count)
        if w >= 1.0:
            return True
        if w <= 0.0:
            return False
        if rng is None:
            raise DomainError("a boundary count needs a random draw to decide")
        return bool(rng.random() < w)

    def mass(self, q: float) -> float:
        """Probability that ``Bin(r_rounds, q)`` lands in the region."""
        n = self.r_rounds
        if self.k_lo == self.k_hi:
            return self.w_lo * binom_pmf(self.k_lo, n, q)
        if n <= EXACT_MAX_N:
            pmf = _pmf_table(n, float(q))[0]
            inner = float(pmf[self.k_lo + 1 : self.k_hi].sum())
        else:
            inner = binom_cdf(self.k_hi - 1, n, q) - binom_cdf(self.k_lo, n, q)
        return inner + self.w_lo * binom_pmf(self.k_lo, n, q) + self.w_hi * binom_pmf(self.k_hi, n, q)


def central_region(
    p: float, r: int, alpha: float, beta: float = float("nan"), randomized: bool = True
) -> AcceptanceRegion:
    if r < 1:
        raise DomainError(f"need at least one round, got {r}")
    if not 0.0 < alpha < 1.0:
        raise DomainError(f"alpha must lie in (0, 1), got {alpha}")
    _check_np(r, p)
    k_lo = binom_quantile(alpha / 2, r, p)
    k_hi = binom_quantile(1 - alpha / 2, r, p)
    w_lo = w_hi = 1.0
    if randomized and 0.0 < p < 1.0:
        pm_lo = binom_pmf(k_lo, r, p)
        pm_hi = binom_pmf(k_hi, r, p)
        excess_lo = alpha / 2 - binom_cdf(k_lo - 1, r, p)
        excess_hi = alpha / 2 - binom_sf(k_hi, r, p)
        if k_lo == k_hi:
            w_lo = w_hi = min(1.0, max(0.0, 1.0 - (excess_lo + excess_hi) / pm_lo))
        else:
            w_lo = min(1.0, max(0.0, 1.0 - excess_lo / pm_lo))
            w_hi = min(1.0, max(0.0, 1.0 - excess_hi / pm_hi))
    return AcceptanceRegion(
        beta=beta, r_rounds=r, alpha=alpha, lower=k_lo / r, upper=k_hi / r,
        k_lo=k_lo, k_hi=k_hi, w_lo=w_lo, w_hi=w_hi, p=float(p),
    )


def acceptance_region(beta: float, r: int, alpha: float, randomized: bool = True) -> AcceptanceRegion:
    """Acceptance interval around the honest ``p_beta = (1 + beta^2) / 2``."""
    return central_region(honest_p0(beta), r, alpha, beta=beta, randomized=randomized)


@dataclass(frozen=True)
class DeltaVector:
    """Per-overlap deviation ``p_beta - p_beta^AB`` of an attacker's answer bias."""

    betas: tuple[float, ...]
    values: tuple[float, ...]

    def __post_init__(self):
        if len(self.betas) != len(self.values):
            raise DomainError("betas and deltas must align")
        if any(abs(v) > 1.0 for v in self.values):
            raise DomainError("each |delta| must be at most 1")

    @classmethod
    def from_attacker(cls, betas: Sequence[float], p_ab: Sequence[float]) -> "DeltaVector":
        return cls(tuple(betas), tuple(honest_p0(b) - q for b, q in zip(betas, p_ab)))

    def attacker_p(self) -> list[float]:
        return [honest_p0(b) - d for b, d in zip(self.betas, self.values)]

    def l1(self) -> float:
        return float(sum(abs(v) for v in self.values))


def attacker_accept_prob(
    delta: DeltaVector,
    regions: Sequence[AcceptanceRegion],
    p_ab: Sequence[float] | None = None,
) -> float:
    """Probability that a binomially answering attacker passes every per-overlap test."""
    if len(regions) != len(delta.betas):
        raise DomainError("one acceptance region per overlap is required")
    if p_ab is None:
        p_ab = delta.attacker_p()
    prob = 1.0
    for region, q in zip(regions, p_ab):
        q = min(1.0, max(0.0, q))
        if region.p == 1.0 and region.k_lo == region.r_rounds:
            # region is the single point "all answers 0"
            prob *= q ** region.r_rounds
        else:
            prob *= region.mass(q)
    return prob


def suppression_bound(
    delta_beta: float, r: int, alpha: float, p_beta: float, p_ab: float | None = None
) -> float:
    """Gaussian-regime estimate of an attacker's per-overlap acceptance probability.

    ``sqrt(2) f_AB / (sqrt(pi R) D) * exp(-(sqrt(R) D - f_P c_a)^2 / f_AB^2)`` with
    ``f_X = sqrt(2 p_X (1 - p_X))`` and ``c_a = erfinv(1 - alpha)``.

    Empirically this dominates the exact interval mass for ``D > 0`` once
    ``sqrt(R) D >= 3`` at ``alpha >= 1e-3`` and ``D <= 0.2`` (checked for
    ``p_beta`` in ``[0.5, 0.95]`` and ``R`` up to ``1e5``). For smaller alpha the
    margin ``sqrt(R) D - f_P c_a`` must be larger before it holds. Negative
    deviations are rejected: binomial skew makes the Gaussian tail too light there.
    """
    if p_ab is None:
        p_ab = p_beta - delta_beta
    if delta_beta == 0.0:
        raise DomainError("no suppression for a zero deviation (bound diverges)")
    if delta_beta < 0.0:
        raise DomainError("bound only holds for attackers biased below p_beta (delta > 0)")
    for name, p in (("p_beta", p_beta), ("p_ab", p_ab)):
        if not 0.5 <= p < 1.0:
            raise DomainError(f"{name}={p} outside the Gaussian regime [1/2, 1)")
        if r * (1.0 - p) < 10.0:
            raise DomainError(f"R(1 - {name}) = {r * (1 - p):.3g} < 10; normal approximation not valid")
    if not 0.0 < alpha < 1.0:
        raise DomainError(f"alpha must lie in (0, 1), got {alpha}")
    d = delta_beta
    f_p = math.sqrt(2.0 * p_beta * (1.0 - p_beta))
    f_ab = math.sqrt(2.0 * p_ab * (1.0 - p_ab))
    c_a = erfinv(1.0 - alpha)
    root_r = math.sqrt(r)
    expo = -((root_r * d - f_p * c_a) ** 2) / f_ab**2
    return math.sqrt(2.0) * f_ab / (math.sqrt(math.pi) * root_r * d) * math.exp(expo)


def delta_relation(p_succ: float) -> float:
    """Lower bound on the l1 deviation implied by a success probability of at most ``p_succ``."""
    if not 0.0 <= p_succ <= 0.75:
        raise DomainError(f"p_succ must lie in [0, 3/4], got {p_succ}")
    return max(0.0, 1.5 - 2.0 * p_succ)


def inconclusive_region(total_rounds: int, eta: float, alpha: float) -> AcceptanceRegion:
    if not 0.0 < eta <= 1.0:
        raise DomainError(f"eta must lie in (0, 1], got {eta}")
    return central_region(1.0 - eta, total_rounds, alpha)


def two_sample_binomial_test(k1: int, n1: int, k2: int, n2: int) -> float:
    """Two-sided p-value of the pooled two-proportion z-test."""
    if n1 < 1 or n2 < 1:
        raise DomainError("both samples need at least one trial")
    pooled = (k1 + k2) / (n1 + n2)
    var = pooled * (1 - pooled) * (1 / n1 + 1 / n2)
    diff = k1 / n1 - k2 / n2
    if var == 0.0:
        return 1.0 if diff == 0.0 else 0.0
    z = abs(diff) / math.sqrt(var)
    return math.erfc(z / math.sqrt(2.0))
