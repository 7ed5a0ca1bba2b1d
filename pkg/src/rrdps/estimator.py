"""Decoy-state lower bounds on the vacuum, single- and two-photon signal yields.

Everything is in rate form: the count identities are divided by the number
of trains M, so the observed inputs are the per-source gains
``Q_x = N_x / (P_x M)`` and ``D_k`` is the per-train average of the
reciprocal mixture weights over counted k-photon trains. The bounds are
chained: ``D_0^L`` feeds ``D_1^L``, and both feed ``D_2^L``.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

from .channel import ObservedStats
from .errors import DegenerateDenominatorError
from .source import EnsembleBounds


@dataclass(frozen=True)
class CoefficientSet:
    q1: float
    q2: float
    q3: float
    s1: float
    s2: float
    # p_{0,nu3}^U p_{2,nu2}^L - p_{0,nu2}^L p_{2,nu3}^U; appears only in D_2.
    t2: float

    def flipped(self, name: str) -> CoefficientSet:
        """Copy with one coefficient negated (used by mutation controls)."""
        return replace(self, **{name: -getattr(self, name)})


@dataclass(frozen=True)
class DBounds:
    d0_lower: float
    d1_lower: float
    d2_lower: float

    def __getitem__(self, k: int) -> float:
        return (self.d0_lower, self.d1_lower, self.d2_lower)[k]


@dataclass(frozen=True)
class YieldBounds:
    """Lower bounds on the k-photon contributions Q_{k,mu} to the signal gain."""

    q0_lower: float
    q1_lower: float
    q2_lower: float

    def __getitem__(self, k: int) -> float:
        return (self.q0_lower, self.q1_lower, self.q2_lower)[k]

    def __iter__(self):
        return iter((self.q0_lower, self.q1_lower, self.q2_lower))


def coefficients(b: EnsembleBounds) -> CoefficientSet:
    mu, n1, n2, n3 = b.mu, b.nu1, b.nu2, b.nu3
    return CoefficientSet(
        q1=n2.lo(0) * n1.hi(2) - n1.hi(0) * n2.lo(2),
        q2=n3.hi(0) * n2.lo(1) - n2.lo(0) * n3.hi(1),
        q3=n2.lo(0) * n1.hi(1) - n1.hi(0) * n2.lo(1),
        s1=n2.lo(0) * n1.hi(3) - n1.hi(0) * n2.lo(3),
        s2=n3.hi(0) * n2.lo(3) - n2.lo(0) * n3.hi(3),
        t2=n3.hi(0) * n2.lo(2) - n2.lo(0) * n3.hi(2),
    )


def _check_denominator(value: float, which: str) -> None:
    if not value > 0.0:
        raise DegenerateDenominatorError(f"{which} denominator is {value!r}; intervals are not decoy-ordered")


def d0_lower(obs: ObservedStats, b: EnsembleBounds) -> float:
    """Vacuum bound from the nu1/nu2 pair, clamped at 0."""
    n1, n2 = b.nu1, b.nu2
    denom = n1.lo(1) * n2.hi(0) - n2.hi(1) * n1.lo(0)
    _check_denominator(denom, "D0")
    numer = n1.lo(1) * obs.q_nu2 - n2.hi(1) * obs.q_nu1
    return max(numer / denom, 0.0)


def d1_lower(obs: ObservedStats, b: EnsembleBounds, c: CoefficientSet, d0: float) -> float:
    """Single-photon bound using nu1, nu2 and the signal, clamped at 0."""
    mu, n1, n2 = b.mu, b.nu1, b.nu2
    denom = c.q3 * mu.lo(2) - c.q1 * mu.lo(1)
    _check_denominator(denom, "D1")
    pair = n2.lo(0) * obs.q_nu1 - n1.hi(0) * obs.q_nu2
    numer = pair * mu.lo(2) - c.q1 * (obs.q_mu - mu.lo(0) * d0)
    return max(numer / denom, 0.0)


def d2_lower(obs: ObservedStats, b: EnsembleBounds, c: CoefficientSet, d0: float, d1: float) -> float:
    """Two-photon bound using all four sources, clamped at 0."""
    mu, n1, n2, n3 = b.mu, b.nu1, b.nu2, b.nu3
    tail = c.s1 * c.q2 - c.s2 * c.q3
    denom = (c.q1 * c.q2 - c.t2 * c.q3) * mu.lo(3) - tail * mu.lo(2)
    _check_denominator(denom, "D2")
    pair12 = n2.lo(0) * obs.q_nu1 - n1.hi(0) * obs.q_nu2
    pair23 = n3.hi(0) * obs.q_nu2 - n2.lo(0) * obs.q_nu3
    residual = obs.q_mu - mu.lo(0) * d0 - mu.lo(1) * d1
    numer = (pair12 * c.q2 - pair23 * c.q3) * mu.lo(3) - tail * residual
    return max(numer / denom, 0.0)


def d_bounds(obs: ObservedStats, b: EnsembleBounds, c: CoefficientSet | None = None) -> DBounds:
    if c is None:
        c = coefficients(b)
    d0 = d0_lower(obs, b)
    d1 = d1_lower(obs, b, c, d0)
    d2 = d2_lower(obs, b, c, d0, d1)
    return DBounds(d0, d1, d2)


def _clip01(x: float) -> float:
    return min(max(x, 0.0), 1.0)


def yield_bounds(obs: ObservedStats, b: EnsembleBounds, d: DBounds) -> YieldBounds:
    """``Q_{k,mu}^L = p_{k,mu}^L D_k^L``, clipped to [0, 1]."""
    return YieldBounds(*(_clip01(b.mu.lo(k) * d[k]) for k in range(3)))


def closed_form_yield_bounds(obs: ObservedStats, b: EnsembleBounds, c: CoefficientSet | None = None) -> YieldBounds:
    """Evaluate the yield bounds directly in terms of gains, without D_k.

    Algebraically identical to :func:`yield_bounds` after :func:`d_bounds`;
    kept as a second evaluation path for consistency checks.
    """
    if c is None:
        c = coefficients(b)
    mu, n1, n2, n3 = b.mu, b.nu1, b.nu2, b.nu3

    denom0 = n1.lo(1) * n2.hi(0) - n2.hi(1) * n1.lo(0)
    _check_denominator(denom0, "Q0")
    y0 = max(mu.lo(0) * (n1.lo(1) * obs.q_nu2 - n2.hi(1) * obs.q_nu1) / denom0, 0.0)

    denom1 = c.q3 * mu.lo(2) - c.q1 * mu.lo(1)
    _check_denominator(denom1, "Q1")
    pair12 = n2.lo(0) * obs.q_nu1 - n1.hi(0) * obs.q_nu2
    y1 = max(mu.lo(1) * (pair12 * mu.lo(2) - c.q1 * (obs.q_mu - y0)) / denom1, 0.0)

    tail = c.s1 * c.q2 - c.s2 * c.q3
    denom2 = (c.q1 * c.q2 - c.t2 * c.q3) * mu.lo(3) - tail * mu.lo(2)
    _check_denominator(denom2, "Q2")
    pair23 = n3.hi(0) * obs.q_nu2 - n2.lo(0) * obs.q_nu3
    y2 = max(mu.lo(2) * ((pair12 * c.q2 - pair23 * c.q3) * mu.lo(3) - tail * (obs.q_mu - y0 - y1)) / denom2, 0.0)

    return YieldBounds(_clip01(y0), _clip01(y1), _clip01(y2))


def estimate(obs: ObservedStats, b: EnsembleBounds, c: CoefficientSet | None = None) -> tuple[DBounds, YieldBounds]:
    """Run the full D0 -> D1 -> D2 chain and convert to yield bounds."""
    d = d_bounds(obs, b, c)
    return d, yield_bounds(obs, b, d)
