"""Numeric primitives: binary entropy and Poisson photon statistics."""

import functools
import math

import numpy as np
from scipy.special import gammaln, pdtrc

from .errors import DomainError

DEFAULT_EPSILON = 1e-12


def binary_entropy(x: float) -> float:
    """Shannon entropy of a Bernoulli(x) variable, in bits.

    Uses the convention 0 * log2(0) = 0, so H2(0) = H2(1) = 0.
    """
    if not 0.0 <= x <= 1.0:
        raise DomainError(f"binary entropy argument {x!r} outside [0, 1]")
    if x == 0.0 or x == 1.0:
        return 0.0
    return -x * math.log2(x) - (1.0 - x) * math.log2(1.0 - x)


def poisson_pmf(k: int, x: float) -> float:
    """Probability of exactly ``k`` photons from a coherent source of mean ``x``.

    Evaluated in log space so that large ``k`` neither overflows ``x**k`` nor
    ``k!``.
    """
    if k < 0:
        raise DomainError(f"photon number {k!r} is negative")
    if x < 0:
        raise DomainError(f"intensity {x!r} is negative")
    if x == 0.0:
        return 1.0 if k == 0 else 0.0
    return math.exp(k * math.log(x) - x - math.lgamma(k + 1))


def poisson_pmf_table(x: float, k_max: int) -> np.ndarray:
    """``poisson_pmf(k, x)`` for k = 0..k_max as one array."""
    if x < 0:
        raise DomainError(f"intensity {x!r} is negative")
    k, log_fact = _log_factorials(k_max)
    if x == 0.0:
        return (k == 0).astype(float)
    return np.exp(k * math.log(x) - x - log_fact)


@functools.lru_cache(maxsize=64)
def _log_factorials(k_max: int):
    k = np.arange(k_max + 1)
    return k, gammaln(k + 1)


def poisson_cutoff(x: float, epsilon: float = DEFAULT_EPSILON) -> int:
    """Smallest K such that P(N > K) < ``epsilon`` for N ~ Poisson(``x``)."""
    if x < 0:
        raise DomainError(f"intensity {x!r} is negative")
    if not 0.0 < epsilon < 1.0:
        raise DomainError(f"epsilon {epsilon!r} outside (0, 1)")
    if x == 0.0:
        return 0
    k = int(x)
    # Walk down first so the answer is the smallest K, then up.
    while k > 0 and pdtrc(k - 1, x) < epsilon:
        k -= 1
    while pdtrc(k, x) >= epsilon:
        k += 1
    return k
