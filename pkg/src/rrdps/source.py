"""Four-intensity weak coherent source with bounded intensity errors.

Each pulse-train drawn from source ``x`` has a realized intensity
``x_i`` somewhere in ``[x(1 - delta_x), x(1 + delta_x)]``. Its photon-number
distribution is Poisson(``x_i``), so every ``p_{k,x_i}`` is confined to an
interval that does not depend on the (unknown) error pattern.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .core_math import DEFAULT_EPSILON, poisson_cutoff, poisson_pmf, poisson_pmf_table
from .errors import DomainError

SOURCE_NAMES = ("mu", "nu1", "nu2", "nu3")

# Pairs whose photon-number ratios must be ordered for the decoy bounds.
RATIO_PAIRS = (("mu", "nu1"), ("nu1", "nu2"), ("nu2", "nu3"))

ESTIMATOR_K_MAX = 3

# (mu, nu1, nu2, nu3) used as a fixed operating point in checks and searches.
REFERENCE_ENSEMBLE = (0.5, 0.1, 0.05, 0.01)


@dataclass(frozen=True)
class SourceSpec:
    """One source: nominal intensity, relative error radius and selection probability."""

    intensity: float
    delta: float = 0.0
    select_prob: float = 0.25

    def __post_init__(self):
        if not (math.isfinite(self.intensity) and self.intensity >= 0):
            raise DomainError(f"intensity must be >= 0, got {self.intensity!r}")
        if not 0.0 <= self.delta < 1.0:
            raise DomainError(f"delta must lie in [0, 1), got {self.delta!r}")
        if not 0.0 < self.select_prob < 1.0:
            raise DomainError(f"select_prob must lie in (0, 1), got {self.select_prob!r}")

    @property
    def low(self) -> float:
        return self.intensity * (1.0 - self.delta)

    @property
    def high(self) -> float:
        return self.intensity * (1.0 + self.delta)


@dataclass(frozen=True)
class SourceEnsemble:
    """Signal ``mu`` and decoys ``nu1 >= nu2 >= nu3``."""

    signal: SourceSpec
    decoy1: SourceSpec
    decoy2: SourceSpec
    decoy3: SourceSpec

    def __post_init__(self):
        total = sum(s.select_prob for s in self.sources)
        if abs(total - 1.0) > 1e-12:
            raise DomainError(f"selection probabilities sum to {total!r}, not 1")

    @classmethod
    def from_intensities(cls, mu, nu1, nu2, nu3, delta=0.0, select_probs=(0.25, 0.25, 0.25, 0.25)):
        """Build an ensemble; ``delta`` is either one common radius or four."""
        deltas = (delta,) * 4 if np.isscalar(delta) else tuple(delta)
        if len(deltas) != 4 or len(select_probs) != 4:
            raise DomainError("need exactly four deltas and four selection probabilities")
        specs = [
            SourceSpec(float(x), float(d), float(p))
            for x, d, p in zip((mu, nu1, nu2, nu3), deltas, select_probs)
        ]
        return cls(*specs)

    @property
    def sources(self) -> tuple[SourceSpec, SourceSpec, SourceSpec, SourceSpec]:
        return (self.signal, self.decoy1, self.decoy2, self.decoy3)

    @property
    def intensities(self) -> tuple[float, float, float, float]:
        return tuple(s.intensity for s in self.sources)

    @property
    def deltas(self) -> tuple[float, float, float, float]:
        return tuple(s.delta for s in self.sources)

    @property
    def select_probs(self) -> tuple[float, float, float, float]:
        return tuple(s.select_prob for s in self.sources)

    def by_name(self, name: str) -> SourceSpec:
        return self.sources[SOURCE_NAMES.index(name)]

    def ordering_violations(self) -> list[str]:
        """Worst-case form of the per-train ordering requirements.

        If these hold at the interval endpoints then ``nu1_i >= nu2_i >= nu3_i``
        and ``nu1_i + nu2_i + nu3_i < mu_i < 1`` hold for every error pattern.
        """
        mu, n1, n2, n3 = self.sources
        out = []
        if n1.low < n2.high:
            out.append(f"nu1*(1-delta) = {n1.low:.6g} < nu2*(1+delta) = {n2.high:.6g}")
        if n2.low < n3.high:
            out.append(f"nu2*(1-delta) = {n2.low:.6g} < nu3*(1+delta) = {n3.high:.6g}")
        decoy_sum = n1.high + n2.high + n3.high
        if not decoy_sum < mu.low:
            out.append(f"sum of decoys at (1+delta) = {decoy_sum:.6g} >= mu*(1-delta) = {mu.low:.6g}")
        if not mu.high < 1.0:
            out.append(f"mu*(1+delta) = {mu.high:.6g} >= 1")
        return out

    def default_k_max(self, epsilon: float = DEFAULT_EPSILON) -> int:
        """Poisson cutoff of the largest nominal intensity, never below 3."""
        return max(ESTIMATOR_K_MAX, poisson_cutoff(max(self.intensities), epsilon))


@dataclass(frozen=True)
class PhotonBounds:
    """Intervals ``[lower[k], upper[k]]`` containing ``p_{k,x_i}`` for k = 0..k_max."""

    lower: np.ndarray
    upper: np.ndarray

    @property
    def k_max(self) -> int:
        return len(self.lower) - 1

    def lo(self, k: int) -> float:
        return float(self.lower[k])

    def hi(self, k: int) -> float:
        return float(self.upper[k])


@dataclass(frozen=True)
class EnsembleBounds:
    mu: PhotonBounds
    nu1: PhotonBounds
    nu2: PhotonBounds
    nu3: PhotonBounds

    def __getitem__(self, name: str) -> PhotonBounds:
        return getattr(self, name)

    @property
    def k_max(self) -> int:
        return min(b.k_max for b in (self.mu, self.nu1, self.nu2, self.nu3))


def photon_bounds(spec: SourceSpec, k_max: int = ESTIMATOR_K_MAX) -> PhotonBounds:
    """Photon-number probability intervals over the intensity range of ``spec``.

    Poisson(k, .) increases on [0, k] and decreases beyond, so over
    ``[x_lo, x_hi]`` its minimum sits at an endpoint and its maximum at an
    endpoint or at the mode ``k``. For k = 0 this gives
    ``[pmf(0, x_hi), pmf(0, x_lo)]``; for k >= 1 with ``x_hi <= k`` it gives
    ``[pmf(k, x_lo), pmf(k, x_hi)]``.
    """
    if k_max < ESTIMATOR_K_MAX:
        raise DomainError(f"k_max must be >= {ESTIMATOR_K_MAX}, got {k_max}")
    x_lo, x_hi = spec.low, spec.high
    at_lo = poisson_pmf_table(x_lo, k_max)
    at_hi = poisson_pmf_table(x_hi, k_max)
    lower = np.minimum(at_lo, at_hi)
    upper = np.maximum(at_lo, at_hi)
    for k in range(max(1, math.floor(x_lo) + 1), min(k_max, math.ceil(x_hi) - 1) + 1):
        # Mode of Poisson(k, .) lies strictly inside the intensity interval.
        upper[k] = max(upper[k], poisson_pmf(k, float(k)))
    lower.flags.writeable = False
    upper.flags.writeable = False
    return PhotonBounds(lower, upper)


def ensemble_bounds(ensemble: SourceEnsemble, k_max: int = ESTIMATOR_K_MAX) -> EnsembleBounds:
    return EnsembleBounds(*(photon_bounds(s, k_max) for s in ensemble.sources))


@dataclass
class ValidationReport:
    """Outcome of the decoy-condition checks; truthy when every check passed."""

    violations: list[str] = field(default_factory=list)
    k_max: int = 0

    @property
    def ok(self) -> bool:
        return not self.violations

    @property
    def first_violation(self) -> str | None:
        return self.violations[0] if self.violations else None

    def __bool__(self) -> bool:
        return self.ok

    def summary(self) -> str:
        return "pass" if self.ok else f"fail: {self.first_violation}"


def _ratio_chain_violation(a: PhotonBounds, b: PhotonBounds, a_name, b_name, k_max, rtol):
    upper = b.upper[: k_max + 1]
    zero = np.flatnonzero(upper <= 0.0)
    if zero.size:
        k = int(zero[0])
        return f"p_{k},{b_name}^U is zero; ratio p_{k},{a_name}^L / p_{k},{b_name}^U undefined"
    r = a.lower[: k_max + 1] / upper
    label = f"{a_name}/{b_name}"
    if r[1] < r[0] * (1.0 - rtol):
        return f"{label}: ratio at k=1 ({r[1]:.6g}) < ratio at k=0 ({r[0]:.6g})"
    if r[2] < r[1] * (1.0 - rtol):
        return f"{label}: ratio at k=2 ({r[2]:.6g}) < ratio at k=1 ({r[1]:.6g})"
    bad = np.flatnonzero(r[3:] < r[2] * (1.0 - rtol))
    if bad.size:
        k = int(bad[0]) + 3
        return f"{label}: ratio at k={k} ({r[k]:.6g}) < ratio at k=2 ({r[2]:.6g})"
    return None


def validate_decoy_conditions(
    ensemble: SourceEnsemble,
    bounds: EnsembleBounds | None = None,
    k_max: int | None = None,
    rtol: float = 1e-12,
) -> ValidationReport:
    """Check the ensemble ordering and the photon-number ratio chains.

    For each pair (a, b) in (mu, nu1), (nu1, nu2), (nu2, nu3) the ratios
    ``r_k = p_{k,a}^L / p_{k,b}^U`` must satisfy ``r_k >= r_2 >= r_1 >= r_0``
    for every 2 <= k <= k_max. Ordering violations are reported before any
    ratio is evaluated. ``rtol`` absorbs rounding when a chain holds with
    equality.
    """
    if k_max is None:
        k_max = bounds.k_max if bounds is not None else ensemble.default_k_max()
    report = ValidationReport(k_max=k_max)
    report.violations.extend(ensemble.ordering_violations())
    if report.violations:
        return report
    if bounds is None or bounds.k_max < k_max:
        bounds = ensemble_bounds(ensemble, max(k_max, ESTIMATOR_K_MAX))
    for a_name, b_name in RATIO_PAIRS:
        msg = _ratio_chain_violation(bounds[a_name], bounds[b_name], a_name, b_name, k_max, rtol)
        if msg:
            report.violations.append(msg)
    return report
