"""Secure key rate per pulse for decoy-state RRDPS with source errors."""

from __future__ import annotations

from dataclasses import dataclass

from .channel import ChannelParams, ObservedStats, observed_stats
from .core_math import binary_entropy
from .errors import DomainError, UndefinedQBERError, ValidationError
from .estimator import DBounds, YieldBounds, estimate
from .source import ESTIMATOR_K_MAX, SourceEnsemble, ValidationReport, ensemble_bounds, validate_decoy_conditions

# "eq1": 1/L scales the whole bracket, error correction included.
# "eq2": 1/L scales only the privacy-amplified yield sum.
RATE_SCOPES = ("eq1", "eq2")


def phase_error_bound(k: int, train_len: int) -> float:
    """Upper bound ``min(k / (L - 1), 1/2)`` on the k-photon phase error rate."""
    if train_len < 2:
        raise DomainError(f"train length must be >= 2, got {train_len}")
    if not 0 <= k <= 2:
        raise DomainError(f"phase error bound is used for k in 0..2, got {k}")
    return min(k / (train_len - 1), 0.5)


@dataclass(frozen=True)
class KeyRateResult:
    rate: float
    raw_rate: float
    q_bounds: YieldBounds
    phase_errors: tuple[float, float, float]
    ec_cost: float
    observed: ObservedStats
    diagnostics: ValidationReport | None = None
    d_bounds: DBounds | None = None
    scope: str = "eq1"

    @property
    def feasible(self) -> bool:
        return self.raw_rate > 0.0


def secure_key_rate(
    q_bounds: YieldBounds,
    obs: ObservedStats,
    params: ChannelParams,
    scope: str = "eq1",
    diagnostics: ValidationReport | None = None,
    d_bounds: DBounds | None = None,
) -> KeyRateResult:
    """Combine yield bounds and the signal QBER into a rate per pulse.

    The signal QBER ``E_mu`` plays the role of the bit error rate. Negative
    rates are reported as 0 with ``feasible`` False.
    """
    if scope not in RATE_SCOPES:
        raise DomainError(f"rate scope must be one of {RATE_SCOPES}, got {scope!r}")
    if not obs.q_mu > 0.0:
        raise UndefinedQBERError("signal gain is zero")
    L = params.train_len
    e_ph = tuple(phase_error_bound(k, L) for k in range(3))
    privacy = sum(q * (1.0 - binary_entropy(e)) for q, e in zip(q_bounds, e_ph))
    ec_cost = obs.q_mu * params.corr_eff * binary_entropy(obs.e_mu)
    if scope == "eq1":
        raw = (privacy - ec_cost) / L
    else:
        raw = privacy / L - ec_cost
    return KeyRateResult(
        rate=max(raw, 0.0),
        raw_rate=raw,
        q_bounds=q_bounds,
        phase_errors=e_ph,
        ec_cost=ec_cost,
        observed=obs,
        diagnostics=diagnostics,
        d_bounds=d_bounds,
        scope=scope,
    )


def evaluate_ensemble(
    ensemble: SourceEnsemble,
    params: ChannelParams,
    scope: str = "eq1",
    k_max: int | None = None,
) -> KeyRateResult:
    """Full pipeline at one operating point: validate, bound, rate.

    Raises:
        ValidationError: the ensemble fails the decoy conditions.
        DegenerateDenominatorError: a bound denominator is not positive.
    """
    if k_max is None:
        k_max = ensemble.default_k_max()
    bounds = ensemble_bounds(ensemble, max(k_max, ESTIMATOR_K_MAX))
    report = validate_decoy_conditions(ensemble, bounds, k_max)
    if not report:
        raise ValidationError(report)
    obs = observed_stats(ensemble, params)
    d, q = estimate(obs, bounds)
    return secure_key_rate(q, obs, params, scope=scope, diagnostics=report, d_bounds=d)
