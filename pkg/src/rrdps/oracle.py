"""Expectation-level ground truth for sources with per-train intensity errors.

Train ``i`` is assigned source ``x`` with probability ``P_x`` and then emits
a Poisson number of photons with mean ``x * m_i`` where ``m_i`` comes from an
:class:`ErrorPattern`. A k-photon train causes a count with probability
``Y_k`` whichever source produced it. Averaging over the pattern gives the
exact asymptotic gains the decoy estimator sees and the exact per-photon
yields it tries to bound, so no sampling tolerance is involved.

Photon statistics here go through :mod:`scipy.stats` rather than
:mod:`rrdps.core_math`, so that the oracle and the estimator share as little
code as possible.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import pdtrc
from scipy.stats import poisson

from .channel import ChannelParams, ObservedStats
from .errors import DegenerateDenominatorError, InadmissiblePatternError
from .estimator import coefficients, d0_lower, d1_lower, d2_lower
from .source import REFERENCE_ENSEMBLE, SOURCE_NAMES, SourceEnsemble, ensemble_bounds

SOUNDNESS_TOL = 1e-12
PATTERN_KINDS = ("constant-low", "constant-high", "alternating", "sinusoidal", "seeded-random")


@dataclass(frozen=True)
class ErrorPattern:
    """Relative intensity multipliers, one row per train index.

    ``multipliers`` has shape (M_eff,) when all four sources share the error
    at a given index, or (M_eff, 4) for independent per-source errors in the
    order (mu, nu1, nu2, nu3).
    """

    multipliers: np.ndarray
    tag: str = "custom"

    def __post_init__(self):
        m = np.asarray(self.multipliers, dtype=float)
        if m.ndim not in (1, 2) or m.shape[0] < 1 or (m.ndim == 2 and m.shape[1] != 4):
            raise ValueError(f"multipliers must have shape (M,) or (M, 4), got {m.shape}")
        object.__setattr__(self, "multipliers", m)

    @property
    def period(self) -> int:
        return self.multipliers.shape[0]

    def per_source(self) -> np.ndarray:
        """Multipliers as an (M_eff, 4) array."""
        m = self.multipliers
        return np.repeat(m[:, None], 4, axis=1) if m.ndim == 1 else m

    @classmethod
    def constant(cls, multiplier: float, tag: str = "constant") -> ErrorPattern:
        return cls(np.array([multiplier]), tag)

    @classmethod
    def constant_low(cls, delta: float) -> ErrorPattern:
        return cls(np.array([1.0 - delta]), "constant-low")

    @classmethod
    def constant_high(cls, delta: float) -> ErrorPattern:
        return cls(np.array([1.0 + delta]), "constant-high")

    @classmethod
    def alternating(cls, delta: float) -> ErrorPattern:
        return cls(np.array([1.0 - delta, 1.0 + delta]), "alternating")

    @classmethod
    def sinusoidal(cls, delta: float, period: int = 32, phase: float = 0.0) -> ErrorPattern:
        i = np.arange(period)
        return cls(1.0 + delta * np.sin(2 * np.pi * i / period + phase), "sinusoidal")

    @classmethod
    def seeded_random(cls, delta: float, length: int = 64, seed=None, independent: bool = True) -> ErrorPattern:
        rng = np.random.default_rng(seed)
        shape = (length, 4) if independent else (length,)
        return cls(rng.uniform(1.0 - delta, 1.0 + delta, size=shape), "seeded-random")

    def realized(self, ensemble: SourceEnsemble) -> np.ndarray:
        """Realized intensities, shape (M_eff, 4)."""
        return self.per_source() * np.array(ensemble.intensities)

    def check_admissible(self, ensemble: SourceEnsemble, atol: float = 1e-15) -> None:
        m = self.per_source()
        deltas = np.array(ensemble.deltas)
        if np.any(m < 1.0 - deltas - atol) or np.any(m > 1.0 + deltas + atol):
            raise InadmissiblePatternError("a multiplier lies outside [1 - delta, 1 + delta]")
        x = self.realized(ensemble)
        mu, n1, n2, n3 = x.T
        bad = ~((n1 >= n2) & (n2 >= n3) & (n3 >= 0) & (n1 + n2 + n3 < mu) & (mu < 1))
        if np.any(bad):
            i = int(np.argmax(bad))
            raise InadmissiblePatternError(f"train {i} realizes inadmissible intensities {x[i].tolist()}")


def default_cutoff(ensemble: SourceEnsemble, epsilon: float = 1e-12) -> int:
    top = max(s.high for s in ensemble.sources)
    k = 3
    while pdtrc(k, top) >= epsilon:
        k += 1
    return k


@dataclass(frozen=True)
class OracleTally:
    """Exact expected rates under a pattern.

    ``gains`` and ``qbers`` are ordered (mu, nu1, nu2, nu3);
    ``signal_yields[k]`` is the true ``Q_{k,mu}`` and ``yields[k]`` is ``Y_k``.
    ``pmf`` holds ``p_{k i, x}`` with shape (M_eff, 4, cutoff + 1).
    """

    gains: np.ndarray
    qbers: np.ndarray
    signal_yields: np.ndarray
    yields: np.ndarray
    pmf: np.ndarray
    select_probs: np.ndarray

    @property
    def cutoff(self) -> int:
        return len(self.yields) - 1

    def observed(self) -> ObservedStats:
        return ObservedStats(tuple(float(v) for v in self.gains), tuple(float(v) for v in self.qbers))

    def d_values(self, k: int) -> np.ndarray:
        """Reciprocal mixture weight ``d_{ki}`` for every train index i."""
        return 1.0 / (self.pmf[:, :, k] @ self.select_probs)

    def d_aggregate(self, k: int) -> float:
        """Expected ``D_k / M``: each train counts as a k-photon count with
        probability ``Y_k / d_{ki}`` and contributes ``d_{ki}``."""
        d = self.d_values(k)
        return float(np.mean(self.yields[k] / d * d))

    def counts(self, n_trains: int) -> dict:
        """Expected ``N_x`` and ``n_{k,mu}`` for ``n_trains`` trains."""
        n_x = {name: p * n_trains * q for name, p, q in zip(SOURCE_NAMES, self.select_probs, self.gains)}
        n_k_mu = self.select_probs[0] * n_trains * self.signal_yields
        return {"N": n_x, "n_k_mu": n_k_mu}


def expected_tally(
    pattern: ErrorPattern,
    ensemble: SourceEnsemble,
    params: ChannelParams,
    cutoff: int | None = None,
) -> OracleTally:
    pattern.check_admissible(ensemble)
    if cutoff is None:
        cutoff = default_cutoff(ensemble)
    k = np.arange(cutoff + 1)
    x = pattern.realized(ensemble)
    pmf = poisson.pmf(k[None, None, :], x[:, :, None])

    eta = params.total_eff
    pd = params.dark_rate
    yields = 1.0 - (1.0 - pd) * (1.0 - eta) ** k
    error_yields = params.misalignment * (1.0 - pd) * (1.0 - (1.0 - eta) ** k) + params.background_error * pd

    mean_pmf = pmf.mean(axis=0)
    gains = mean_pmf @ yields
    errors = mean_pmf @ error_yields
    qbers = np.divide(errors, gains, out=np.full(4, np.nan), where=gains > 0)
    return OracleTally(
        gains=gains,
        qbers=qbers,
        signal_yields=yields * mean_pmf[0],
        yields=yields,
        pmf=pmf,
        select_probs=np.array(ensemble.select_probs),
    )


@dataclass
class VerificationReport:
    passed: bool
    worst_margin: float
    margins: tuple = ()
    containment_ok: bool = True
    cause: str | None = None
    tag: str = ""
    extras: dict = field(default_factory=dict)

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        text = f"{status} worst_margin={self.worst_margin:.6e}"
        if self.cause:
            text += f" cause={self.cause}"
        return text


def verify_bounds(
    pattern: ErrorPattern,
    ensemble: SourceEnsemble,
    params: ChannelParams,
    cutoff: int | None = None,
    mutate: str | None = None,
    tol: float = SOUNDNESS_TOL,
) -> VerificationReport:
    """Run the estimator on exact expected gains and compare with the truth.

    Passes when ``Q_{k,mu}^L <= Q_{k,mu}^true + tol`` for k = 0, 1, 2 and every
    realized ``p_{k i, x}`` (k <= 3) lies inside its interval. ``mutate``
    names a coefficient (e.g. ``"q1"``) whose sign is flipped before the
    bounds are computed, as a negative control.
    """
    tally = expected_tally(pattern, ensemble, params, cutoff)
    bounds = ensemble_bounds(ensemble, 3)

    lower = np.stack([bounds[n].lower for n in SOURCE_NAMES])
    upper = np.stack([bounds[n].upper for n in SOURCE_NAMES])
    realized = tally.pmf[:, :, :4]
    slack = 1e-15
    containment_ok = bool(
        np.all(realized >= lower * (1 - 1e-12) - slack) and np.all(realized <= upper * (1 + 1e-12) + slack)
    )

    coeffs = coefficients(bounds)
    if mutate:
        coeffs = coeffs.flipped(mutate)
    obs = tally.observed()

    # Stage by stage so a degenerate later stage still reports earlier margins.
    margins: list[float] = []
    d_lower: list[float] = []
    cause = None
    try:
        d_lower.append(d0_lower(obs, bounds))
        margins.append(float(tally.signal_yields[0] - min(bounds.mu.lo(0) * d_lower[0], 1.0)))
        d_lower.append(d1_lower(obs, bounds, coeffs, d_lower[0]))
        margins.append(float(tally.signal_yields[1] - min(bounds.mu.lo(1) * d_lower[1], 1.0)))
        d_lower.append(d2_lower(obs, bounds, coeffs, *d_lower))
        margins.append(float(tally.signal_yields[2] - min(bounds.mu.lo(2) * d_lower[2], 1.0)))
    except DegenerateDenominatorError as exc:
        cause = f"degenerate: {exc}"

    worst = min(margins) if margins else float("-inf")
    passed = cause is None and containment_ok and worst >= -tol
    if not containment_ok:
        cause = "photon-number probability outside its interval"
    elif worst < -tol:
        exceeded = f"bound exceeds truth at k={int(np.argmin(margins))}"
        cause = exceeded if cause is None else f"{exceeded}; {cause}"
    return VerificationReport(
        passed,
        worst,
        tuple(margins),
        containment_ok,
        cause,
        pattern.tag,
        extras={"d_lower": tuple(d_lower), "d_true": tuple(tally.d_aggregate(k) for k in range(3))},
    )


@dataclass
class SuiteReport:
    cases: list[tuple[dict, VerificationReport]]

    @property
    def passed(self) -> bool:
        return all(r.passed for _, r in self.cases)

    @property
    def worst_margin(self) -> float:
        return min(r.worst_margin for _, r in self.cases)

    def lines(self) -> list[str]:
        out = []
        for case, r in self.cases:
            key = " ".join(f"{k}={v}" for k, v in case.items())
            out.append(f"{key} {r.line()}")
        n_fail = sum(not r.passed for _, r in self.cases)
        out.append(
            f"summary cases={len(self.cases)} failed={n_fail} worst_margin={self.worst_margin:.6e} "
            f"result={'PASS' if self.passed else 'FAIL'}"
        )
        return out


def run_suite(
    n_patterns: int = 100,
    deltas=(0.05,),
    distances=(0.0, 15.0, 30.0, 60.0),
    train_len: int = 16,
    intensities=REFERENCE_ENSEMBLE,
    preset: str = "table1",
    seed: int = 0,
    pattern_length: int = 64,
    mutate: str | None = None,
) -> SuiteReport:
    """Randomized soundness suite plus the deterministic pattern library.

    Each (delta, z) cell runs the four structured patterns and ``n_patterns``
    seeded-random ones. Per-case seeds are spawned from ``seed`` so the suite
    is reproducible case by case.
    """
    from .channel import preset as make_preset

    root = np.random.SeedSequence(seed)
    cases = []
    cell_seeds = root.spawn(len(deltas) * len(distances))
    cell = 0
    for delta in deltas:
        ensemble = SourceEnsemble.from_intensities(*intensities, delta)
        for z in distances:
            params = make_preset(preset, train_len, z)
            patterns = [
                ErrorPattern.constant_low(delta),
                ErrorPattern.constant_high(delta),
                ErrorPattern.alternating(delta),
                ErrorPattern.sinusoidal(delta),
            ]
            for j, child in enumerate(cell_seeds[cell].spawn(n_patterns)):
                p = ErrorPattern.seeded_random(delta, pattern_length, seed=child, independent=j % 2 == 0)
                patterns.append(p)
            cell += 1
            for j, p in enumerate(patterns):
                report = verify_bounds(p, ensemble, params, mutate=mutate)
                cases.append(({"delta": delta, "z": z, "case": j, "pattern": p.tag}, report))
    return SuiteReport(cases)
