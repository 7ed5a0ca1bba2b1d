"""Fiber channel and detector model: gains, QBERs and photon-number yields.

All functions accept scalars or numpy arrays for the intensity argument.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import DomainError, UndefinedQBERError
from .source import SourceEnsemble

BASE_DARK_RATE = 1.7e-6


@dataclass(frozen=True)
class ChannelParams:
    """Detector and fiber parameters for one operating point.

    ``dark_rate`` is per pulse-train, i.e. already multiplied by the train
    length when built with :meth:`table1`.
    """

    dark_rate: float
    misalignment: float
    background_error: float
    detector_eff: float
    loss_coeff: float
    distance: float
    train_len: int
    corr_eff: float = 1.16

    def __post_init__(self):
        for name in ("dark_rate", "misalignment", "background_error", "detector_eff"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise DomainError(f"{name} must lie in [0, 1], got {value!r}")
        if self.loss_coeff < 0 or self.distance < 0:
            raise DomainError("loss coefficient and distance must be >= 0")
        if int(self.train_len) != self.train_len or self.train_len < 2:
            raise DomainError(f"train length must be an integer >= 2, got {self.train_len!r}")
        if self.corr_eff < 1.0:
            raise DomainError(f"error-correction efficiency must be >= 1, got {self.corr_eff!r}")

    @classmethod
    def table1(cls, train_len: int = 16, distance: float = 0.0) -> ChannelParams:
        """Simulation defaults: p_d = 1.7e-6 * L, e_d = 3.3%, e_0 = 50%,
        eta_B = 4.5%, alpha = 0.2 dB/km, f = 1.16."""
        return cls(
            dark_rate=BASE_DARK_RATE * train_len,
            misalignment=0.033,
            background_error=0.5,
            detector_eff=0.045,
            loss_coeff=0.2,
            distance=float(distance),
            train_len=int(train_len),
            corr_eff=1.16,
        )

    def at(self, **changes) -> ChannelParams:
        return replace(self, **changes)

    @property
    def total_eff(self) -> float:
        return transmittance(self) * self.detector_eff


PRESETS = {"table1": ChannelParams.table1}


def preset(name: str, train_len: int, distance: float = 0.0) -> ChannelParams:
    try:
        factory = PRESETS[name]
    except KeyError:
        raise DomainError(f"unknown channel preset {name!r}; known: {sorted(PRESETS)}") from None
    return factory(train_len=train_len, distance=distance)


@dataclass(frozen=True)
class ObservedStats:
    """Per-source gains and QBERs, ordered (mu, nu1, nu2, nu3)."""

    gains: tuple[float, float, float, float]
    qbers: tuple[float, float, float, float]

    @property
    def q_mu(self) -> float:
        return self.gains[0]

    @property
    def q_nu1(self) -> float:
        return self.gains[1]

    @property
    def q_nu2(self) -> float:
        return self.gains[2]

    @property
    def q_nu3(self) -> float:
        return self.gains[3]

    @property
    def e_mu(self) -> float:
        return self.qbers[0]


def transmittance(params: ChannelParams) -> float:
    return 10.0 ** (-params.loss_coeff * params.distance / 10.0)


def gain(intensity, params: ChannelParams):
    """Overall count rate ``1 - (1 - p_d) exp(-x eta_t eta_B)``."""
    x = np.asarray(intensity, dtype=float)
    if np.any(x < 0):
        raise DomainError("intensity must be >= 0")
    out = -(1.0 - params.dark_rate) * np.expm1(-x * params.total_eff) + params.dark_rate
    return float(out) if out.ndim == 0 else out


def error_gain(intensity, params: ChannelParams):
    """Numerator of the QBER: ``e_d (1 - p_d)(1 - exp(-x eta)) + e_0 p_d``."""
    x = np.asarray(intensity, dtype=float)
    clicks = -np.expm1(-x * params.total_eff)
    out = params.misalignment * (1.0 - params.dark_rate) * clicks + params.background_error * params.dark_rate
    return float(out) if out.ndim == 0 else out


def qber(intensity, params: ChannelParams):
    q = np.asarray(gain(intensity, params))
    if np.any(q <= 0):
        raise UndefinedQBERError("QBER undefined where the gain is zero")
    out = np.asarray(error_gain(intensity, params)) / q
    return float(out) if out.ndim == 0 else out


def yield_k(k, params: ChannelParams):
    """Probability that a k-photon train causes a count: ``1 - (1 - p_d)(1 - eta)^k``."""
    k = np.asarray(k)
    if np.any(k < 0):
        raise DomainError("photon number must be >= 0")
    eta = params.total_eff
    out = 1.0 - (1.0 - params.dark_rate) * (1.0 - eta) ** k
    return float(out) if out.ndim == 0 else out


def error_yield_k(k, params: ChannelParams):
    """Erroneous-count probability ``e_k Y_k`` of a k-photon train.

    ``e_d (1 - p_d)(1 - (1 - eta)^k) + e_0 p_d``; Poisson-averaging this over k
    reproduces :func:`error_gain` exactly.
    """
    k = np.asarray(k)
    eta = params.total_eff
    out = (
        params.misalignment * (1.0 - params.dark_rate) * (1.0 - (1.0 - eta) ** k)
        + params.background_error * params.dark_rate
    )
    return float(out) if out.ndim == 0 else out


def observed_stats(ensemble: SourceEnsemble, params: ChannelParams) -> ObservedStats:
    """Gains and QBERs each source would show with no intensity error."""
    xs = np.array(ensemble.intensities)
    q = gain(xs, params)
    e = np.where(q > 0, error_gain(xs, params) / np.where(q > 0, q, 1.0), np.nan)
    return ObservedStats(tuple(float(v) for v in q), tuple(float(v) for v in e))
