import numpy as np
import pytest
from scipy.stats import poisson

from rrdps.channel import (
    ChannelParams,
    error_gain,
    error_yield_k,
    gain,
    observed_stats,
    preset,
    qber,
    transmittance,
    yield_k,
)
from rrdps.errors import DomainError, UndefinedQBERError

TEN_TO_MINUS_0_6 = 0.2511886431509580111085032
GAIN_T1_30KM = 0.005662850115003675099157666
QBER_T1_30KM = 0.03524311075554429650404967


@pytest.mark.parametrize(
    "alpha, z, expected",
    [(0.2, 0.0, 1.0), (0.2, 50.0, 0.1), (0.2, 30.0, TEN_TO_MINUS_0_6), (0.0, 100.0, 1.0)],
)
def test_transmittance_goldens(alpha, z, expected):
    params = ChannelParams.table1().at(loss_coeff=alpha, distance=z)
    assert transmittance(params) == pytest.approx(expected, rel=1e-12)


def test_gain_and_qber_golden(table1):
    assert gain(0.5, table1) == pytest.approx(GAIN_T1_30KM, rel=1e-12)
    assert qber(0.5, table1) == pytest.approx(QBER_T1_30KM, rel=1e-12)


def test_zero_intensity_limit(table1):
    assert gain(0.0, table1) == table1.dark_rate
    assert qber(0.0, table1) == pytest.approx(table1.background_error)


def test_long_distance_qber_tends_to_background():
    far = ChannelParams.table1(16, 1000.0)
    assert qber(0.5, far) == pytest.approx(0.5, rel=1e-9)


def test_qber_undefined_without_counts():
    noiseless_dark = ChannelParams.table1(16, 1000.0).at(dark_rate=0.0)
    with pytest.raises(UndefinedQBERError):
        qber(0.0, noiseless_dark)


def test_vectorized_matches_scalar(table1):
    xs = np.array([0.0, 0.01, 0.3, 0.9])
    np.testing.assert_allclose(gain(xs, table1), [gain(x, table1) for x in xs], rtol=0)
    np.testing.assert_allclose(qber(xs, table1), [qber(x, table1) for x in xs], rtol=0)


def test_yield_endpoints(table1):
    assert yield_k(0, table1) == pytest.approx(table1.dark_rate, rel=1e-12)
    assert np.all(np.diff(yield_k(np.arange(10), table1)) > 0)
    assert error_yield_k(0, table1) == pytest.approx(table1.background_error * table1.dark_rate)


@pytest.mark.parametrize("x", [0.01, 0.2, 0.5, 0.95])
@pytest.mark.parametrize("z", [0.0, 25.0, 80.0])
def test_photon_number_series_reproduces_gain(x, z):
    params = ChannelParams.table1(12, z)
    k = np.arange(60)
    p = poisson.pmf(k, x)
    assert abs(p @ yield_k(k, params) - gain(x, params)) < 1e-12
    assert abs(p @ error_yield_k(k, params) - error_gain(x, params)) < 1e-12


def test_observed_stats_order(table1):
    from rrdps.source import SourceEnsemble

    obs = observed_stats(SourceEnsemble.from_intensities(0.5, 0.1, 0.05, 0.01), table1)
    assert obs.q_mu > obs.q_nu1 > obs.q_nu2 > obs.q_nu3
    assert obs.e_mu == pytest.approx(QBER_T1_30KM, rel=1e-12)


def test_table1_dark_rate_scales_with_train_length():
    assert ChannelParams.table1(20).dark_rate == pytest.approx(20 * 1.7e-6)


@pytest.mark.parametrize("change", [dict(misalignment=1.5), dict(distance=-1.0), dict(train_len=1), dict(corr_eff=0.9)])
def test_params_validated(change):
    with pytest.raises(DomainError):
        ChannelParams.table1().at(**change)


def test_unknown_preset():
    with pytest.raises(DomainError):
        preset("nope", 16)
