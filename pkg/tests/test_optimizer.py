import pytest

from rrdps.channel import ChannelParams
from rrdps.errors import DomainError, NoFeasiblePointError
from rrdps.keyrate import evaluate_ensemble
from rrdps.optimizer import SearchConfig, optimize_intensities, run_sweep, sweep_delta
from rrdps.source import REFERENCE_ENSEMBLE, SourceEnsemble

FAST = SearchConfig(resolution=7, rounds=8, multistart=2)


def test_deterministic(table1):
    a = optimize_intensities(table1, 0.05, FAST)
    b = optimize_intensities(table1, 0.05, FAST)
    assert a[0] == b[0]
    assert a[1].rate == b[1].rate


def test_beats_reference_ensemble(table1):
    for delta in (0.0, 0.05):
        ens, res = optimize_intensities(table1, delta, FAST)
        ref = evaluate_ensemble(SourceEnsemble.from_intensities(*REFERENCE_ENSEMBLE, delta), table1)
        assert res.rate >= ref.rate
        assert res.diagnostics.ok
        assert not ens.ordering_violations()


def test_extra_start_is_never_worsened(table1):
    start = (0.6, 0.08, 0.03, 0.004)
    base = evaluate_ensemble(SourceEnsemble.from_intensities(*start, 0.05), table1).raw_rate
    _, res = optimize_intensities(table1, 0.05, SearchConfig(rounds=1, multistart=0), starts=[start])
    assert res.raw_rate >= base


def test_more_rounds_never_hurt(table1):
    rates = [optimize_intensities(table1, 0.05, SearchConfig(rounds=r, multistart=1))[1].rate for r in (1, 4, 10)]
    assert rates == sorted(rates)


def test_reported_intensities_reproduce_rate(table1):
    ens, res = optimize_intensities(table1, 0.05, FAST)
    again = SourceEnsemble.from_intensities(*(float(f"{x:.12g}") for x in ens.intensities), 0.05)
    assert evaluate_ensemble(again, table1).rate == res.rate


def test_far_distance_has_zero_rate():
    ens, res = optimize_intensities(ChannelParams.table1(16, 500.0), 0.05, FAST)
    assert res.rate == 0.0 and not res.feasible


def test_no_admissible_point():
    # delta = 0.9 leaves no room for nu1 + nu2 + nu3 < mu at the interval ends.
    with pytest.raises(NoFeasiblePointError):
        optimize_intensities(ChannelParams.table1(16, 30.0), 0.9, FAST)


@pytest.mark.parametrize("bad", [dict(resolution=2), dict(rounds=0), dict(shrink=1.0), dict(mu_box=(0.5, 1.2))])
def test_search_config_validated(bad):
    with pytest.raises(DomainError):
        SearchConfig(**bad)


def test_sweep_structure_and_ratios():
    res = run_sweep([16], [0.05], [20.0, 40.0], FAST)
    assert [(r.delta, r.z_km) for r in res.records] == [(0.0, 20.0), (0.0, 40.0), (0.05, 20.0), (0.05, 40.0)]
    for r in res.select(delta=0.0):
        assert r.rate_ratio == 1.0
    for r in res.select(delta=0.05):
        assert 0.0 < r.rate_ratio <= 1.0


def test_sweep_fixed_intensities_excludes_invalid_points():
    res = run_sweep([16], [0.05], [30.0], fixed=(0.5, 0.1, 0.097, 0.01))
    # At delta = 0 the ensemble is admissible; at 0.05 the decoy intervals overlap.
    assert [r.delta for r in res.records] == [0.0]
    assert len(res.excluded) == 1 and res.excluded[0][1] == 0.05


def test_optimized_rate_monotone_in_delta():
    res = sweep_delta([0.02, 0.05, 0.08], [30.0], search=FAST)
    _, rates = zip(*[(r.delta, r.rate) for r in res.records])
    assert list(rates) == sorted(rates, reverse=True)


def test_parallel_sweep_matches_serial():
    serial = run_sweep([8], [0.05], [10.0, 30.0], FAST)
    parallel = run_sweep([8], [0.05], [10.0, 30.0], FAST, workers=2)
    assert serial.records == parallel.records
