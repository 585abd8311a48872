import math

import numpy as np
import pytest

from hawkesaug import (
    EventSeries,
    HawkesParams,
    InsufficientDataError,
    ParameterDomainError,
    PoissonParams,
    SupercriticalError,
    Variant,
    branching_ratio,
    interarrivals,
    intensity_at,
    stationary_mean,
)
from hawkesaug.core import InterarrivalSample, DataValidationError


def test_intensity_baseline_without_excitation():
    p = HawkesParams(1.0, 0.0, 4.0, 1.0)
    s = EventSeries([0.0, 0.3, 2.0])
    for t in (0.0, 0.3, 1.0, 5.0):
        assert intensity_at(p, s, t) == 1.0


def test_intensity_at_origin_is_gamma():
    p = HawkesParams(1.0, 2.0, 3.5, 5.0)
    assert intensity_at(p, EventSeries([0.0]), 0.0) == 5.0


def test_intensity_hand_value():
    p = HawkesParams(1.0, 3.0, 6.0, 1.0)
    expected = 1 + 3 * (math.exp(-1.2) + math.exp(-0.6))
    assert intensity_at(p, EventSeries([0.0, 0.1], 0.2), 0.2) == pytest.approx(expected, rel=1e-14)


def test_intensity_excludes_event_at_t():
    p = HawkesParams.full(1.0, 3.0, 6.0)
    s = EventSeries([0.0, 0.5])
    assert intensity_at(p, s, 0.5) == pytest.approx(1 + 3 * math.exp(-3.0), rel=1e-14)


def test_intensity_full_variant_matches_unshifted_formula(rng):
    for _ in range(20):
        lam0, d = rng.uniform(0.1, 3), rng.uniform(0.5, 5)
        p = HawkesParams.full(lam0, d * rng.uniform(0, 0.9), d)
        times = np.concatenate(([0.0], np.cumsum(rng.exponential(1.0, 9))))
        s = EventSeries(times)
        t = rng.uniform(0, times[-1] + 1)
        past = times[times < t]
        direct = lam0 + p.alpha * np.exp(-d * (t - past)).sum()
        assert intensity_at(p, s, t) == pytest.approx(direct, rel=1e-12)


def test_intensity_negative_time_rejected():
    with pytest.raises(ValueError):
        intensity_at(HawkesParams.full(1, 1, 2), EventSeries([0.0]), -1.0)


@pytest.mark.parametrize("params, expected", [
    ((1.0, 2.0, 3.5), 7.0 / 3.0),
    ((2.0, 0.0, 1.0), 2.0),
    ((1.0, 3.0, 6.0), 2.0),
])
def test_stationary_mean(params, expected):
    assert stationary_mean(HawkesParams.full(*params)) == pytest.approx(expected, rel=1e-14)


def test_stationary_mean_supercritical():
    p = HawkesParams.full(1.0, 3.0, 3.0)
    with pytest.raises(SupercriticalError):
        stationary_mean(p)


@pytest.mark.parametrize("alpha, delta, expected", [(1.8, 2.0, 0.9), (0.0, 5.0, 0.0), (3.0, 10.0, 0.3)])
def test_branching_ratio(alpha, delta, expected):
    p = HawkesParams.full(1.0, alpha, delta)
    assert branching_ratio(p) == pytest.approx(expected, abs=1e-15)
    assert p.branching_ratio == pytest.approx(expected, abs=1e-15)


def test_interarrivals():
    assert interarrivals(EventSeries([0, 1, 3, 6])).deltas.tolist() == [1, 2, 3]
    assert interarrivals(EventSeries([0, 0.5])).deltas.tolist() == [0.5]
    h = 0.25
    assert np.allclose(interarrivals(EventSeries(h * np.arange(8))).deltas, h)
    with pytest.raises(InsufficientDataError):
        interarrivals(EventSeries([0.0]))


def test_interarrival_sample_positive():
    with pytest.raises(DataValidationError):
        InterarrivalSample([1.0, 0.0])


def test_event_series_empty():
    with pytest.raises(InsufficientDataError):
        EventSeries([])


@pytest.mark.parametrize("times", [[0.1, 1.0], [0.0, 1.0, 1.0], [0.0, 2.0, 1.0], [0.0, np.nan]])
def test_event_series_rejects(times):
    with pytest.raises(DataValidationError):
        EventSeries(times)


def test_event_series_window():
    s = EventSeries([0.0, 1.0, 2.5])
    assert s.window_end == 2.5
    assert EventSeries([0.0, 1.0], 4.0).window_end == 4.0
    with pytest.raises(DataValidationError):
        EventSeries([0.0, 3.0], 2.0)
    a = EventSeries.anchored([5.0, 6.0, 9.0])
    assert a.times.tolist() == [0.0, 1.0, 4.0]
    with pytest.raises(ValueError):
        s.times[0] = 1.0


@pytest.mark.parametrize("args", [(0.0, 1.0, 1.0), (1.0, -1.0, 1.0), (1.0, 1.0, 0.0), (1.0, 1.0, 1.0, -0.5)])
def test_params_domain(args):
    with pytest.raises(ParameterDomainError):
        HawkesParams(*args)


def test_full_variant_forces_gamma():
    assert HawkesParams(1.5, 1.0, 2.0, None, Variant.FULL).gamma == 1.5
    assert HawkesParams(1.5, 1.0, 2.0).gamma == 1.5
    with pytest.raises(ParameterDomainError):
        HawkesParams(1.5, 1.0, 2.0, 9.0, Variant.FULL)
    with pytest.raises(ParameterDomainError):
        PoissonParams(0.0)
