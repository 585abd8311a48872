import math

import numpy as np
import pytest
from scipy import integrate

from hawkesaug import (
    EventSeries,
    FitOptions,
    HawkesParams,
    ModelTag,
    PoissonParams,
    SimConfig,
    Variant,
    Verdict,
    aic,
    aicc,
    compensator,
    fit_mle,
    intensity_at,
    likelihood_ridge_scan,
    loglik_hawkes,
    loglik_poisson,
    select_model,
    simulate_hawkes,
    simulate_poisson,
)
from hawkesaug.inference import (
    THRESHOLD_01,
    THRESHOLD_05,
    FitResult,
    SelectionVerdict,
    aic_value,
    aicc_value,
    fit_hawkes_pooled,
    loglik_hawkes_grad,
)

from conftest import brute_loglik, random_params, random_series


def quad_compensator(params, series, T):
    knots = np.concatenate((series.times, [T]))
    total = 0.0
    for a, b in zip(knots[:-1], knots[1:]):
        if b > a:
            total += integrate.quad(lambda t: intensity_at(params, series, t), a, b,
                                    epsabs=0, epsrel=1e-13, limit=200)[0]
    return total


def test_poisson_loglik_examples():
    s = EventSeries([0.0, 1.0, 2.0])
    assert loglik_poisson(PoissonParams(2.0), s) == pytest.approx(3 * math.log(2) - 4, abs=1e-14)
    assert loglik_poisson(PoissonParams(1.0), EventSeries([0.0, 0.7, 3.1])) == pytest.approx(-3.1)


def test_poisson_mle_maximizes_grid(rng):
    s = random_series(rng, 12, scale=0.7)
    fit = fit_mle(ModelTag.POISSON, s)
    grid = np.linspace(0.2, 5.0, 4001) * fit.params.lambda_p
    vals = [loglik_poisson(PoissonParams(r), s) for r in grid]
    assert fit.loglik >= max(vals)
    assert grid[int(np.argmax(vals))] == pytest.approx(fit.params.lambda_p, rel=2e-3)


def test_poisson_fit_ten_events():
    s = EventSeries(np.linspace(0, 5, 10))
    assert fit_mle("poisson", s).params.lambda_p == 2.0


def test_compensator_poisson_case():
    p = HawkesParams(1.3, 0.0, 2.0)
    assert compensator(p, EventSeries([0.0, 1.0, 4.0])) == pytest.approx(1.3 * 4.0, rel=1e-15)


def test_compensator_matches_quadrature_ridge_instance():
    p = HawkesParams.full(1.0, 1.8, 2.0)
    s = EventSeries([0.0, 1.1, 1.5, 4.2, 7.3, 7.9], 10.0)
    assert compensator(p, s) == pytest.approx(quad_compensator(p, s, 10.0), rel=1e-8)


def test_compensator_matches_quadrature_random(rng):
    for _ in range(15):
        p = random_params(rng)
        s = random_series(rng, int(rng.integers(1, 12)), tail=rng.uniform(0, 2))
        q = quad_compensator(p, s, s.window_end)
        assert compensator(p, s) == pytest.approx(q, rel=1e-8)


def test_compensator_long_tail_limit():
    p = HawkesParams.full(0.5, 4.0, 8.0)
    s = EventSeries([0.0, 0.5, 1.0], 60.0)
    assert compensator(p, s) == pytest.approx(0.5 * 60 + 0.5 * 3, rel=1e-12)


def test_compensator_rejects_early_T():
    with pytest.raises(ValueError):
        compensator(HawkesParams.full(1, 1, 2), EventSeries([0.0, 2.0]), 1.0)


def test_recursion_matches_direct_sum(rng):
    for _ in range(25):
        p = random_params(rng)
        s = random_series(rng, 50, scale=rng.uniform(0.1, 2.0), tail=rng.uniform(0, 1))
        assert loglik_hawkes(p, s) == pytest.approx(brute_loglik(p, s), rel=1e-10)


def test_hawkes_nests_poisson(rng):
    s = random_series(rng, 20)
    p = HawkesParams.full(1.7, 0.0, 3.0)
    assert loglik_hawkes(p, s) == pytest.approx(loglik_poisson(PoissonParams(1.7), s), rel=1e-14)


def test_single_event_shifted():
    p = HawkesParams(1.0, 2.0, 3.0, 4.0)
    s = EventSeries([0.0], 2.0)
    assert loglik_hawkes(p, s) == pytest.approx(math.log(4.0) - compensator(p, s), rel=1e-14)


def test_conditioning_drops_first_factor(rng):
    for _ in range(10):
        p = random_params(rng)
        s = random_series(rng, 15)
        diff = loglik_hawkes(p, s) - loglik_hawkes(p, s, condition_on_first=True)
        assert diff == pytest.approx(math.log(p.gamma), abs=1e-10)
    s = random_series(rng, 15)
    assert (loglik_poisson(PoissonParams(2.0), s) - loglik_poisson(PoissonParams(2.0), s, True)
            == pytest.approx(math.log(2.0)))


def test_gradient_matches_finite_differences(rng):
    for _ in range(20):
        p = random_params(rng)
        s = random_series(rng, 30, scale=0.6, tail=0.5)
        _, g = loglik_hawkes_grad(p, s)
        theta = np.array([p.lambda0, p.alpha, p.delta, p.gamma])
        for k in range(4):
            h = 1e-6 * max(theta[k], 1e-3)
            up, dn = theta.copy(), theta.copy()
            up[k] += h
            dn[k] -= h
            num = (loglik_hawkes(HawkesParams(*up), s) - loglik_hawkes(HawkesParams(*dn), s)) / (2 * h)
            assert g[k] == pytest.approx(num, rel=1e-5, abs=1e-6)


def test_gradient_full_variant_folds_gamma(rng):
    p = HawkesParams.full(1.2, 2.0, 4.0)
    s = random_series(rng, 20)
    _, g = loglik_hawkes_grad(p, s)
    h = 1e-6
    num = (loglik_hawkes(HawkesParams.full(1.2 + h, 2.0, 4.0), s)
           - loglik_hawkes(HawkesParams.full(1.2 - h, 2.0, 4.0), s)) / (2 * h)
    assert g.shape == (3,) and g[0] == pytest.approx(num, rel=1e-6)


def test_time_rescaling_identity(rng):
    for _ in range(20):
        p = random_params(rng)
        s = random_series(rng, 25)
        c = rng.uniform(0.1, 10)
        diff = loglik_hawkes(p.rescaled(c), s.rescaled(c)) - loglik_hawkes(p, s)
        assert diff == pytest.approx(-s.n_events * math.log(c), abs=1e-9)


def test_poisson_aic_identity(rng):
    s = random_series(rng, 17, scale=1.3)
    fit = fit_mle(ModelTag.POISSON, s)
    n, T = s.n_events, s.window_end
    assert aic(fit) == pytest.approx(2 - 2 * (n * math.log(n / T) - n), rel=1e-14)


def test_aic_aicc_examples():
    assert aic_value(-10.0, 1) == 22.0
    assert aicc_value(-10.0, 4, 30) == pytest.approx(aic_value(-10.0, 4) + 40 / 25)
    assert math.isnan(aicc_value(-10.0, 4, 5))
    assert math.exp(-THRESHOLD_05 / 2) == pytest.approx(0.05)
    assert math.exp(-6 / 2) == pytest.approx(0.0498, abs=1e-4)
    assert THRESHOLD_05 == pytest.approx(5.9915, abs=1e-4)
    assert THRESHOLD_01 == pytest.approx(9.2103, abs=1e-4)


def test_fitresult_fields():
    f = FitResult(ModelTag.HAWKES_SHIFTED, HawkesParams(1, 1, 2, 3), -10.0, 30, 4)
    assert f.aic == 28.0 and f.aicc == pytest.approx(28 + 40 / 25)
    assert aicc(f) == f.aicc and f.aicc_defined
    g = FitResult(ModelTag.HAWKES_SHIFTED, HawkesParams(1, 1, 2, 3), -10.0, 5, 4)
    assert not g.aicc_defined


@pytest.mark.parametrize("delta, verdict, level", [
    (-7.0, Verdict.HAWKES, "0.05"),
    (0.0, Verdict.INCONCLUSIVE, "basic"),
    (-10.0, Verdict.HAWKES, "0.01"),
    (-3.0, Verdict.INCONCLUSIVE, "basic"),
    (4.0, Verdict.INCONCLUSIVE, "basic"),
    (6.5, Verdict.POISSON, "0.05"),
])
def test_verdict_bands(delta, verdict, level):
    v = SelectionVerdict.from_delta(delta)
    assert v.verdict is verdict and v.confidence_level == level


def test_verdict_basic_level():
    v = SelectionVerdict.from_delta(-3.0)
    assert v.at("basic") is Verdict.HAWKES and v.at("0.05") is Verdict.INCONCLUSIVE
    assert SelectionVerdict.from_delta(2.0).at("basic") is Verdict.POISSON


def test_select_model_mismatch(rng):
    a, b = random_series(rng, 10), random_series(rng, 11)
    with pytest.raises(ValueError):
        select_model(fit_mle("poisson", a), fit_mle("poisson", b))


def test_nesting_of_fits(rng):
    for k in range(8):
        s = random_series(rng, int(rng.integers(3, 30)), scale=rng.uniform(0.2, 2))
        opts = FitOptions(seed=k)
        lp = fit_mle("poisson", s).loglik
        lf = fit_mle("hawkes_full", s, opts).loglik
        ls = fit_mle("hawkes_shifted", s, opts).loglik
        assert ls >= lf - 1e-6 and lf >= lp - 1e-6


def test_fit_on_poisson_data_small_gain():
    gains = []
    for k in range(50):
        s = simulate_poisson(PoissonParams(2.0), SimConfig(seed=k, n_events=40))
        gains.append(fit_mle("hawkes_full", s, FitOptions(seed=k)).loglik - fit_mle("poisson", s).loglik)
    gains = np.array(gains)
    assert np.all(gains >= -1e-6)
    assert np.mean(gains < 3) >= 0.8


def test_fit_recovers_truth_on_long_series():
    truth = HawkesParams.full(1.0, 3.0, 10.0)
    s = simulate_hawkes(truth, SimConfig(seed=3, n_events=5000))
    fit = fit_mle("hawkes_full", s)
    assert fit.converged
    assert fit.params.lambda0 == pytest.approx(1.0, rel=0.15)
    assert fit.params.alpha == pytest.approx(3.0, rel=0.2)
    assert fit.params.delta == pytest.approx(10.0, rel=0.25)


def test_fit_deterministic(rng):
    s = random_series(rng, 25)
    a = fit_mle("hawkes_shifted", s, FitOptions(seed=4))
    b = fit_mle("hawkes_shifted", s, FitOptions(seed=4))
    assert a.params == b.params and a.loglik == b.loglik


def test_fit_trace_and_stability(rng):
    s = simulate_hawkes(HawkesParams.full(0.2, 1.8, 2.0), SimConfig(seed=1, n_events=200))
    fit = fit_mle("hawkes_full", s, FitOptions(seed=1))
    assert fit.params.branching_ratio <= 1 - 1e-6 + 1e-12
    assert len(fit.optimizer_trace) >= 8


def test_single_event_fit_flagged():
    fit = fit_mle("hawkes_full", EventSeries([0.0], 1.0))
    assert fit.at_boundary


def test_pooled_conditioned_poisson_nesting(rng):
    series = [random_series(rng, 10, id=str(i)) for i in range(4)]
    opts = FitOptions(condition_on_first=True)
    _, ll, *_ = fit_hawkes_pooled(series, Variant.FULL, opts)
    n = sum(s.n_events - 1 for s in series)
    T = sum(s.window_end for s in series)
    assert ll >= n * math.log(n / T) - n - 1e-9


def test_ridge_scan_alpha_zero_row():
    s = EventSeries([0.0, 1.1, 1.5, 4.2, 7.3, 7.9], 10.0)
    scan = likelihood_ridge_scan(s, 0.3, np.linspace(0, 3, 13), np.linspace(0.5, 5, 10))
    row = scan.loglik[0]
    assert np.allclose(row, loglik_poisson(PoissonParams(0.3), s), rtol=0, atol=1e-12)
    assert scan.ridge_variation < scan.grid_variation


def test_ridge_grid_max_below_fit(rng):
    s = EventSeries([0.0, 1.1, 1.5, 4.2, 7.3, 7.9], 10.0)
    fit = fit_mle("hawkes_full", s)
    lam0 = fit.params.lambda0
    scan = likelihood_ridge_scan(s, lam0, np.linspace(0.01, 5, 200), np.linspace(0.1, 8, 200))
    assert scan.argmax()[2] <= fit.loglik + 1e-9
    assert scan.argmax()[2] >= fit.loglik - 0.05
