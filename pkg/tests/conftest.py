import numpy as np
import pytest

from hawkesaug import EventSeries, HawkesParams, Variant


def random_series(rng, n, scale=1.0, tail=0.0, id=""):
    times = np.concatenate(([0.0], np.cumsum(rng.exponential(scale, n - 1))))
    return EventSeries(times, times[-1] + tail, id)


def random_params(rng, variant=Variant.SHIFTED):
    delta = rng.uniform(0.3, 8.0)
    alpha = delta * rng.uniform(0.0, 0.95)
    lam0 = rng.uniform(0.1, 3.0)
    gamma = rng.uniform(0.05, 6.0) if variant is Variant.SHIFTED else None
    return HawkesParams(lam0, alpha, delta, gamma, variant)


def brute_loglik(params, series):
    """O(N^2) sum of log-intensities minus a separately written compensator."""
    t, T = series.times, series.window_end
    lam0, a, d, g = params.lambda0, params.alpha, params.delta, params.gamma
    total = 0.0
    for i in range(t.size):
        total += np.log(lam0 + a * sum(np.exp(-d * (t[i] - t[j])) for j in range(i))
                        + (g - lam0) * np.exp(-d * t[i]))
    comp = lam0 * T + (g - lam0) * (1 - np.exp(-d * T)) / d
    comp += a / d * sum(1 - np.exp(-d * (T - s)) for s in t)
    return total - comp


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    mod = __import__("sys").modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(mod.RESULTS):
        terminalreporter.write_line(mod.RESULTS[k])
