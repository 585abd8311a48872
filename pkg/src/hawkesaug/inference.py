"""Likelihoods, maximum-likelihood fitting and AIC-based model selection."""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Sequence

import numpy as np
from scipy.optimize import minimize

from . import _kernels
from .core import (
    EventSeries,
    HawkesParams,
    InsufficientDataError,
    PoissonParams,
    Variant,
)

# -2 ln(0.05) and -2 ln(0.01): relative likelihood 5% / 1%
THRESHOLD_05 = -2.0 * math.log(0.05)
THRESHOLD_01 = -2.0 * math.log(0.01)

_PENALTY = 1e10


class ModelTag(str, Enum):
    POISSON = "poisson"
    HAWKES_FULL = "hawkes_full"
    HAWKES_SHIFTED = "hawkes_shifted"

    @property
    def k(self) -> int:
        return {"poisson": 1, "hawkes_full": 3, "hawkes_shifted": 4}[self.value]

    @property
    def variant(self) -> Variant | None:
        if self is ModelTag.POISSON:
            return None
        return Variant.FULL if self is ModelTag.HAWKES_FULL else Variant.SHIFTED


def aic_value(loglik: float, k: int) -> float:
    return 2.0 * k - 2.0 * loglik


def aicc_value(loglik: float, k: int, n: int) -> float:
    """AICc, or NaN when ``n <= k + 1`` (correction undefined)."""
    if n <= k + 1:
        return math.nan
    return aic_value(loglik, k) + 2.0 * k * (k + 1) / (n - k - 1)


@dataclass(frozen=True)
class FitResult:
    model_tag: ModelTag
    params: PoissonParams | HawkesParams
    loglik: float
    n_events: int
    k: int
    optimizer_trace: tuple = ()
    converged: bool = True
    at_boundary: bool = False
    aic: float = field(init=False)
    aicc: float = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "aic", aic_value(self.loglik, self.k))
        object.__setattr__(self, "aicc", aicc_value(self.loglik, self.k, self.n_events))

    @property
    def aicc_defined(self) -> bool:
        return not math.isnan(self.aicc)

    def summary(self) -> dict:
        return {
            "model": self.model_tag.value,
            "params": self.params.as_dict(),
            "loglik": self.loglik,
            "n_events": self.n_events,
            "k": self.k,
            "aic": self.aic,
            "aicc": None if math.isnan(self.aicc) else self.aicc,
            "converged": self.converged,
            "at_boundary": self.at_boundary,
        }


def aic(fit) -> float:
    return fit.aic


def aicc(fit) -> float:
    return fit.aicc


# ---------------------------------------------------------------------------
# likelihoods


def loglik_poisson(params: PoissonParams, series: EventSeries,
                   condition_on_first: bool = False) -> float:
    n = series.n_events - int(condition_on_first)
    return n * math.log(params.lambda_p) - params.lambda_p * series.window_end


def compensator(params: HawkesParams, series: EventSeries, T: float | None = None) -> float:
    """Integrated intensity over ``[0, T]`` (default: the series window)."""
    T = series.window_end if T is None else float(T)
    if T < series.times[-1]:
        raise ValueError(f"T={T} precedes the last event {series.times[-1]}")
    lam0, alpha, delta = params.lambda0, params.alpha, params.delta
    excited = -np.expm1(-delta * (T - series.times)).sum()
    return (lam0 * T + alpha / delta * excited
            + (params.gamma - lam0) / delta * -math.expm1(-delta * T))


def loglik_hawkes(params: HawkesParams, series: EventSeries,
                  condition_on_first: bool = False) -> float:
    """Exact log-likelihood on ``[0, window_end]``.

    The event at the origin contributes ``log gamma`` unless
    ``condition_on_first`` is set, in which case the likelihood is
    conditional on that event (its log-intensity is dropped).
    """
    return float(_kernels.loglik_one(series.times, series.window_end, params.lambda0,
                                     params.alpha, params.delta, params.gamma,
                                     int(condition_on_first)))


def loglik_hawkes_grad(params: HawkesParams, series: EventSeries) -> tuple[float, np.ndarray]:
    """Log-likelihood and its gradient in (lambda0, alpha, delta, gamma).

    For the full-history variant gamma is tied to lambda0, so the returned
    gradient has three entries with the gamma sensitivity folded into lambda0.
    """
    out = np.empty(4)
    ll = _kernels.loglik_one_grad(series.times, series.window_end, params.lambda0,
                                  params.alpha, params.delta, params.gamma, out)
    if params.variant is Variant.FULL:
        return float(ll), np.array([out[0] + out[3], out[1], out[2]])
    return float(ll), out


def loglik(params, series: EventSeries, condition_on_first: bool = False) -> float:
    if isinstance(params, PoissonParams):
        return loglik_poisson(params, series, condition_on_first)
    return loglik_hawkes(params, series, condition_on_first)


# ---------------------------------------------------------------------------
# fitting


@dataclass(frozen=True)
class FitOptions:
    n_starts: int = 8
    maxiter: int = 400
    tol: float = 1e-8
    seed: int = 0
    stability_eps: float = 1e-6
    max_delta_scale: float = 1e3
    polish: bool = True
    per_member_gamma: bool = False
    condition_on_first: bool = False
    extra_starts: tuple = ()


class _Pooled:
    """Flat, compiled-kernel-ready view of one or more series."""

    def __init__(self, series: Sequence[EventSeries], condition_on_first: bool = False):
        if len(series) == 0:
            raise InsufficientDataError("no series to fit")
        self.series = list(series)
        self.flat = np.concatenate([s.times for s in self.series])
        self.offsets = np.zeros(len(self.series) + 1, dtype=np.int64)
        self.offsets[1:] = np.cumsum([s.n_events for s in self.series])
        self.windows = np.array([s.window_end for s in self.series], dtype=np.float64)
        self.n_total = int(self.offsets[-1])
        self.T_total = float(self.windows.sum())
        if self.T_total <= 0:
            raise InsufficientDataError(
                "total observation window is zero; a single anchored event cannot be fitted"
            )
        n_gaps = self.n_total - len(self.series)
        self.skip = int(condition_on_first)
        # number of log-intensity terms in the likelihood
        self.n_scored = self.n_total - self.skip * len(self.series)
        if self.n_scored == 0:
            raise InsufficientDataError("conditioning on first events leaves nothing to fit")
        self.mean_gap = self.T_total / n_gaps if n_gaps > 0 else self.T_total / self.n_total

    @property
    def m(self) -> int:
        return len(self.series)


class _HawkesObjective:
    """Negative log-likelihood over log-parameters.

    Layout: ``[log lambda0, log alpha, log delta]`` followed by nothing (full),
    one shared ``log gamma`` (shifted) or one ``log gamma`` per member.
    """

    def __init__(self, data: _Pooled, variant: Variant, per_member_gamma: bool, eps: float,
                 delta_max: float = math.inf):
        self.data = data
        self.delta_max = delta_max
        self.variant = variant
        self.per_member = per_member_gamma and variant is Variant.SHIFTED
        self.eta_max = 1.0 - eps
        self.gammas = np.empty(data.m)
        self.grad3 = np.empty(3)
        self.grad_gamma = np.empty(data.m)
        if variant is Variant.FULL:
            self.dim = 3
        else:
            self.dim = 3 + (data.m if self.per_member else 1)

    def _unpack(self, x):
        with np.errstate(over="ignore"):
            theta = np.exp(x)
        lam0, alpha, delta = theta[0], theta[1], theta[2]
        if self.variant is Variant.FULL:
            self.gammas[:] = lam0
        elif self.per_member:
            self.gammas[:] = theta[3:]
        else:
            self.gammas[:] = theta[3]
        return lam0, alpha, delta

    def _violation(self, lam0, alpha, delta) -> float:
        if not (np.isfinite(lam0) and np.isfinite(alpha) and np.isfinite(delta)) or delta <= 0 or lam0 <= 0:
            return math.inf
        return max(alpha / delta - self.eta_max, math.log(delta / self.delta_max))

    def value(self, x) -> float:
        lam0, alpha, delta = self._unpack(x)
        over = self._violation(lam0, alpha, delta)
        if over > 0:
            return _PENALTY * (1.0 + min(over, 1e6))
        d = self.data
        ll = _kernels.loglik_group(d.flat, d.offsets, d.windows, lam0, alpha, delta,
                                   self.gammas, d.skip)
        if not np.isfinite(ll):
            return _PENALTY
        return -ll

    def value_and_grad(self, x):
        lam0, alpha, delta = self._unpack(x)
        over = self._violation(lam0, alpha, delta)
        if over > 0:
            return _PENALTY * (1.0 + min(over, 1e6)), np.zeros(self.dim)
        d = self.data
        ll = _kernels.loglik_group_grad(d.flat, d.offsets, d.windows, lam0, alpha, delta,
                                        self.gammas, self.grad3, self.grad_gamma, d.skip)
        if not np.isfinite(ll):
            return _PENALTY, np.zeros(self.dim)
        g = np.empty(self.dim)
        g[0] = self.grad3[0] * lam0
        g[1] = self.grad3[1] * alpha
        g[2] = self.grad3[2] * delta
        if self.variant is Variant.FULL:
            g[0] += self.grad_gamma.sum() * lam0
        elif self.per_member:
            g[3:] = self.grad_gamma * self.gammas
        else:
            g[3] = self.grad_gamma.sum() * self.gammas[0]
        return -ll, -g

    def encode(self, lam0, alpha, delta, gamma=None) -> np.ndarray:
        x = [math.log(lam0), math.log(alpha), math.log(delta)]
        if self.variant is Variant.SHIFTED:
            g = lam0 if gamma is None else gamma
            gs = np.broadcast_to(np.asarray(g, dtype=float), (self.data.m,)) if self.per_member else [g]
            x.extend(math.log(max(v, 1e-300)) for v in np.atleast_1d(gs))
        return np.array(x, dtype=np.float64)

    def decode(self, x) -> tuple[HawkesParams, tuple | None]:
        lam0, alpha, delta = self._unpack(x)
        gammas = tuple(float(v) for v in self.gammas) if self.per_member else None
        if self.variant is Variant.FULL:
            return HawkesParams.full(lam0, alpha, delta), None
        return HawkesParams(lam0, alpha, delta, float(self.gammas[0]), Variant.SHIFTED), gammas


def _start_points(data: _Pooled, obj: _HawkesObjective, options: FitOptions) -> list[np.ndarray]:
    rng = np.random.default_rng(np.random.SeedSequence(options.seed, spawn_key=(0xF17,)))
    rate = data.n_total / data.T_total
    delta0 = 1.0 / data.mean_gap
    starts = []
    for k in range(options.n_starts):
        u = rng.uniform(0.1, 0.9)
        # first start uses the plain moment scale; the rest spread delta log-uniformly
        delta = delta0 if k == 0 else delta0 * math.exp(rng.uniform(-math.log(4), math.log(4)))
        starts.append(obj.encode(rate * (1.0 - u), delta * u, delta, rate))
    for p in options.extra_starts:
        alpha = max(p.alpha, 1e-12 * p.lambda0)
        starts.append(obj.encode(p.lambda0, alpha, p.delta, p.gamma))
    return starts


def _maximize(obj: _HawkesObjective, starts, options: FitOptions):
    best = None
    trace = []
    for idx, x0 in enumerate(starts):
        nm = minimize(obj.value, x0, method="Nelder-Mead",
                      options={"maxiter": options.maxiter, "xatol": options.tol,
                               "fatol": options.tol, "adaptive": obj.dim > 3})
        x, f, ok = nm.x, nm.fun, bool(nm.success)
        polished = False
        if options.polish and f < _PENALTY:
            qn = minimize(obj.value_and_grad, x, jac=True, method="L-BFGS-B",
                          options={"maxiter": options.maxiter, "ftol": options.tol * 1e-4})
            if qn.fun <= f:
                polished = True
                x, f = qn.x, qn.fun
                ok = ok or bool(qn.success)
        trace.append({"start": idx, "loglik": -float(f), "nm_iterations": int(nm.nit),
                      "nm_success": bool(nm.success), "polished": polished})
        if best is None or f < best[1]:
            best = (x, f, ok)
    return best, trace


def fit_hawkes_pooled(series: Sequence[EventSeries], variant: Variant, options: FitOptions):
    """Maximize the summed log-likelihood of ``series`` at shared parameters.

    Returns ``(params, loglik, trace, converged, at_boundary, member_gammas)``.
    The decay rate is capped at ``max_delta_scale`` times the pooled event
    rate: with a free gamma the first-event factor ``gamma`` can grow with
    ``delta`` at bounded compensator cost, so the shifted likelihood has no
    finite maximum. Fits ending on the cap are flagged ``at_boundary``.
    The nested Poisson point (alpha = 0, gamma = lambda0 = N/T) is evaluated
    exactly and wins if the interior search does not beat it.
    """
    data = _Pooled(series, options.condition_on_first)
    delta_max = options.max_delta_scale * data.n_total / data.T_total
    obj = _HawkesObjective(data, Variant(variant), options.per_member_gamma,
                           options.stability_eps, delta_max)
    starts = _start_points(data, obj, options)
    if obj.per_member:
        # the shared-gamma optimum is a feasible point of the larger model
        shared, *_ = fit_hawkes_pooled(series, variant, replace(options, per_member_gamma=False))
        starts.append(obj.encode(shared.lambda0, max(shared.alpha, 1e-12 * shared.lambda0),
                                 shared.delta, shared.gamma))
    (x, f, ok), trace = _maximize(obj, starts, options)
    params, gammas = obj.decode(x)
    ll = -float(f)
    at_boundary = (params.branching_ratio >= 1.0 - 1e3 * options.stability_eps
                   or params.delta >= 0.99 * delta_max)

    rate = data.n_scored / data.T_total
    nested_ll = data.n_scored * math.log(rate) - rate * data.T_total
    if nested_ll >= ll:
        delta = 1.0 / data.mean_gap
        if obj.variant is Variant.FULL:
            params = HawkesParams.full(rate, 0.0, delta)
        else:
            params = HawkesParams(rate, 0.0, delta, rate, Variant.SHIFTED)
        gammas = (rate,) * data.m if obj.per_member else None
        ll, ok, at_boundary = nested_ll, True, True
        trace.append({"start": "nested_poisson", "loglik": nested_ll})
    return params, ll, tuple(trace), ok, at_boundary, gammas


def fit_poisson_pooled(series: Sequence[EventSeries],
                       condition_on_first: bool = False) -> tuple[PoissonParams, float]:
    data = _Pooled(series, condition_on_first)
    rate = data.n_scored / data.T_total
    return PoissonParams(rate), data.n_scored * math.log(rate) - rate * data.T_total


def fit_mle(model_tag: ModelTag | str, series: EventSeries,
            options: FitOptions | None = None) -> FitResult:
    tag = ModelTag(model_tag)
    options = options or FitOptions()
    if tag is ModelTag.POISSON:
        params, ll = fit_poisson_pooled([series], options.condition_on_first)
        return FitResult(tag, params, ll, series.n_events, tag.k)
    params, ll, trace, ok, boundary, _ = fit_hawkes_pooled([series], tag.variant, options)
    return FitResult(tag, params, ll, series.n_events, tag.k, trace, ok,
                     boundary or series.n_events < 2)


# ---------------------------------------------------------------------------
# selection


class Verdict(str, Enum):
    HAWKES = "hawkes"
    POISSON = "poisson"
    INCONCLUSIVE = "inconclusive"


LEVELS = ("basic", "0.05", "0.01")
_LEVEL_EDGE = {"basic": 0.0, "0.05": THRESHOLD_05, "0.01": THRESHOLD_01}


def verdict_at(delta_aic: float, level: str) -> Verdict:
    """Preferred model when demanding relative likelihood beyond ``level``."""
    edge = _LEVEL_EDGE[level]
    if delta_aic < -edge:
        return Verdict.HAWKES
    if delta_aic > edge:
        return Verdict.POISSON
    return Verdict.INCONCLUSIVE


@dataclass(frozen=True)
class SelectionVerdict:
    """Hawkes-minus-Poisson information criterion difference.

    ``verdict`` is the outcome at the 0.05 level (the band ``|dAIC| <= 5.99``
    is inconclusive); ``confidence_level`` is the strongest level at which the
    sign of ``delta_aic`` is decisive.
    """
    delta_aic: float
    verdict: Verdict
    confidence_level: str
    criterion: str = "aic"

    @classmethod
    def from_delta(cls, delta_aic: float, criterion: str = "aic") -> "SelectionVerdict":
        level = "basic"
        for lvl in ("0.05", "0.01"):
            if verdict_at(delta_aic, lvl) is not Verdict.INCONCLUSIVE:
                level = lvl
        return cls(float(delta_aic), verdict_at(delta_aic, "0.05"), level, criterion)

    def at(self, level: str) -> Verdict:
        return verdict_at(self.delta_aic, level)

    @property
    def relative_likelihood(self) -> float:
        return math.exp(-abs(self.delta_aic) / 2.0)


def select_model(fit_hawkes, fit_poisson, criterion: str = "aic") -> SelectionVerdict:
    if fit_hawkes.n_events != fit_poisson.n_events:
        raise ValueError(
            f"fits are on different data ({fit_hawkes.n_events} vs {fit_poisson.n_events} events)"
        )
    criterion = criterion.lower()
    if criterion not in ("aic", "aicc"):
        raise ValueError(f"unknown criterion {criterion!r}")
    delta = getattr(fit_hawkes, criterion) - getattr(fit_poisson, criterion)
    return SelectionVerdict.from_delta(delta, criterion)


# ---------------------------------------------------------------------------
# (alpha, delta) likelihood surface


@dataclass(frozen=True)
class RidgeScan:
    alphas: np.ndarray
    deltas: np.ndarray
    loglik: np.ndarray  # shape (len(alphas), len(deltas))
    lambda0: float
    eta: float
    ridge_alphas: np.ndarray
    ridge_loglik: np.ndarray

    @property
    def ridge_variation(self) -> float:
        return float(np.ptp(self.ridge_loglik))

    @property
    def grid_variation(self) -> float:
        finite = self.loglik[np.isfinite(self.loglik)]
        return float(np.ptp(finite))

    @property
    def flatness_ratio(self) -> float:
        return self.ridge_variation / self.grid_variation

    def argmax(self) -> tuple[float, float, float]:
        i, j = np.unravel_index(np.nanargmax(self.loglik), self.loglik.shape)
        return float(self.alphas[i]), float(self.deltas[j]), float(self.loglik[i, j])


def likelihood_ridge_scan(series: EventSeries, lambda0: float, alphas, deltas,
                          eta: float = 0.9, n_ridge: int = 200) -> RidgeScan:
    """Full-history log-likelihood over an (alpha, delta) grid at fixed ``lambda0``.

    Also evaluates the line ``alpha = eta * delta`` across the grid's delta
    range (clipped to the alpha range).
    """
    alphas = np.asarray(alphas, dtype=float)
    deltas = np.asarray(deltas, dtype=float)
    t, T = series.times, series.window_end
    grid = np.empty((alphas.size, deltas.size))
    for i, a in enumerate(alphas):
        for j, d in enumerate(deltas):
            grid[i, j] = _kernels.loglik_one(t, T, lambda0, a, d, lambda0)
    lo = max(deltas.min(), alphas.min() / eta)
    hi = min(deltas.max(), alphas.max() / eta)
    if lo > hi:
        raise ValueError(f"line alpha = {eta} * delta does not cross the grid")
    ridge_d = np.linspace(lo, hi, n_ridge)
    ridge_ll = np.array([_kernels.loglik_one(t, T, lambda0, eta * d, d, lambda0) for d in ridge_d])
    return RidgeScan(alphas, deltas, grid, float(lambda0), float(eta), eta * ridge_d, ridge_ll)
