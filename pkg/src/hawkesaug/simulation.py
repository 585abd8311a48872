"""Seeded generation of Poisson and Hawkes event series.

Hawkes paths use Ogata thinning. Between events the excitation and any
positive history-compensation term only decay, while a negative
compensation term is bounded above by zero, so
``lambda0 + excitation(t+) + max(gamma - lambda0, 0) * exp(-delta t)``
dominates the intensity until the next accepted event.

Seeds are split with ``numpy.random.SeedSequence`` spawn keys: the stream for
job ``k`` of a run seeded with ``s`` is ``SeedSequence(s, spawn_key=(k,))``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import (
    EventSeries,
    HawkesParams,
    InsufficientDataError,
    PoissonParams,
    require_subcritical,
)

RNG_ALGORITHM = "numpy.random.PCG64 seeded via SeedSequence(seed, spawn_key)"
DEFAULT_BURN_IN = 200


@dataclass(frozen=True)
class SimConfig:
    seed: int = 0
    n_events: int | None = 100
    horizon: float | None = None
    burn_in_events: int = DEFAULT_BURN_IN

    def __post_init__(self):
        if self.n_events is None and self.horizon is None:
            raise ValueError("SimConfig needs n_events or horizon")
        if self.n_events is not None and self.n_events < 1:
            raise ValueError(f"n_events must be >= 1, got {self.n_events}")
        if self.horizon is not None and self.horizon < 0:
            raise ValueError(f"horizon must be >= 0, got {self.horizon}")
        if self.burn_in_events < 0:
            raise ValueError("burn_in_events must be >= 0")

    def rng(self) -> np.random.Generator:
        return np.random.Generator(np.random.PCG64(np.random.SeedSequence(self.seed)))

    def child(self, *key: int, **changes) -> "SimConfig":
        fields = dict(seed=spawn_seed(self.seed, *key), n_events=self.n_events,
                      horizon=self.horizon, burn_in_events=self.burn_in_events)
        fields.update(changes)
        return SimConfig(**fields)


def spawn_seed(seed: int, *key: int) -> int:
    """Derive an independent 64-bit seed for sub-job ``key`` of ``seed``."""
    ss = np.random.SeedSequence(seed, spawn_key=tuple(int(k) for k in key))
    return int(ss.generate_state(1, np.uint64)[0])


class _Draws:
    """Buffered standard exponential / uniform variates."""

    def __init__(self, rng: np.random.Generator, block: int = 4096):
        self.rng = rng
        self.block = block
        self._e = rng.standard_exponential(block)
        self._u = rng.random(block)
        self._i = 0

    def next(self) -> tuple[float, float]:
        if self._i == self.block:
            self._e = self.rng.standard_exponential(self.block)
            self._u = self.rng.random(self.block)
            self._i = 0
        i = self._i
        self._i += 1
        return self._e[i], self._u[i]


def simulate_poisson(params: PoissonParams, config: SimConfig, id: str = "") -> EventSeries:
    rng = config.rng()
    rate = params.lambda_p
    if config.n_events is not None:
        gaps = rng.exponential(1.0 / rate, config.n_events - 1)
        times = np.concatenate(([0.0], np.cumsum(gaps)))
        if config.horizon is not None:
            times = times[times <= config.horizon]
            return EventSeries(times, config.horizon, id)
        return EventSeries(times, None, id)
    chunks = [np.zeros(1)]
    t = 0.0
    while True:
        block = t + np.cumsum(rng.exponential(1.0 / rate, 1024))
        inside = block[block <= config.horizon]
        chunks.append(inside)
        if inside.size < block.size:
            break
        t = block[-1]
    return EventSeries(np.concatenate(chunks), config.horizon, id)


def simulate_hawkes(params: HawkesParams, config: SimConfig, id: str = "") -> EventSeries:
    """Hawkes path with an event at ``t = 0`` and intensity ``gamma`` there.

    For the full-history variant this is the onset-started process re-anchored
    at its first event (before which the intensity was the baseline).
    """
    require_subcritical(params)
    lam0, alpha, delta = params.lambda0, params.alpha, params.delta
    shift = params.gamma - lam0
    pos_shift = max(shift, 0.0)
    target = config.n_events if config.n_events is not None else math.inf
    horizon = config.horizon if config.horizon is not None else math.inf

    draws = _Draws(config.rng())
    times = [0.0]
    t = 0.0
    excitation = alpha  # contribution of the event at 0, evaluated just after it
    while len(times) < target:
        bound = lam0 + excitation + pos_shift * math.exp(-delta * t)
        e, u = draws.next()
        w = e / bound
        t_next = t + w
        if t_next > horizon:
            break
        excitation *= math.exp(-delta * w)
        t = t_next
        lam = lam0 + excitation + shift * math.exp(-delta * t)
        if u * bound <= lam:
            times.append(t)
            excitation += alpha
    window = None if config.horizon is None else config.horizon
    return EventSeries(np.asarray(times), window, id)


def extract_excerpt(series: EventSeries, n_events: int, config: SimConfig,
                    id: str | None = None) -> EventSeries:
    """Contiguous block of ``n_events`` events starting at or after the burn-in.

    The start index is drawn uniformly from the admissible range using the
    config seed; the block is re-anchored so its first event is at zero.
    """
    burn = config.burn_in_events
    if series.n_events < n_events + burn:
        raise InsufficientDataError(
            f"need {n_events + burn} events (burn-in {burn}), series has {series.n_events}"
        )
    start = burn + int(config.rng().integers(0, series.n_events - n_events - burn + 1))
    block = series.times[start:start + n_events]
    return EventSeries(block - block[0], None, series.id if id is None else id)


def simulate_hawkes_excerpt(params: HawkesParams, n_events: int, config: SimConfig,
                            id: str = "") -> EventSeries:
    """Excerpt of ``n_events`` taken after ``config.burn_in_events`` of an onset-started run."""
    parent = HawkesParams.full(params.lambda0, params.alpha, params.delta)
    total = n_events + config.burn_in_events
    run = simulate_hawkes(parent, SimConfig(config.seed, total, None, config.burn_in_events))
    return extract_excerpt(run, n_events, config, id=id)
