"""Domain types and closed-form helpers for exponential-kernel Hawkes models.

Times are dimensionless ("days" by convention). Every ``EventSeries`` is
anchored so that its first event sits at ``t = 0``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np


class ParameterDomainError(ValueError):
    pass


class SupercriticalError(ParameterDomainError):
    pass


class InsufficientDataError(ValueError):
    pass


class DataValidationError(ValueError):
    pass


class NumericalError(RuntimeError):
    pass


class Variant(str, Enum):
    FULL = "full"  # observed from onset, gamma tied to lambda0
    SHIFTED = "shifted"  # unknown history, free initial intensity gamma


def _frozen_array(values) -> np.ndarray:
    arr = np.array(values, dtype=np.float64).reshape(-1)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class EventSeries:
    times: np.ndarray
    window_end: float | None = None
    id: str = ""

    def __post_init__(self):
        times = _frozen_array(self.times)
        if times.size == 0:
            raise InsufficientDataError(f"series {self.id!r} has no events")
        if not np.all(np.isfinite(times)):
            raise DataValidationError(f"series {self.id!r} has non-finite times")
        if times[0] != 0.0:
            raise DataValidationError(
                f"series {self.id!r} must be anchored at t=0 (got {times[0]!r}); use EventSeries.anchored"
            )
        if np.any(np.diff(times) <= 0):
            raise DataValidationError(f"series {self.id!r} times must be strictly increasing")
        end = float(times[-1]) if self.window_end is None else float(self.window_end)
        if end < times[-1]:
            raise DataValidationError(
                f"series {self.id!r}: window_end {end} precedes last event {times[-1]}"
            )
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "window_end", end)

    @classmethod
    def anchored(cls, times, window_end: float | None = None, id: str = "") -> "EventSeries":
        """Sort ``times`` and shift them so the first event is at zero.

        ``window_end`` is given on the original axis and shifted the same way.
        """
        arr = np.sort(np.asarray(times, dtype=np.float64).reshape(-1))
        if arr.size == 0:
            raise InsufficientDataError(f"series {id!r} has no events")
        origin = arr[0]
        end = None if window_end is None else float(window_end) - origin
        return cls(arr - origin, end, id)

    @property
    def n_events(self) -> int:
        return int(self.times.size)

    def __len__(self) -> int:
        return self.n_events

    def __eq__(self, other):
        if not isinstance(other, EventSeries):
            return NotImplemented
        return (
            self.id == other.id
            and self.window_end == other.window_end
            and np.array_equal(self.times, other.times)
        )

    def __hash__(self):
        return hash((self.id, self.window_end, self.times.tobytes()))

    def rescaled(self, c: float) -> "EventSeries":
        return EventSeries(self.times * c, self.window_end * c, self.id)


@dataclass(frozen=True)
class HawkesParams:
    lambda0: float
    alpha: float
    delta: float
    gamma: float | None = None
    variant: Variant = Variant.SHIFTED

    def __post_init__(self):
        variant = Variant(self.variant)
        gamma = self.gamma
        if variant is Variant.FULL:
            if gamma is not None and gamma != self.lambda0:
                raise ParameterDomainError("full-history variant requires gamma == lambda0")
            gamma = self.lambda0
        elif gamma is None:
            gamma = self.lambda0
        object.__setattr__(self, "gamma", float(gamma))
        object.__setattr__(self, "variant", variant)
        for name in ("lambda0", "alpha", "delta"):
            object.__setattr__(self, name, float(getattr(self, name)))
        if not all(math.isfinite(v) for v in (self.lambda0, self.alpha, self.delta, self.gamma)):
            raise ParameterDomainError(f"non-finite parameter in {self}")
        if self.lambda0 <= 0:
            raise ParameterDomainError(f"lambda0 must be > 0, got {self.lambda0}")
        if self.alpha < 0:
            raise ParameterDomainError(f"alpha must be >= 0, got {self.alpha}")
        if self.delta <= 0:
            raise ParameterDomainError(f"delta must be > 0, got {self.delta}")
        if self.gamma < 0:
            raise ParameterDomainError(f"gamma must be >= 0, got {self.gamma}")

    @classmethod
    def full(cls, lambda0: float, alpha: float, delta: float) -> "HawkesParams":
        return cls(lambda0, alpha, delta, None, Variant.FULL)

    @property
    def branching_ratio(self) -> float:
        return self.alpha / self.delta

    @property
    def is_subcritical(self) -> bool:
        return self.branching_ratio < 1.0

    def rescaled(self, c: float) -> "HawkesParams":
        """Rates for the time axis stretched by ``c``."""
        return HawkesParams(self.lambda0 / c, self.alpha / c, self.delta / c,
                            self.gamma / c, self.variant)

    def as_dict(self) -> dict:
        return {"lambda0": self.lambda0, "alpha": self.alpha, "delta": self.delta,
                "gamma": self.gamma, "variant": self.variant.value}


@dataclass(frozen=True)
class PoissonParams:
    lambda_p: float

    def __post_init__(self):
        object.__setattr__(self, "lambda_p", float(self.lambda_p))
        if not (math.isfinite(self.lambda_p) and self.lambda_p > 0):
            raise ParameterDomainError(f"lambda_p must be > 0, got {self.lambda_p}")

    def as_dict(self) -> dict:
        return {"lambda_p": self.lambda_p}


@dataclass(frozen=True, eq=False)
class InterarrivalSample:
    deltas: np.ndarray
    source_id: str = ""

    def __post_init__(self):
        deltas = _frozen_array(self.deltas)
        if np.any(deltas <= 0):
            raise DataValidationError(f"interarrivals of {self.source_id!r} must be positive")
        object.__setattr__(self, "deltas", deltas)

    def __len__(self) -> int:
        return int(self.deltas.size)


def intensity_at(params: HawkesParams, series: EventSeries, t: float) -> float:
    """Conditional intensity at ``t`` given the events strictly before ``t``."""
    if t < 0:
        raise ValueError(f"t must be >= 0, got {t}")
    past = series.times[series.times < t]
    excitation = params.alpha * np.exp(-params.delta * (t - past)).sum()
    if params.gamma == params.lambda0:
        return params.lambda0 + excitation
    # convex blend, so the value at t = 0 is exactly gamma
    E = math.exp(-params.delta * t)
    return params.lambda0 * (1.0 - E) + params.gamma * E + excitation


def stationary_mean(params: HawkesParams) -> float:
    eta = branching_ratio(params)
    if eta >= 1.0:
        raise SupercriticalError(f"branching ratio {eta} >= 1 has no stationary mean")
    return params.lambda0 / (1.0 - eta)


def branching_ratio(params: HawkesParams) -> float:
    return params.alpha / params.delta


def require_subcritical(params: HawkesParams) -> None:
    if not params.is_subcritical:
        raise SupercriticalError(
            f"branching ratio alpha/delta = {params.branching_ratio:.6g} must be < 1"
        )


def interarrivals(series: EventSeries) -> InterarrivalSample:
    if series.n_events < 2:
        raise InsufficientDataError(
            f"series {series.id!r} needs >= 2 events for interarrivals, has {series.n_events}"
        )
    return InterarrivalSample(np.diff(series.times), series.id)
