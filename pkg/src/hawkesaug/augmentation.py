"""Similarity grouping of event series and pooled ("collective") fits.

Series are compared through the two-sample Kolmogorov-Smirnov test on their
interarrival times. Each anchor series is then fitted together with the
series whose p-value against it passes the threshold, at shared parameters.
Grouping is per-anchor and therefore not transitive.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np
from scipy.special import kolmogorov

from .core import (
    EventSeries,
    HawkesParams,
    InsufficientDataError,
    InterarrivalSample,
    PoissonParams,
    interarrivals,
)
from .inference import (
    FitOptions,
    ModelTag,
    SelectionVerdict,
    aic_value,
    aicc_value,
    fit_hawkes_pooled,
    fit_poisson_pooled,
    loglik_hawkes,
    loglik_poisson,
    select_model,
)

SIMILAR_IF_P_GE = "similar_if_p_ge"
SIMILAR_IF_P_LT = "similar_if_p_lt"
DEFAULT_P_C = 0.1

DIRECTION_NOTE = (
    "similar if KS p >= p_c (null of a common distribution not rejected); the "
    "step-by-step description writes P_ij < p_c, the prose says the hypothesis is "
    "accepted when p exceeds p_c; direction is configurable"
)


def _values(sample) -> np.ndarray:
    if isinstance(sample, InterarrivalSample):
        return sample.deltas
    return np.asarray(sample, dtype=np.float64).reshape(-1)


def ks_statistic(a, b) -> float:
    a = np.sort(_values(a))
    b = np.sort(_values(b))
    pooled = np.concatenate([a, b])
    cdf_a = np.searchsorted(a, pooled, side="right") / a.size
    cdf_b = np.searchsorted(b, pooled, side="right") / b.size
    return float(np.max(np.abs(cdf_a - cdf_b)))


def ks_two_sample(a, b) -> tuple[float, float]:
    """Two-sample KS statistic and asymptotic p-value.

    The p-value is the Kolmogorov survival function at ``sqrt(n_e) * D`` with
    effective size ``n_e = n_a n_b / (n_a + n_b)``.
    """
    na, nb = _values(a).size, _values(b).size
    if na == 0 or nb == 0:
        raise InsufficientDataError("KS test needs two nonempty samples")
    d = ks_statistic(a, b)
    ne = na * nb / (na + nb)
    p = float(kolmogorov(math.sqrt(ne) * d))
    return d, min(max(p, 0.0), 1.0)


@dataclass(frozen=True, eq=False)
class SimilarityMatrix:
    p: np.ndarray
    stat: np.ndarray
    ids: tuple
    excluded: tuple = ()

    def index(self, id) -> int:
        try:
            return self.ids.index(id)
        except ValueError:
            raise KeyError(f"series {id!r} is not in the similarity matrix") from None

    def __len__(self) -> int:
        return len(self.ids)


def similarity_matrix(collection: Sequence[EventSeries]) -> SimilarityMatrix:
    """Pairwise KS p-values and statistics over interarrival samples.

    Series with fewer than two events are left out with a warning and listed
    in ``excluded``.
    """
    kept, excluded = [], []
    for s in collection:
        if s.n_events < 2:
            excluded.append(s.id)
        else:
            kept.append(s)
    if excluded:
        warnings.warn(f"excluded from KS matrix (fewer than 2 events): {excluded}", stacklevel=2)
    samples = [interarrivals(s) for s in kept]
    m = len(samples)
    p = np.eye(m)
    stat = np.zeros((m, m))
    for i in range(m):
        for j in range(i + 1, m):
            d, pv = ks_two_sample(samples[i], samples[j])
            stat[i, j] = stat[j, i] = d
            p[i, j] = p[j, i] = pv
    p.setflags(write=False)
    stat.setflags(write=False)
    return SimilarityMatrix(p, stat, tuple(s.id for s in kept), tuple(excluded))


@dataclass(frozen=True)
class AugmentGroup:
    anchor: str
    members: tuple
    p_threshold: float
    direction: str = SIMILAR_IF_P_GE

    def __post_init__(self):
        if self.anchor not in self.members:
            raise ValueError("anchor must be a member of its group")

    @property
    def size(self) -> int:
        return len(self.members)


def build_group(P: SimilarityMatrix, anchor, p_c: float = DEFAULT_P_C,
                direction: str = SIMILAR_IF_P_GE) -> AugmentGroup:
    j = P.index(anchor)
    row = P.p[:, j]
    if direction == SIMILAR_IF_P_GE:
        similar = row >= p_c
    elif direction == SIMILAR_IF_P_LT:
        similar = row < p_c
    else:
        raise ValueError(f"unknown direction {direction!r}")
    members = [anchor] + [P.ids[i] for i in np.flatnonzero(similar) if i != j]
    return AugmentGroup(anchor, tuple(members), float(p_c), direction)


def collective_loglik(model_tag, shared_params, group: Sequence[EventSeries],
                      condition_on_first: bool = False) -> float:
    """Sum of member log-likelihoods at shared parameters, each on its own window."""
    tag = ModelTag(model_tag)
    if len(group) == 0:
        raise InsufficientDataError("empty group")
    if tag is ModelTag.POISSON and not isinstance(shared_params, PoissonParams):
        raise TypeError("Poisson model needs PoissonParams")
    if tag is not ModelTag.POISSON and not isinstance(shared_params, HawkesParams):
        raise TypeError("Hawkes model needs HawkesParams")
    total = 0.0
    for s in group:
        if not isinstance(s, EventSeries):
            raise TypeError(f"group member {s!r} is not an EventSeries")
        if tag is ModelTag.POISSON:
            ll = loglik_poisson(shared_params, s, condition_on_first)
        else:
            ll = loglik_hawkes(shared_params, s, condition_on_first)
        if not math.isfinite(ll):
            raise ValueError(f"log-likelihood of member {s.id!r} is not finite")
        total += ll
    return total


@dataclass(frozen=True)
class CollectiveFitResult:
    anchor: str
    model_tag: ModelTag
    params: PoissonParams | HawkesParams
    collective_loglik: float
    total_events: int
    k: int
    member_ids: tuple
    member_logliks: tuple
    member_gammas: tuple | None = None
    converged: bool = True
    at_boundary: bool = False
    optimizer_trace: tuple = ()
    aic: float = field(init=False)
    aicc: float = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "aic", aic_value(self.collective_loglik, self.k))
        object.__setattr__(self, "aicc", aicc_value(self.collective_loglik, self.k, self.total_events))

    @property
    def n_events(self) -> int:
        return self.total_events

    @property
    def loglik(self) -> float:
        return self.collective_loglik


def _resolve(group: AugmentGroup, collection) -> list[EventSeries]:
    if isinstance(collection, Mapping):
        lookup = collection
    else:
        lookup = {s.id: s for s in collection}
    missing = [i for i in group.members if i not in lookup]
    if missing:
        raise KeyError(f"group members not in collection: {missing}")
    return [lookup[i] for i in group.members]


def augmented_fit(model_tag, group: AugmentGroup, collection,
                  options: FitOptions | None = None) -> CollectiveFitResult:
    tag = ModelTag(model_tag)
    options = options or FitOptions()
    members = _resolve(group, collection)
    ids = tuple(s.id for s in members)
    total = sum(s.n_events for s in members)
    cond = options.condition_on_first
    if tag is ModelTag.POISSON:
        params, ll = fit_poisson_pooled(members, cond)
        per = tuple(loglik_poisson(params, s, cond) for s in members)
        return CollectiveFitResult(group.anchor, tag, params, ll, total, tag.k, ids, per)
    params, ll, trace, ok, boundary, gammas = fit_hawkes_pooled(members, tag.variant, options)
    if gammas is not None:
        k = 3 + len(members)
        per = tuple(
            loglik_hawkes(HawkesParams(params.lambda0, params.alpha, params.delta, g), s, cond)
            for g, s in zip(gammas, members)
        )
    else:
        k = tag.k
        per = tuple(loglik_hawkes(params, s, cond) for s in members)
    return CollectiveFitResult(group.anchor, tag, params, ll, total, k, ids, per, gammas,
                               ok, boundary, trace)


def compare_augmented(group: AugmentGroup, collection, hawkes_tag=ModelTag.HAWKES_SHIFTED,
                      criterion: str = "aic", options: FitOptions | None = None):
    """Pooled Hawkes and Poisson fits of one group and their verdict."""
    fh = augmented_fit(hawkes_tag, group, collection, options)
    fp = augmented_fit(ModelTag.POISSON, group, collection, options)
    return fh, fp, select_model(fh, fp, criterion)
