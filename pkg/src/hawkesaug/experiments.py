"""Simulation studies and the cohort pipeline.

Each runner takes an :class:`ExperimentSpec` and returns an
:class:`ExperimentResult` holding plain-row tables (lists of dicts), a
summary and a metadata block. :func:`write_result` serializes a result as
CSV tables plus ``manifest.json``.

Trial ``i`` of a run seeded with ``s`` draws from ``spawn_seed(s, tag, i)``,
so results do not depend on the worker count or on execution order.
"""
from __future__ import annotations

import csv
import json
import math
import platform
import subprocess
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Callable

import numba
import numpy as np
import scipy
from scipy.stats import spearmanr

from . import __version__
from .augmentation import (
    DEFAULT_P_C,
    DIRECTION_NOTE,
    SIMILAR_IF_P_GE,
    AugmentGroup,
    build_group,
    compare_augmented,
    similarity_matrix,
)
from .core import EventSeries, HawkesParams, PoissonParams
from .inference import (
    LEVELS,
    THRESHOLD_05,
    FitOptions,
    ModelTag,
    Verdict,
    fit_hawkes_pooled,
    fit_mle,
    likelihood_ridge_scan,
    select_model,
    verdict_at,
)
from .ingest import ingest
from .simulation import (
    DEFAULT_BURN_IN,
    RNG_ALGORITHM,
    SimConfig,
    simulate_hawkes,
    simulate_hawkes_excerpt,
    simulate_poisson,
    spawn_seed,
)

EXPERIMENTS = ("critical_n", "aicc_variant", "discrimination", "recovery", "ridge", "cohort_pipeline")

DEFAULTS: dict[str, dict] = {
    "critical_n": dict(lambda0=1.0, alpha=3.0, delta=6.0,
                       n_grid=[5, 10, 20, 40, 80, 160, 320, 640],
                       hawkes_model="hawkes_full", criterion="aic", n_starts=8),
    "discrimination": dict(lambda0=1.0, alpha=2.0, delta=3.5, lambda_p=7.0 / 3.0,
                           n_series=10, n_events=30, hawkes_model="hawkes_full",
                           grouping="ks", p_c=DEFAULT_P_C, direction=SIMILAR_IF_P_GE,
                           burn_in=DEFAULT_BURN_IN, condition_on_first=True, n_starts=8),
    "recovery": dict(lambda0=1.0, alpha=3.0, delta=10.0, n_e=16,
                     n_aug_grid=[2, 4, 8, 16, 32], hawkes_model="hawkes_full",
                     burn_in=DEFAULT_BURN_IN, condition_on_first=True, n_starts=8),
    "ridge": dict(lambda0=0.1, alpha=1.8, delta=2.0, n_events=6, horizon=10.0, eta=0.9,
                  alpha_range=[0.05, 5.0], delta_range=[0.2, 6.0], n_alpha=120, n_delta=120),
    "cohort_pipeline": dict(n_subjects=39, hawkes_model="hawkes_shifted", p_c=DEFAULT_P_C,
                            direction=SIMILAR_IF_P_GE, criterion="aic", format=None,
                            numeric_unit="seconds", merge_duplicates=False,
                            condition_on_first=True, n_starts=8),
}
DEFAULTS["aicc_variant"] = dict(DEFAULTS["critical_n"], criterion="aicc")

DEFAULT_TRIALS = {"critical_n": 50, "aicc_variant": 50, "discrimination": 1, "recovery": 30,
                  "ridge": 1, "cohort_pipeline": 1}


@dataclass
class ExperimentSpec:
    name: str
    overrides: dict = field(default_factory=dict)
    seed: int = 0
    trials: int | None = None
    output: str | None = None
    workers: int = 1
    data_path: str | None = None

    def __post_init__(self):
        if self.name not in EXPERIMENTS:
            raise ValueError(f"unknown experiment {self.name!r}; choose from {EXPERIMENTS}")
        unknown = set(self.overrides) - set(DEFAULTS[self.name])
        if unknown:
            raise ValueError(f"unknown parameter(s) for {self.name}: {sorted(unknown)}")
        if self.trials is None:
            self.trials = DEFAULT_TRIALS[self.name]
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")
        if not (0 <= self.seed < 2**64):
            raise ValueError("seed must be a 64-bit unsigned integer")

    @property
    def params(self) -> dict:
        return {**DEFAULTS[self.name], **self.overrides}

    @classmethod
    def from_json(cls, path, **extra) -> "ExperimentSpec":
        data = json.loads(Path(path).read_text())
        data.update({k: v for k, v in extra.items() if v is not None})
        return cls(**data)


@dataclass
class ExperimentResult:
    name: str
    spec: ExperimentSpec
    tables: dict[str, list[dict]]
    summary: dict
    decisions: list[str] = field(default_factory=list)

    def manifest(self) -> dict:
        return {
            "experiment": self.name,
            "spec": asdict(self.spec),
            "resolved_parameters": self.spec.params,
            "seed": self.spec.seed,
            "rng": RNG_ALGORITHM,
            "seed_rule": "trial i of stage tag uses spawn_seed(seed, tag, i)",
            "git_describe": git_describe(),
            "versions": {"hawkesaug": __version__, "python": platform.python_version(),
                         "numpy": np.__version__, "scipy": scipy.__version__,
                         "numba": numba.__version__},
            "decisions": self.decisions,
            "summary": self.summary,
            "tables": sorted(self.tables),
        }


def git_describe() -> str:
    try:
        out = subprocess.run(["git", "describe", "--always", "--dirty", "--tags"],
                             cwd=Path(__file__).parent, capture_output=True, text=True, timeout=5)
    except (OSError, subprocess.SubprocessError):
        return "unknown"
    return out.stdout.strip() or "unknown"


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (np.floating, float)):
        x = float(x)
        return x if math.isfinite(x) else None
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, np.bool_):
        return bool(x)
    if hasattr(x, "value") and isinstance(getattr(x, "value"), str):
        return x.value
    return x


def write_table(rows: list[dict], path) -> None:
    path = Path(path)
    if not rows:
        path.write_text("")
        return
    columns = list(rows[0])
    for r in rows[1:]:
        columns.extend(c for c in r if c not in columns)
    with path.open("w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=columns)
        w.writeheader()
        for r in rows:
            w.writerow({k: _cell(v) for k, v in r.items()})


def _cell(v):
    if isinstance(v, float):
        return repr(v)
    if hasattr(v, "value") and isinstance(getattr(v, "value"), str):
        return v.value
    return v


def write_result(result: ExperimentResult, outdir) -> Path:
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    for name, rows in result.tables.items():
        write_table(rows, outdir / f"{name}.csv")
    (outdir / "manifest.json").write_text(json.dumps(_jsonable(result.manifest()), indent=2) + "\n")
    return outdir


def _map(fn: Callable, jobs: list, workers: int) -> list:
    if workers <= 1 or len(jobs) <= 1:
        return [fn(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, jobs, chunksize=max(1, len(jobs) // (4 * workers))))


def _percentile_band(values, level=0.95):
    lo = 100 * (1 - level) / 2
    return (float(np.percentile(values, lo)), float(np.percentile(values, 100 - lo)))


def _conditioning_note(flag: bool) -> str:
    if flag:
        return ("likelihoods condition on each series' first event (its log-intensity is dropped), "
                "since excerpts begin at an arbitrary event of an ongoing process")
    return "likelihoods include the first event's log-intensity"


# ---------------------------------------------------------------------------
# minimum series length for Hawkes/Poisson discrimination


def _critical_n_job(job):
    seed, n, p = job
    truth = HawkesParams.full(p["lambda0"], p["alpha"], p["delta"])
    series = simulate_hawkes(truth, SimConfig(seed=seed, n_events=n))
    opts = FitOptions(n_starts=p["n_starts"], seed=seed)
    fh = fit_mle(p["hawkes_model"], series, opts)
    fp = fit_mle(ModelTag.POISSON, series)
    return select_model(fh, fp, p["criterion"]).delta_aic


def _crossing(ns, means, level):
    """First grid N where the mean drops below ``level`` (log-linear interpolation)."""
    for i, (n, m) in enumerate(zip(ns, means)):
        if m < level:
            if i == 0:
                return float(n)
            n0, m0 = ns[i - 1], means[i - 1]
            frac = (m0 - level) / (m0 - m)
            return float(math.exp(math.log(n0) + frac * (math.log(n) - math.log(n0))))
    return None


def run_critical_n(spec: ExperimentSpec) -> ExperimentResult:
    p = spec.params
    grid = [int(n) for n in p["n_grid"]]
    jobs = [(spawn_seed(spec.seed, gi, t), n, p) for gi, n in enumerate(grid) for t in range(spec.trials)]
    deltas = np.array(_map(_critical_n_job, jobs, spec.workers)).reshape(len(grid), spec.trials)
    rows, means = [], []
    for n, vals in zip(grid, deltas):
        ok = vals[np.isfinite(vals)]
        mean = float(ok.mean()) if ok.size else math.nan
        lo, hi = _percentile_band(ok) if ok.size else (math.nan, math.nan)
        means.append(mean)
        rows.append({"n_events": n, "mean_delta": mean, "ci_low": lo, "ci_high": hi,
                     "median_delta": float(np.median(ok)) if ok.size else math.nan,
                     "frac_below_-6": float(np.mean(ok < -THRESHOLD_05)) if ok.size else math.nan,
                     "n_valid": int(ok.size)})
    trials = [{"n_events": n, "trial": t, "delta": float(v)}
              for n, vals in zip(grid, deltas) for t, v in enumerate(vals)]
    valid = [(n, m) for n, m in zip(grid, means) if math.isfinite(m)]
    rho = float(spearmanr([n for n, _ in valid], [m for _, m in valid]).statistic) if len(valid) > 2 else math.nan
    summary = {
        "criterion": p["criterion"],
        "spearman_n_vs_mean": rho,
        "crossing_0": _crossing(*zip(*valid), 0.0) if valid else None,
        "crossing_-6": _crossing(*zip(*valid), -THRESHOLD_05) if valid else None,
        "mean_at_smallest_n": means[0],
        "mean_at_largest_n": means[-1],
    }
    decisions = [
        f"N grid {grid} (a free choice)",
        f"Hawkes fit uses {p['hawkes_model']} since simulated paths start at baseline",
        "band is the 2.5-97.5 percentile range over trials",
        "series re-anchored at their first event; window ends at the last event",
    ]
    if p["criterion"] == "aicc":
        decisions.append("AICc is undefined (NaN) when N <= k + 1; such trials are excluded")
    return ExperimentResult(spec.name, spec, {"curve": rows, "trials": trials}, summary, decisions)


# ---------------------------------------------------------------------------
# augmented discrimination of Poisson vs Hawkes collections


def _discrimination_job(job):
    seed, p = job
    cfg = SimConfig(seed=seed, burn_in_events=p["burn_in"])
    truth = HawkesParams.full(p["lambda0"], p["alpha"], p["delta"])
    n, m = p["n_events"], p["n_series"]
    hawkes = [simulate_hawkes_excerpt(truth, n, cfg.child(0, i), id=f"H{i}") for i in range(m)]
    poisson = [simulate_poisson(PoissonParams(p["lambda_p"]), SimConfig(spawn_seed(seed, 1, i), n), id=f"P{i}")
               for i in range(m)]
    collection = hawkes + poisson
    label = {s.id: ("hawkes" if s.id.startswith("H") else "poisson") for s in collection}
    opts = FitOptions(n_starts=p["n_starts"], seed=seed, condition_on_first=p["condition_on_first"])
    rows = []
    for s in collection:
        fh = fit_mle(p["hawkes_model"], s, opts)
        fp = fit_mle(ModelTag.POISSON, s, opts)
        v = select_model(fh, fp)
        rows.append({"series": s.id, "generator": label[s.id], "kind": "single", "group_size": 1,
                     "delta_aic": v.delta_aic, "verdict": v.verdict.value})
    if p["grouping"] == "label":
        groups = [AugmentGroup(hawkes[0].id, tuple(s.id for s in hawkes), math.nan, "label"),
                  AugmentGroup(poisson[0].id, tuple(s.id for s in poisson), math.nan, "label")]
    elif p["grouping"] == "ks":
        P = similarity_matrix(collection)
        groups = [build_group(P, hawkes[0].id, p["p_c"], p["direction"]),
                  build_group(P, poisson[0].id, p["p_c"], p["direction"])]
    else:
        raise ValueError(f"grouping must be 'ks' or 'label', got {p['grouping']!r}")
    for g in groups:
        _, _, v = compare_augmented(g, collection, p["hawkes_model"], options=opts)
        rows.append({"series": g.anchor, "generator": label[g.anchor], "kind": "augmented",
                     "group_size": g.size,
                     "group_purity": float(np.mean([label[i] == label[g.anchor] for i in g.members])),
                     "delta_aic": v.delta_aic, "verdict": v.verdict.value})
    return rows


def run_discrimination(spec: ExperimentSpec) -> ExperimentResult:
    p = spec.params
    jobs = [(spawn_seed(spec.seed, 0, r), p) for r in range(spec.trials)]
    per_rep = _map(_discrimination_job, jobs, spec.workers)
    rows = [{"repetition": r, **row} for r, rep in enumerate(per_rep) for row in rep]
    aug = [r for r in rows if r["kind"] == "augmented"]
    single = [r for r in rows if r["kind"] == "single"]
    aug_h = [r["delta_aic"] for r in aug if r["generator"] == "hawkes"]
    aug_p = [r["delta_aic"] for r in aug if r["generator"] == "poisson"]
    both_outside = [
        h < -THRESHOLD_05 and q > THRESHOLD_05 for h, q in zip(aug_h, aug_p)
    ]
    summary = {
        "repetitions": spec.trials,
        "frac_aug_hawkes_below_-6": float(np.mean([d < -THRESHOLD_05 for d in aug_h])),
        "frac_aug_poisson_above_+6": float(np.mean([d > THRESHOLD_05 for d in aug_p])),
        "frac_aug_poisson_preferred": float(np.mean([d > 0 for d in aug_p])),
        "frac_both_outside_band_correct_sign": float(np.mean(both_outside)),
        "frac_single_in_band": float(np.mean([abs(r["delta_aic"]) <= THRESHOLD_05 for r in single])),
        "mean_aug_hawkes_delta": float(np.mean(aug_h)),
        "mean_aug_poisson_delta": float(np.mean(aug_p)),
        "max_possible_poisson_side_delta": 2.0 * (ModelTag(p["hawkes_model"]).k - 1),
    }
    decisions = [
        f"grouping by {p['grouping']}" + (f" with p_c={p['p_c']} ({p['direction']})" if p["grouping"] == "ks" else ""),
        "augmented groups anchored on the first series of each generator class",
        f"Hawkes excerpts taken after a {p['burn_in']}-event burn-in of an onset-started run",
        f"Hawkes model {p['hawkes_model']} for single and pooled fits",
        "for nested fits dAIC(H-P) <= 2 (k_H - k_P), so the Poisson side cannot pass +6",
        _conditioning_note(p["condition_on_first"]),
    ]
    if p["grouping"] == "ks":
        decisions.append(DIRECTION_NOTE)
    return ExperimentResult(spec.name, spec, {"points": rows}, summary, decisions)


# ---------------------------------------------------------------------------
# parameter recovery: pooled excerpts vs one continuous series

_PARAM_NAMES = ("lambda0", "alpha", "delta")


def _recovery_job(job):
    seed, n_aug, p = job
    truth = HawkesParams.full(p["lambda0"], p["alpha"], p["delta"])
    cfg = SimConfig(seed=seed, burn_in_events=p["burn_in"])
    opts = FitOptions(n_starts=p["n_starts"], seed=seed, condition_on_first=p["condition_on_first"])
    variant = ModelTag(p["hawkes_model"]).variant
    excerpts = [simulate_hawkes_excerpt(truth, p["n_e"], cfg.child(0, i)) for i in range(n_aug)]
    aug, *_ = fit_hawkes_pooled(excerpts, variant, opts)
    long = simulate_hawkes_excerpt(truth, n_aug * p["n_e"], cfg.child(1))
    full, *_ = fit_hawkes_pooled([long], variant, opts)
    return ([getattr(aug, k) for k in _PARAM_NAMES], [getattr(full, k) for k in _PARAM_NAMES])


def run_recovery(spec: ExperimentSpec) -> ExperimentResult:
    p = spec.params
    grid = [int(n) for n in p["n_aug_grid"]]
    truth = {k: float(p[k]) for k in _PARAM_NAMES}
    jobs = [(spawn_seed(spec.seed, gi, t), n, p) for gi, n in enumerate(grid) for t in range(spec.trials)]
    out = _map(_recovery_job, jobs, spec.workers)
    est_aug = np.array([o[0] for o in out]).reshape(len(grid), spec.trials, 3)
    est_full = np.array([o[1] for o in out]).reshape(len(grid), spec.trials, 3)
    rows, trial_rows, mean_rel = [], [], {}
    for gi, n in enumerate(grid):
        rel_all = []
        for pi, name in enumerate(_PARAM_NAMES):
            a, f, th = est_aug[gi, :, pi], est_full[gi, :, pi], truth[name]
            rel = np.abs(f - a) / th
            rel_all.append(rel.mean())
            alo, ahi = _percentile_band(a)
            flo, fhi = _percentile_band(f)
            rows.append({"n_aug": n, "total_events": n * p["n_e"], "param": name, "truth": th,
                         "aug_mean": float(a.mean()), "aug_std": float(a.std(ddof=1)),
                         "full_mean": float(f.mean()), "full_std": float(f.std(ddof=1)),
                         "rel_error_mean": float(rel.mean()),
                         "aug_ci_length_norm": (ahi - alo) / th,
                         "full_ci_length_norm": (fhi - flo) / th})
        mean_rel[n] = float(np.mean(rel_all))
        for t in range(spec.trials):
            trial_rows.append({"n_aug": n, "trial": t,
                               **{f"aug_{k}": float(est_aug[gi, t, i]) for i, k in enumerate(_PARAM_NAMES)},
                               **{f"full_{k}": float(est_full[gi, t, i]) for i, k in enumerate(_PARAM_NAMES)}})
    largest = grid[-1]
    last = [r for r in rows if r["n_aug"] == largest]
    summary = {
        "mean_relative_error_by_n_aug": mean_rel,
        "aug_within_1std_at_largest": {r["param"]: abs(r["aug_mean"] - r["truth"]) <= r["aug_std"] for r in last},
    }
    decisions = [
        f"N_aug grid {grid}; intervals are 2.5-97.5 percentiles across trials, normalized by truth",
        "relative error averaged over trials, then over (lambda0, alpha, delta) for the summary",
        f"excerpts and the continuous series start after a {p['burn_in']}-event burn-in",
        f"fits use {p['hawkes_model']}",
        _conditioning_note(p["condition_on_first"]),
    ]
    return ExperimentResult(spec.name, spec, {"recovery": rows, "trials": trial_rows}, summary, decisions)


# ---------------------------------------------------------------------------
# likelihood ridge along constant branching ratio


def ridge_series(p: dict, seed: int, max_tries: int = 100000) -> tuple[EventSeries, int]:
    """First derived seed whose full-history path has exactly ``n_events`` in the horizon."""
    truth = HawkesParams.full(p["lambda0"], p["alpha"], p["delta"])
    for k in range(max_tries):
        s = simulate_hawkes(truth, SimConfig(seed=spawn_seed(seed, k), n_events=None, horizon=p["horizon"]),
                            id="ridge")
        if s.n_events == p["n_events"]:
            return s, k
    raise RuntimeError(f"no path with {p['n_events']} events in {max_tries} tries")


def run_ridge(spec: ExperimentSpec) -> ExperimentResult:
    p = spec.params
    series, k = ridge_series(p, spec.seed)
    alphas = np.linspace(*p["alpha_range"], int(p["n_alpha"]))
    deltas = np.linspace(*p["delta_range"], int(p["n_delta"]))
    scan = likelihood_ridge_scan(series, p["lambda0"], alphas, deltas, p["eta"])
    fit = fit_mle(ModelTag.HAWKES_FULL, series)
    grid_rows = [{"alpha": float(a), "delta": float(d), "loglik": float(scan.loglik[i, j])}
                 for i, a in enumerate(alphas) for j, d in enumerate(deltas)]
    ridge_rows = [{"alpha": float(a), "delta": float(a / p["eta"]), "loglik": float(v)}
                  for a, v in zip(scan.ridge_alphas, scan.ridge_loglik)]
    a_max, d_max, ll_max = scan.argmax()
    summary = {
        "event_times": series.times.tolist(),
        "window_end": series.window_end,
        "ridge_variation": scan.ridge_variation,
        "grid_variation": scan.grid_variation,
        "flatness_ratio": scan.flatness_ratio,
        "grid_argmax": {"alpha": a_max, "delta": d_max, "loglik": ll_max},
        "mle": fit.summary(),
    }
    decisions = [
        f"lambda0 fixed at {p['lambda0']} (a free choice)",
        f"series: path from derived seed index {k}, the first with exactly {p['n_events']} events in [0, {p['horizon']}]",
        "grid variation is max-min over all finite grid points, including supercritical (alpha > delta) ones",
    ]
    return ExperimentResult(spec.name, spec, {"grid": grid_rows, "ridge": ridge_rows}, summary, decisions)


# ---------------------------------------------------------------------------
# cohort pipeline: single and augmented fits per subject


def synthetic_cohort(n_subjects: int, seed: int) -> list[EventSeries]:
    """Heterogeneous stand-in cohort: Poisson subjects and two Hawkes phenotypes.

    Subjects have 8-60 events; Hawkes subjects are excerpts of stationary runs.
    """
    rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(99,)))
    out = []
    for i in range(n_subjects):
        kind = rng.choice(["poisson", "hawkes_mild", "hawkes_bursty"], p=[0.35, 0.35, 0.3])
        n = int(rng.integers(8, 61))
        cfg = SimConfig(seed=spawn_seed(seed, 7, i), n_events=n, burn_in_events=50)
        sid = f"S{i:02d}"
        if kind == "poisson":
            out.append(simulate_poisson(PoissonParams(rng.uniform(0.2, 0.8)), cfg, id=sid))
        else:
            lam0 = rng.uniform(0.05, 0.3)
            eta = rng.uniform(0.3, 0.6) if kind == "hawkes_mild" else rng.uniform(0.6, 0.85)
            delta = rng.uniform(0.5, 3.0)
            out.append(simulate_hawkes_excerpt(HawkesParams.full(lam0, eta * delta, delta), n, cfg, id=sid))
    return out


def _verdict_counts(rows: list[dict]) -> list[dict]:
    table = []
    for kind in ("single", "augmented"):
        deltas = [r[f"{kind}_delta_aic"] for r in rows if r.get(f"{kind}_delta_aic") is not None
                  and math.isfinite(r[f"{kind}_delta_aic"])]
        for level, edge in zip(LEVELS, (0.0, THRESHOLD_05, -2.0 * math.log(0.01))):
            verdicts = [verdict_at(d, level) for d in deltas]
            table.append({"series_type": kind, "confidence_level": level,
                          "abs_delta_aic_threshold": round(edge, 4),
                          "n_poisson": sum(v is Verdict.POISSON for v in verdicts),
                          "n_hawkes": sum(v is Verdict.HAWKES for v in verdicts),
                          "n_inconclusive": sum(v is Verdict.INCONCLUSIVE for v in verdicts),
                          "n_subjects": len(deltas)})
    return table


def run_cohort_pipeline(spec: ExperimentSpec, data_path=None) -> ExperimentResult:
    p = spec.params
    data_path = data_path or spec.data_path
    if data_path:
        cohort = ingest(data_path, p["format"], p["numeric_unit"], p["merge_duplicates"])
        source = str(data_path)
    else:
        cohort = synthetic_cohort(int(p["n_subjects"]), spec.seed)
        source = "synthetic"
    opts = FitOptions(n_starts=p["n_starts"], seed=spec.seed, condition_on_first=p["condition_on_first"])
    crit = p["criterion"]
    rows, errors = [], []
    for s in cohort:
        row = {"subject": s.id, "n_events": s.n_events, "window_days": s.window_end}
        try:
            fh = fit_mle(p["hawkes_model"], s, opts)
            fp = fit_mle(ModelTag.POISSON, s, opts)
            v = select_model(fh, fp, crit)
            row.update(single_delta_aic=v.delta_aic, single_verdict=v.verdict.value,
                       single_lambda0=fh.params.lambda0, single_alpha=fh.params.alpha,
                       single_delta=fh.params.delta, single_at_boundary=fh.at_boundary)
        except (ValueError, ArithmeticError) as exc:
            row.update(single_delta_aic=None, single_verdict="failed")
            errors.append({"subject": s.id, "stage": "single", "error": str(exc)})
        rows.append(row)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        P = similarity_matrix(cohort)
    lookup = {s.id: s for s in cohort}
    for row in rows:
        sid = row["subject"]
        if sid not in P.ids:
            row.update(group_size=None, augmented_delta_aic=None, augmented_verdict="not_grouped")
            errors.append({"subject": sid, "stage": "similarity", "error": "fewer than 2 events"})
            continue
        g = build_group(P, sid, p["p_c"], p["direction"])
        try:
            fh, fp, v = compare_augmented(g, lookup, p["hawkes_model"], crit, opts)
            row.update(group_size=g.size, group_members=" ".join(g.members),
                       augmented_delta_aic=v.delta_aic, augmented_verdict=v.verdict.value,
                       augmented_lambda0=fh.params.lambda0, augmented_alpha=fh.params.alpha,
                       augmented_delta=fh.params.delta, augmented_at_boundary=fh.at_boundary)
        except (ValueError, ArithmeticError) as exc:
            row.update(group_size=g.size, augmented_delta_aic=None, augmented_verdict="failed")
            errors.append({"subject": sid, "stage": "augmented", "error": str(exc)})
    counts = _verdict_counts(rows)
    heat = [{"i": a, "j": b, "p_value": float(P.p[x, y]), "ks_stat": float(P.stat[x, y])}
            for x, a in enumerate(P.ids) for y, b in enumerate(P.ids)]
    basic = {r["series_type"]: r for r in counts if r["confidence_level"] == "basic"}
    summary = {
        "source": source,
        "n_subjects": len(cohort),
        "verdict_counts": counts,
        "excluded_from_similarity": list(P.excluded),
        "failures": len(errors),
        "basic_counts_exceed_cohort": any(
            r["n_poisson"] + r["n_hawkes"] > len(cohort) for r in basic.values()),
    }
    decisions = [
        f"data source: {source}",
        f"Hawkes model {p['hawkes_model']}; criterion {crit}",
        f"grouping p_c={p['p_c']} ({p['direction']}); each subject anchors its own group",
        DIRECTION_NOTE,
        "reference counts for the 39-subject cohort disagree with each other (augmented basic row "
        "sums to 40; 36 of 39 elsewhere); raw counts are reported without reconciliation",
        "AICc sample size for pooled fits is the total event count",
        _conditioning_note(p["condition_on_first"]),
    ] + [str(w.message) for w in caught]
    tables = {"subjects": rows, "verdict_counts": counts, "similarity": heat, "failures": errors}
    return ExperimentResult(spec.name, spec, tables, summary, decisions)


RUNNERS = {
    "critical_n": run_critical_n,
    "aicc_variant": run_critical_n,
    "discrimination": run_discrimination,
    "recovery": run_recovery,
    "ridge": run_ridge,
    "cohort_pipeline": run_cohort_pipeline,
}


def run(spec: ExperimentSpec) -> ExperimentResult:
    result = RUNNERS[spec.name](spec)
    if spec.output:
        write_result(result, spec.output)
    return result
