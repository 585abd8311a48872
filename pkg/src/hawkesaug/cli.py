"""Command-line entry point.

Exit codes: 0 success, 1 usage error, 2 data validation or insufficient data,
3 numerical failure.
"""
from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

from .augmentation import DEFAULT_P_C, SIMILAR_IF_P_GE, SIMILAR_IF_P_LT, build_group, compare_augmented, similarity_matrix
from .core import (
    DataValidationError,
    HawkesParams,
    InsufficientDataError,
    NumericalError,
    ParameterDomainError,
    PoissonParams,
    Variant,
)
from .experiments import EXPERIMENTS, ExperimentSpec, run
from .inference import FitOptions, ModelTag, fit_mle, select_model
from .ingest import ingest, write_series
from .simulation import DEFAULT_BURN_IN, SimConfig, simulate_hawkes, simulate_hawkes_excerpt, simulate_poisson

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NUMERICAL = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _add_input(p):
    p.add_argument("input", help="report file (csv or json)")
    p.add_argument("--format", choices=["csv", "json"], default=None)
    p.add_argument("--numeric-unit", choices=["seconds", "days"], default="seconds",
                   help="unit of numeric timestamps (default: epoch seconds)")
    p.add_argument("--merge-duplicates", action="store_true")


def _add_fit(p, default_model="hawkes_shifted"):
    p.add_argument("--model", choices=[t.value for t in ModelTag], default=default_model)
    p.add_argument("--n-starts", type=int, default=8)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--condition-on-first", action="store_true",
                   help="drop the first event's log-intensity from each series")


def _load(args):
    return ingest(args.input, args.format, args.numeric_unit, args.merge_duplicates)


def _fit_options(args) -> FitOptions:
    if args.n_starts < 1:
        raise UsageError("--n-starts must be >= 1")
    return FitOptions(n_starts=args.n_starts, seed=args.seed, condition_on_first=args.condition_on_first)


def _emit(obj, out=None):
    text = json.dumps(obj, indent=2, default=str)
    if out:
        Path(out).write_text(text + "\n")
    else:
        print(text)


def cmd_simulate(args):
    if args.n_events is None and args.horizon is None:
        raise UsageError("give --n-events or --horizon")
    tag = ModelTag(args.model)
    series = []
    for i in range(args.n_series):
        cfg = SimConfig(seed=args.seed, n_events=args.n_events, horizon=args.horizon,
                        burn_in_events=args.burn_in).child(i)
        sid = f"{args.prefix}{i}"
        if tag is ModelTag.POISSON:
            series.append(simulate_poisson(PoissonParams(args.lambda_p), cfg, id=sid))
            continue
        params = HawkesParams(args.lambda0, args.alpha, args.delta, args.gamma,
                              Variant.FULL if tag is ModelTag.HAWKES_FULL else Variant.SHIFTED)
        if args.excerpt:
            if args.n_events is None:
                raise UsageError("--excerpt needs --n-events")
            series.append(simulate_hawkes_excerpt(params, args.n_events, cfg, id=sid))
        else:
            series.append(simulate_hawkes(params, cfg, id=sid))
    if args.output:
        write_series(series, args.output)
    else:
        w = csv.writer(sys.stdout)
        w.writerow(("subject_id", "timestamp", "pain_level"))
        for s in series:
            for t in s.times:
                w.writerow((s.id, repr(float(t)), 1))


def cmd_fit(args):
    opts = _fit_options(args)
    out = []
    for s in _load(args):
        out.append({"subject": s.id, **fit_mle(args.model, s, opts).summary()})
    _emit(out, args.output)


def cmd_select(args):
    opts = _fit_options(args)
    out = []
    for s in _load(args):
        fh = fit_mle(args.model, s, opts)
        fp = fit_mle(ModelTag.POISSON, s, opts)
        v = select_model(fh, fp, args.criterion)
        out.append({"subject": s.id, "n_events": s.n_events, "delta": v.delta_aic,
                    "criterion": v.criterion, "verdict": v.verdict.value,
                    "confidence_level": v.confidence_level,
                    "relative_likelihood": v.relative_likelihood})
    _emit(out, args.output)


def cmd_similarity(args):
    P = similarity_matrix(_load(args))
    fh = open(args.output, "w", newline="") if args.output else sys.stdout
    try:
        w = csv.writer(fh)
        w.writerow(["id", *P.ids])
        for i, a in enumerate(P.ids):
            w.writerow([a, *(repr(float(x)) for x in P.p[i])])
    finally:
        if args.output:
            fh.close()


def cmd_augment(args):
    cohort = _load(args)
    P = similarity_matrix(cohort)
    anchors = args.anchor or list(P.ids)
    opts = _fit_options(args)
    out = []
    for a in anchors:
        try:
            g = build_group(P, a, args.p_c, args.direction)
        except KeyError as exc:
            raise DataValidationError(str(exc)) from None
        fh, fp, v = compare_augmented(g, cohort, args.model, args.criterion, opts)
        out.append({"anchor": a, "members": list(g.members), "total_events": fh.total_events,
                    "params": fh.params.as_dict(), "loglik_hawkes": fh.loglik,
                    "loglik_poisson": fp.loglik, "delta": v.delta_aic,
                    "verdict": v.verdict.value, "confidence_level": v.confidence_level,
                    "at_boundary": fh.at_boundary})
    _emit(out, args.output)


def cmd_ingest(args):
    series = _load(args)
    if args.output:
        write_series(series, args.output)
    else:
        _emit([{"subject": s.id, "times": s.times.tolist(), "window_end": s.window_end} for s in series])


def _parse_set(items) -> dict:
    out = {}
    for item in items or ():
        key, sep, raw = item.partition("=")
        if not sep:
            raise UsageError(f"--set expects key=value, got {item!r}")
        try:
            out[key] = json.loads(raw)
        except json.JSONDecodeError:
            out[key] = raw
    return out


def cmd_experiment(args):
    fields = {"name": args.name}
    if args.config:
        fields = json.loads(Path(args.config).read_text())
        if fields.setdefault("name", args.name) != args.name:
            raise UsageError(f"config is for {fields['name']!r}, not {args.name!r}")
    overrides = dict(fields.get("overrides", {}))
    overrides.update(_parse_set(args.set))
    if args.group_by_label:
        overrides["grouping"] = "label"
    fields["overrides"] = overrides
    for key in ("seed", "trials", "workers", "output"):
        if getattr(args, key) is not None:
            fields[key] = getattr(args, key)
    if args.data:
        fields["data_path"] = args.data
    try:
        spec = ExperimentSpec(**fields)
    except (TypeError, ValueError) as exc:
        raise UsageError(str(exc)) from None
    result = run(spec)
    _emit({"name": result.name, "summary": result.summary, "decisions": result.decisions})


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="hawkesaug", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("simulate", help="simulate Poisson or Hawkes series")
    p.add_argument("--model", choices=[t.value for t in ModelTag], default="hawkes_full")
    p.add_argument("--lambda0", type=float, default=1.0)
    p.add_argument("--alpha", type=float, default=3.0)
    p.add_argument("--delta", type=float, default=6.0)
    p.add_argument("--gamma", type=float, default=None)
    p.add_argument("--lambda-p", type=float, default=1.0)
    p.add_argument("--n-events", type=int, default=None)
    p.add_argument("--horizon", type=float, default=None)
    p.add_argument("--n-series", type=int, default=1)
    p.add_argument("--excerpt", action="store_true", help="take excerpts after a burn-in")
    p.add_argument("--burn-in", type=int, default=DEFAULT_BURN_IN)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--prefix", default="S")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("fit", help="maximum-likelihood fit per subject")
    _add_input(p)
    _add_fit(p)
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("select", help="Hawkes vs Poisson selection per subject")
    _add_input(p)
    _add_fit(p)
    p.add_argument("--criterion", choices=["aic", "aicc"], default="aic")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_select)

    p = sub.add_parser("similarity", help="pairwise KS p-value matrix")
    _add_input(p)
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_similarity)

    p = sub.add_parser("augment", help="augmented fits per anchor")
    _add_input(p)
    _add_fit(p)
    p.add_argument("--anchor", action="append", help="anchor subject (repeatable; default all)")
    p.add_argument("--p-c", type=float, default=DEFAULT_P_C)
    p.add_argument("--direction", choices=[SIMILAR_IF_P_GE, SIMILAR_IF_P_LT], default=SIMILAR_IF_P_GE)
    p.add_argument("--criterion", choices=["aic", "aicc"], default="aic")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_augment)

    p = sub.add_parser("ingest", help="normalize a report file into day-offset series")
    _add_input(p)
    p.add_argument("-o", "--output", help="write csv/json (numeric days) instead of printing")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("experiment", help="run a named experiment")
    p.add_argument("name", choices=EXPERIMENTS)
    p.add_argument("--config", help="JSON file mirroring ExperimentSpec")
    p.add_argument("--set", action="append", metavar="KEY=VALUE", help="parameter override (JSON value)")
    p.add_argument("--seed", type=int)
    p.add_argument("--trials", type=int)
    p.add_argument("--workers", type=int)
    p.add_argument("--output", help="directory for CSV tables and manifest.json")
    p.add_argument("--data", help="cohort report file for cohort_pipeline")
    p.add_argument("--group-by-label", action="store_true",
                   help="discrimination: group by generator label instead of KS similarity")
    p.set_defaults(func=cmd_experiment)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except UsageError as exc:
        print(f"hawkesaug: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DataValidationError, InsufficientDataError, FileNotFoundError, json.JSONDecodeError) as exc:
        print(f"hawkesaug: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (NumericalError, ArithmeticError) as exc:
        print(f"hawkesaug: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (ParameterDomainError, ValueError) as exc:
        print(f"hawkesaug: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
