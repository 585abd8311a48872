import argparse
import json
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from hawkesaug.experiments import ExperimentSpec, run  # noqa: E402


def main(name: str, description: str, extra=None, overrides=None):
    ap = argparse.ArgumentParser(description=description)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--trials", type=int, default=None)
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--out", default=f"results/{name}")
    ap.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                    help="parameter override, value parsed as JSON")
    if extra:
        extra(ap)
    args = ap.parse_args()
    ov = dict(overrides(args) if overrides else {})
    for item in args.set:
        key, _, raw = item.partition("=")
        try:
            ov[key] = json.loads(raw)
        except json.JSONDecodeError:
            ov[key] = raw
    spec = ExperimentSpec(getattr(args, "experiment", name), ov, args.seed, args.trials, args.out,
                          args.workers, getattr(args, "data", None))
    result = run(spec)
    print(json.dumps(result.summary, indent=2, default=str))
    print(f"wrote {args.out}")
