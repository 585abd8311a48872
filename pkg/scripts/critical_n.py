"""Mean dAIC(Hawkes - Poisson) against series length for data simulated from (1, 3, 6)."""
from _common import main


def extra(ap):
    ap.add_argument("--aicc", action="store_true", help="use AICc instead of AIC")


def overrides(args):
    if args.aicc:
        args.experiment = "aicc_variant"
        if args.out == "results/critical_n":
            args.out = "results/aicc_variant"
    return {}


if __name__ == "__main__":
    main("critical_n", __doc__, extra, overrides)
