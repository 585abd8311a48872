"""Single and augmented model preference per subject, with verdict counts per confidence level.

Without --data a synthetic 39-subject cohort is used.
"""
from _common import main


def extra(ap):
    ap.add_argument("--data", help="report file (csv or json)")


if __name__ == "__main__":
    main("cohort_pipeline", __doc__, extra)
