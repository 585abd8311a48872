"""Single and augmented dAIC for 10 Poisson(7/3) and 10 Hawkes(1, 2, 3.5) series of 30 events."""
from _common import main


def extra(ap):
    ap.add_argument("--group-by-label", action="store_true",
                    help="pool by generator class instead of KS similarity")


if __name__ == "__main__":
    main("discrimination", __doc__, extra,
         lambda a: {"grouping": "label"} if a.group_by_label else {})
