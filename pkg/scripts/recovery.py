"""Parameter recovery from N_aug pooled 16-event excerpts versus one continuous series."""
from _common import main

if __name__ == "__main__":
    main("recovery", __doc__)
