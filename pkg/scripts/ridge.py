"""Log-likelihood over (alpha, delta) for a 6-event series on [0, 10] and its constant-ratio ridge."""
from _common import main

if __name__ == "__main__":
    main("ridge", __doc__)
