"""Independent reference implementations used by the tests."""
import itertools

import numpy as np


def exact_ks_pvalue(a, b):
    """Permutation p-value P(D >= d_obs) over all C(n_a + n_b, n_a) relabelings.

    Assumes no ties in the pooled sample.
    """
    a, b = np.asarray(a, float), np.asarray(b, float)
    na, nb = a.size, b.size
    n = na + nb
    order = np.argsort(np.concatenate([a, b]))
    observed = np.zeros(n, bool)
    observed[order < na] = True  # membership of sorted pooled points in a

    combos = np.array(list(itertools.combinations(range(n), na)))
    masks = np.zeros((combos.shape[0], n), bool)
    masks[np.arange(combos.shape[0])[:, None], combos] = True

    def stat(m):
        fa = np.cumsum(m, axis=-1) / na
        fb = np.cumsum(~m, axis=-1) / nb
        return np.max(np.abs(fa - fb), axis=-1)

    d_obs = stat(observed)
    return float(np.mean(stat(masks) >= d_obs - 1e-12))
