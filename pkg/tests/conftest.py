import numpy as np
import pytest
from hypothesis import settings, strategies as st
from scipy.special import gammaln

from bdmpl.data import count_config, from_rows

# JIT compilation makes first calls slow; wall-clock deadlines are meaningless here.
settings.register_profile("bdmpl", deadline=None)
settings.load_profile("bdmpl")


@pytest.fixture
def uniform4():
    """Two independent fair binary variables: all four configs once."""
    return from_rows([(0, 0), (0, 1), (1, 0), (1, 1)])


def reference_local_score(data, i, nbd, alpha=0.5):
    """Independent oracle: the Dirichlet-multinomial score evaluated straight
    from conditional count dictionaries with scipy's log-Gamma."""
    cc = count_config(data, i, nbd)
    ri = int(data.cardinalities[i])
    a_plus = ri * alpha
    total = 0.0
    for l, nplus in cc.marginals.items():
        total += gammaln(a_plus) - gammaln(a_plus + nplus)
        for k in range(ri):
            n_kl = cc.table.get((k, l), 0)
            total += gammaln(alpha + n_kl) - gammaln(alpha)
    return total


def random_binary_dataset(rng, p, n):
    """Mildly dependent binary rows: each variable copies its predecessor
    with probability 0.7, so neighborhoods carry real signal."""
    rows = np.empty((n, p), dtype=np.int64)
    rows[:, 0] = rng.integers(0, 2, size=n)
    for j in range(1, p):
        copy = rng.random(n) < 0.7
        rows[:, j] = np.where(copy, rows[:, j - 1], rng.integers(0, 2, size=n))
    return from_rows(rows)


def edge_sets(p, max_edges=None):
    """Hypothesis strategy for edge sets over p vertices."""
    pairs = [(i, j) for i in range(p) for j in range(i + 1, p)]
    return st.sets(st.sampled_from(pairs), max_size=max_edges or len(pairs))
