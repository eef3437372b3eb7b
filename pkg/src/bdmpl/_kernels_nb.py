"""Numba JIT kernels for the hot inner loops.

Every function here has a pure-numpy twin in `_kernels_np` with identical
output. Score terms are combined with exact (Shewchuk) summation, so results
do not depend on the order groups are visited in; this is what makes
incremental rate updates, relabelings, and the two backends agree bit for
bit. All kernels release the GIL so rate evaluations can run on threads.
"""

import numpy as np
from numba import njit

# Shewchuk expansions for IEEE doubles need at most ~40 nonoverlapping
# partials (exponent range / 53); 64 leaves headroom.
_MAX_PARTIALS = 64


@njit(cache=True, nogil=True, inline="always")
def _grow(partials, n, x):
    """Add x to a nonoverlapping expansion; returns the new partial count."""
    i = 0
    for j in range(n):
        y = partials[j]
        if abs(x) < abs(y):
            x, y = y, x
        hi = x + y
        lo = y - (hi - x)
        if lo != 0.0:
            partials[i] = lo
            i += 1
        x = hi
    partials[i] = x
    return i + 1


@njit(cache=True, nogil=True, inline="always")
def _round_expansion(partials, n):
    """Correctly rounded sum of an expansion (ports math.fsum's final loop)."""
    if n == 0:
        return 0.0
    hi = partials[n - 1]
    n -= 1
    lo = 0.0
    while n > 0:
        x = hi
        y = partials[n - 1]
        n -= 1
        hi = x + y
        yr = hi - x
        lo = y - yr
        if lo != 0.0:
            break
    if n > 0 and ((lo < 0.0 and partials[n - 1] < 0.0) or (lo > 0.0 and partials[n - 1] > 0.0)):
        y = lo * 2.0
        x = hi + y
        yr = x - hi
        if y == yr:
            hi = x
    return hi


@njit(cache=True, nogil=True)
def exact_sum(values):
    """Correctly rounded sum of float64 values (order-independent)."""
    partials = np.empty(_MAX_PARTIALS, np.float64)
    n = 0
    for k in range(values.shape[0]):
        n = _grow(partials, n, values[k])
    return _round_expansion(partials, n)


@njit(cache=True, nogil=True)
def build_groups(levels, cols, cards):
    """Group cells by their configuration on the given columns.

    Parameters
    ----------
    levels : (p, m) integer array of cell levels, variable-major
    cols : (k,) int64 array of conditioning variables (ascending)
    cards : (p,) int64 cardinalities

    Returns
    -------
    gids : (m,) int64 group id per cell, numbered in lexicographic order
    n_groups : int
    """
    m = levels.shape[1]
    gids = np.zeros(m, dtype=np.int64)
    if cols.shape[0] == 0 or m == 0:
        return gids, 1
    order = np.arange(m, dtype=np.int64)
    buf = np.empty(m, dtype=np.int64)
    # LSD radix: stable counting sort from the least significant column up.
    for ci in range(cols.shape[0] - 1, -1, -1):
        c = cols[ci]
        r = cards[c]
        cnt = np.zeros(r + 1, dtype=np.int64)
        col = levels[c]
        for t in range(m):
            cnt[np.int64(col[order[t]]) + 1] += 1
        for b in range(1, r + 1):
            cnt[b] += cnt[b - 1]
        for t in range(m):
            v = np.int64(col[order[t]])
            buf[cnt[v]] = order[t]
            cnt[v] += 1
        order, buf = buf, order
    g = 0
    gids[order[0]] = 0
    for t in range(1, m):
        a = order[t - 1]
        b = order[t]
        for ci in range(cols.shape[0]):
            c = cols[ci]
            if levels[c, a] != levels[c, b]:
                g += 1
                break
        gids[order[t]] = g
    return gids, g + 1


@njit(cache=True, nogil=True)
def score_groups(gids, n_groups, xi, ri, counts, tbl_cell, tbl_plus):
    """Local log score of a variable given precomputed conditioning groups.

    tbl_cell[t] and tbl_plus[t] are the log-Gamma ratio tables at count t
    (both exactly 0.0 at t=0, so empty bins contribute nothing).
    """
    m = gids.shape[0]
    nbins = n_groups * ri
    cellcnt = np.zeros(nbins, dtype=np.int64)
    for t in range(m):
        cellcnt[gids[t] * ri + np.int64(xi[t])] += counts[t]
    partials = np.empty(_MAX_PARTIALS, np.float64)
    n = 0
    for g in range(n_groups):
        nplus = np.int64(0)
        for k in range(ri):
            c = cellcnt[g * ri + k]
            if c > 0:
                nplus += c
                n = _grow(partials, n, tbl_cell[c])
        if nplus > 0:
            n = _grow(partials, n, tbl_plus[nplus])
    return _round_expansion(partials, n)


@njit(cache=True, nogil=True)
def score_groups_refine(gids, n_groups, xj, rj, xi, ri, counts, tbl_cell, tbl_plus):
    """Local log score with conditioning groups refined by one extra variable.

    Equivalent to score_groups on groups built for the enlarged conditioning
    set, but needs only one O(m) pass given the base grouping.
    """
    m = gids.shape[0]
    ng2 = n_groups * rj
    nbins = ng2 * ri
    cellcnt = np.zeros(nbins, dtype=np.int64)
    for t in range(m):
        b = (gids[t] * rj + np.int64(xj[t])) * ri + np.int64(xi[t])
        cellcnt[b] += counts[t]
    partials = np.empty(_MAX_PARTIALS, np.float64)
    n = 0
    for g in range(ng2):
        nplus = np.int64(0)
        for k in range(ri):
            c = cellcnt[g * ri + k]
            if c > 0:
                nplus += c
                n = _grow(partials, n, tbl_cell[c])
        if nplus > 0:
            n = _grow(partials, n, tbl_plus[nplus])
    return _round_expansion(partials, n)


@njit(cache=True, nogil=True)
def total_rate(rates):
    """Sum of rates in fixed pair-index order (serial left-to-right)."""
    acc = 0.0
    for k in range(rates.shape[0]):
        acc += rates[k]
    return acc


@njit(cache=True, nogil=True)
def pick_edge(rates, u):
    """Index with probability proportional to its rate, via one serial scan.

    Returns (index, total). The scan order matches total_rate, so
    u * total always lands inside the walk; a trailing guard returns the
    last strictly positive entry against roundoff at u -> 1.
    """
    total = 0.0
    for k in range(rates.shape[0]):
        total += rates[k]
    target = u * total
    acc = 0.0
    last_pos = -1
    for k in range(rates.shape[0]):
        r = rates[k]
        if r > 0.0:
            last_pos = k
        acc += r
        if acc > target:
            return k, total
    return last_pos, total


@njit(cache=True, nogil=True)
def presence_times(iters, di, dj, signs, w, init_adj, burnin, n_iterations, p):
    """Per-edge occupancy time over a delta-encoded trace.

    Each iteration's waiting time is spent in the state *before* its deltas.
    Iterations below `burnin` advance the graph but contribute zero time.

    Returns (presence, total): presence[i, j] (upper triangle) is the summed
    waiting time of post-burn-in states containing edge (i, j); total is the
    post-burn-in time.
    """
    presence = np.zeros((p, p), dtype=np.float64)
    on_time = np.zeros((p, p), dtype=np.float64)
    on = np.zeros((p, p), dtype=np.uint8)
    for i in range(p):
        for j in range(i + 1, p):
            if init_adj[i, j] != 0:
                on[i, j] = 1
    t_now = 0.0
    row = 0
    n_rows = iters.shape[0]
    for m in range(n_iterations):
        if row < n_rows and iters[row] == m:
            wm = w[row]
        else:
            wm = 0.0
        if m >= burnin:
            t_now += wm
        while row < n_rows and iters[row] == m:
            i = di[row]
            j = dj[row]
            if signs[row] > 0:
                on[i, j] = 1
                on_time[i, j] = t_now
            else:
                on[i, j] = 0
                presence[i, j] += t_now - on_time[i, j]
            row += 1
    for i in range(p):
        for j in range(i + 1, p):
            if on[i, j] != 0:
                presence[i, j] += t_now - on_time[i, j]
    return presence, t_now


@njit(cache=True, nogil=True)
def gibbs_chain(nbr_ptr, nbr_idx, nbr_w, fields, n_keep, thin, burnin_sweeps, uniforms):
    """Systematic-scan Gibbs sampler for a pairwise binary Markov random field.

    Spins live in {-1, +1}; P(s_i = +1 | rest) = sigmoid(2 (h_i + sum_j w_ij s_j)).
    Consumes one uniform per site visit plus p for the initial state, in a
    fixed order, so output is a pure function of the uniform stream.
    """
    p = fields.shape[0]
    spins = np.empty(p, dtype=np.int8)
    pos = 0
    for i in range(p):
        spins[i] = 1 if uniforms[pos] < 0.5 else -1
        pos += 1
    out = np.empty((n_keep, p), dtype=np.uint8)
    total_sweeps = burnin_sweeps + n_keep * thin
    kept = 0
    for sweep in range(total_sweeps):
        for i in range(p):
            field = fields[i]
            for a in range(nbr_ptr[i], nbr_ptr[i + 1]):
                field += nbr_w[a] * spins[nbr_idx[a]]
            prob_up = 1.0 / (1.0 + np.exp(-2.0 * field))
            spins[i] = 1 if uniforms[pos] < prob_up else -1
            pos += 1
        if sweep >= burnin_sweeps and (sweep - burnin_sweeps + 1) % thin == 0:
            for i in range(p):
                out[kept, i] = 1 if spins[i] > 0 else 0
            kept += 1
    return out
