"""Pure-numpy fallback kernels.

Same contracts and bit-identical outputs as `_kernels_nb`: grouping produces
the same partition, bin counts are exact integers, and terms are combined
with math.fsum (the reference for the numba exact-sum port). Sequential
reductions use np.add.accumulate, which is defined element-by-element and so
matches the JIT kernels' serial loops exactly.
"""

import math

import numpy as np


def exact_sum(values):
    return math.fsum(np.asarray(values, dtype=np.float64))


def build_groups(levels, cols, cards):
    m = levels.shape[1]
    gids = np.zeros(m, dtype=np.int64)
    if cols.shape[0] == 0 or m == 0:
        return gids, 1
    sub = levels[cols].T
    _, inverse = np.unique(sub, axis=0, return_inverse=True)
    gids = inverse.astype(np.int64).reshape(m)
    return gids, int(gids.max()) + 1


def _score_binned(keys, nbins, ri, counts, tbl_cell, tbl_plus):
    cellcnt = np.bincount(keys, weights=counts, minlength=nbins).astype(np.int64)
    mat = cellcnt.reshape(-1, ri)
    nplus = mat.sum(axis=1)
    terms = np.concatenate([tbl_cell[mat.ravel()], tbl_plus[nplus]])
    return math.fsum(terms)


def score_groups(gids, n_groups, xi, ri, counts, tbl_cell, tbl_plus):
    keys = gids * ri + xi.astype(np.int64)
    return _score_binned(keys, n_groups * ri, ri, counts, tbl_cell, tbl_plus)


def score_groups_refine(gids, n_groups, xj, rj, xi, ri, counts, tbl_cell, tbl_plus):
    keys = (gids * rj + xj.astype(np.int64)) * ri + xi.astype(np.int64)
    return _score_binned(keys, n_groups * rj * ri, ri, counts, tbl_cell, tbl_plus)


def total_rate(rates):
    if rates.shape[0] == 0:
        return 0.0
    return float(np.add.accumulate(rates)[-1])


def pick_edge(rates, u):
    cum = np.add.accumulate(rates)
    total = float(cum[-1])
    target = u * total
    idx = int(np.searchsorted(cum, target, side="right"))
    if idx >= rates.shape[0]:
        positive = np.flatnonzero(rates > 0.0)
        idx = int(positive[-1]) if positive.size else -1
    return idx, total


def presence_times(iters, di, dj, signs, w, init_adj, burnin, n_iterations, p):
    presence = np.zeros((p, p), dtype=np.float64)
    on_time = np.zeros((p, p), dtype=np.float64)
    on = np.triu(init_adj.astype(bool), k=1)
    t_now = 0.0
    row = 0
    n_rows = iters.shape[0]
    for m in range(n_iterations):
        wm = w[row] if row < n_rows and iters[row] == m else 0.0
        if m >= burnin:
            t_now += wm
        while row < n_rows and iters[row] == m:
            i, j = int(di[row]), int(dj[row])
            if signs[row] > 0:
                on[i, j] = True
                on_time[i, j] = t_now
            else:
                on[i, j] = False
                presence[i, j] += t_now - on_time[i, j]
            row += 1
    ii, jj = np.nonzero(on)
    for i, j in zip(ii, jj):
        presence[i, j] += t_now - on_time[i, j]
    return presence, t_now


def gibbs_chain(nbr_ptr, nbr_idx, nbr_w, fields, n_keep, thin, burnin_sweeps, uniforms):
    p = fields.shape[0]
    spins = np.where(uniforms[:p] < 0.5, 1, -1).astype(np.int8)
    pos = p
    out = np.empty((n_keep, p), dtype=np.uint8)
    total_sweeps = burnin_sweeps + n_keep * thin
    kept = 0
    for sweep in range(total_sweeps):
        for i in range(p):
            field = fields[i]
            lo, hi = nbr_ptr[i], nbr_ptr[i + 1]
            if hi > lo:
                field += float(np.dot(nbr_w[lo:hi], spins[nbr_idx[lo:hi]]))
            prob_up = 1.0 / (1.0 + np.exp(-2.0 * field))
            spins[i] = 1 if uniforms[pos] < prob_up else -1
            pos += 1
        if sweep >= burnin_sweeps and (sweep - burnin_sweeps + 1) % thin == 0:
            out[kept] = (spins > 0).astype(np.uint8)
            kept += 1
    return out
