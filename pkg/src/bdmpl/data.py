"""Categorical datasets stored as sparse cell-count tables.

A dataset over p variables with cardinalities r_1..r_p is kept as the list
of distinct observed level configurations ("cells") with positive counts.
Dense storage is impossible at scale: a 214-variable binary table has 2^214
cells but only tens of thousands are nonzero. Levels are stored
variable-major (shape (p, m)) so kernels scan single variables contiguously.
"""

import csv
from dataclasses import dataclass, field

import numpy as np

_MAX_UINT8_CARD = 256


def _levels_dtype(max_card):
    return np.uint8 if max_card <= _MAX_UINT8_CARD else np.int32


class CategoricalDataset:
    """n observations of p categorical variables, as distinct cells with counts.

    Attributes
    ----------
    levels : ndarray, shape (p, m)
        Level of each variable in each of the m distinct cells.
    counts : ndarray, shape (m,)
        Positive multiplicity of each cell; n = counts.sum().
    cardinalities : ndarray, shape (p,)
        Number of levels r_i of each variable (each >= 2).
    names : list of str
        Variable names (v0..v{p-1} if not supplied).
    """

    __slots__ = ("levels", "counts", "cardinalities", "names", "p", "m", "n")

    def __init__(self, levels, counts, cardinalities, names=None, _checked=False):
        levels = np.asarray(levels)
        counts = np.asarray(counts, dtype=np.int64)
        cardinalities = np.asarray(cardinalities, dtype=np.int64)
        if levels.ndim != 2:
            raise ValueError("levels must be a (p, m) array")
        p, m = levels.shape
        if m == 0:
            raise ValueError("dataset must contain at least one cell")
        if counts.shape != (m,):
            raise ValueError("counts must have one entry per cell")
        if cardinalities.shape != (p,):
            raise ValueError("one cardinality per variable required")
        if np.any(counts <= 0):
            raise ValueError("all cell counts must be positive")
        if np.any(cardinalities < 2):
            raise ValueError("cardinalities must be at least 2")
        if np.any(levels.astype(np.int64) >= cardinalities[:, None]):
            raise ValueError("level exceeds variable cardinality")
        if not _checked:
            _, dup = np.unique(levels.T, axis=0, return_counts=True)
            if np.any(dup > 1):
                raise ValueError("duplicate cell configurations")
        self.levels = np.ascontiguousarray(levels)
        self.counts = counts
        self.cardinalities = cardinalities
        self.names = list(names) if names is not None else [f"v{i}" for i in range(p)]
        if len(self.names) != p:
            raise ValueError("one name per variable required")
        self.p = p
        self.m = m
        self.n = int(counts.sum())

    def cell_dict(self):
        """Mapping from level configuration tuple to count."""
        rows = self.levels.T
        return {tuple(int(v) for v in rows[t]): int(self.counts[t]) for t in range(self.m)}

    def to_rows(self):
        """Expand cells back to an (n, p) observation matrix (multiset order: cell-major)."""
        return np.repeat(self.levels.T, self.counts, axis=0)

    def __repr__(self):
        return f"CategoricalDataset(p={self.p}, cells={self.m}, n={self.n})"


def from_rows(rows, cardinalities=None, names=None):
    """Dataset from an (n, p) matrix of observed level configurations.

    Cardinalities default to (max observed level + 1) per variable.
    """
    rows = np.asarray(rows)
    if rows.ndim != 2 or rows.shape[0] == 0 or rows.shape[1] == 0:
        raise ValueError("rows must be a nonempty (n, p) matrix")
    if np.any(rows < 0):
        raise ValueError("negative levels are not valid")
    if cardinalities is None:
        cardinalities = rows.max(axis=0).astype(np.int64) + 1
        cardinalities = np.maximum(cardinalities, 2)
    cells, counts = np.unique(rows, axis=0, return_counts=True)
    dtype = _levels_dtype(int(np.max(cardinalities)))
    return CategoricalDataset(
        cells.T.astype(dtype), counts, cardinalities, names=names, _checked=True
    )


def from_cells(cells, counts, cardinalities=None, names=None):
    """Dataset from an (m, p) matrix of distinct cells and their counts."""
    cells = np.asarray(cells)
    if cells.ndim != 2 or cells.shape[0] == 0:
        raise ValueError("cells must be a nonempty (m, p) matrix")
    if cardinalities is None:
        cardinalities = np.maximum(cells.max(axis=0).astype(np.int64) + 1, 2)
    dtype = _levels_dtype(int(np.max(cardinalities)))
    return CategoricalDataset(cells.T.astype(dtype), counts, cardinalities, names=names)


@dataclass
class ConditionalCounts:
    """Sufficient statistics of one variable given a conditioning set.

    table maps (k, l) to the count of samples with variable `vertex` at level
    k and the neighborhood at configuration l (a tuple ordered by ascending
    vertex index). Only observed configurations appear.
    """

    vertex: int
    neighborhood: tuple
    table: dict = field(default_factory=dict)
    marginals: dict = field(default_factory=dict)
    n: int = 0


def count_config(data, i, nbd):
    """Conditional counts n_{i,kl} of variable i given the variables in nbd."""
    nbd = tuple(sorted(int(v) for v in nbd))
    if not 0 <= i < data.p:
        raise ValueError(f"vertex {i} out of range for p={data.p}")
    for v in nbd:
        if not 0 <= v < data.p:
            raise ValueError(f"vertex {v} out of range for p={data.p}")
    if i in nbd:
        raise ValueError(f"vertex {i} cannot condition on itself")
    out = ConditionalCounts(vertex=int(i), neighborhood=nbd, n=data.n)
    xi = data.levels[i]
    if nbd:
        sub = data.levels[list(nbd)].T
        configs, inverse = np.unique(sub, axis=0, return_inverse=True)
    else:
        configs = np.zeros((1, 0), dtype=data.levels.dtype)
        inverse = np.zeros(data.m, dtype=np.int64)
    for t in range(data.m):
        l = tuple(int(v) for v in configs[inverse[t]])
        k = int(xi[t])
        c = int(data.counts[t])
        out.table[(k, l)] = out.table.get((k, l), 0) + c
        out.marginals[l] = out.marginals.get(l, 0) + c
    return out


def load_csv(path):
    """Dense CSV: header of variable names, one observation per row of integer
    levels, optional final "count" column for weighted rows."""
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if not header:
            raise ValueError(f"{path}: missing header row")
        weighted = header[-1].strip().lower() == "count"
        names = [h.strip() for h in (header[:-1] if weighted else header)]
        p = len(names)
        rows, weights = [], []
        for lineno, rec in enumerate(reader, start=2):
            if not rec or (len(rec) == 1 and not rec[0].strip()):
                continue
            want = p + 1 if weighted else p
            if len(rec) != want:
                raise ValueError(f"{path}:{lineno}: expected {want} fields, got {len(rec)}")
            try:
                vals = [int(x) for x in rec]
            except ValueError as exc:
                raise ValueError(f"{path}:{lineno}: non-integer level") from exc
            if weighted:
                rows.append(vals[:-1])
                weights.append(vals[-1])
            else:
                rows.append(vals)
                weights.append(1)
    if not rows:
        raise ValueError(f"{path}: no observations")
    rows = np.asarray(rows)
    weights = np.asarray(weights, dtype=np.int64)
    if np.any(weights <= 0):
        raise ValueError(f"{path}: counts must be positive")
    if np.any(rows < 0):
        raise ValueError(f"{path}: negative levels")
    # merge possible repeated rows
    cells, inverse = np.unique(rows, axis=0, return_inverse=True)
    counts = np.bincount(inverse, weights=weights, minlength=cells.shape[0]).astype(np.int64)
    cards = np.maximum(rows.max(axis=0).astype(np.int64) + 1, 2)
    dtype = _levels_dtype(int(cards.max()))
    return CategoricalDataset(cells.T.astype(dtype), counts, cards, names=names, _checked=True)


def save_csv(data, path):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(list(data.names) + ["count"])
        rows = data.levels.T
        for t in range(data.m):
            writer.writerow([int(v) for v in rows[t]] + [int(data.counts[t])])


def load_sparse_binary(path):
    """Hyper-sparse binary pattern file.

    UTF-8 text; header line "#p=<count>"; then one cell per line in the form
    "<comma-separated indices of variables at level 1>|<count>". The index
    list may be empty (the all-zeros cell).
    """
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().strip()
        if not header.startswith("#p="):
            raise ValueError(f"{path}: expected header '#p=<count>', got {header!r}")
        p = int(header[3:])
        if p < 1:
            raise ValueError(f"{path}: invalid variable count {p}")
        patterns = []
        counts = []
        seen = set()
        for lineno, line in enumerate(fh, start=2):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "|" not in line:
                raise ValueError(f"{path}:{lineno}: missing '|' separator")
            idx_part, count_part = line.split("|", 1)
            idx_part = idx_part.strip()
            try:
                count = int(count_part)
            except ValueError as exc:
                raise ValueError(f"{path}:{lineno}: bad count {count_part!r}") from exc
            if count <= 0:
                raise ValueError(f"{path}:{lineno}: count must be positive")
            if idx_part:
                try:
                    idx = sorted(int(x) for x in idx_part.split(","))
                except ValueError as exc:
                    raise ValueError(f"{path}:{lineno}: bad index list {idx_part!r}") from exc
            else:
                idx = []
            if any(v < 0 or v >= p for v in idx):
                raise ValueError(f"{path}:{lineno}: variable index out of range")
            if len(set(idx)) != len(idx):
                raise ValueError(f"{path}:{lineno}: repeated index in pattern")
            key = tuple(idx)
            if key in seen:
                raise ValueError(f"{path}:{lineno}: duplicate pattern {key}")
            seen.add(key)
            patterns.append(idx)
            counts.append(count)
    if not patterns:
        raise ValueError(f"{path}: no cells")
    m = len(patterns)
    levels = np.zeros((p, m), dtype=np.uint8)
    for t, idx in enumerate(patterns):
        for v in idx:
            levels[v, t] = 1
    return CategoricalDataset(
        levels,
        np.asarray(counts, dtype=np.int64),
        np.full(p, 2, dtype=np.int64),
        _checked=True,
    )


def save_sparse_binary(data, path):
    if np.any(data.cardinalities != 2):
        raise ValueError("sparse pattern format holds binary tables only")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"#p={data.p}\n")
        for t in range(data.m):
            idx = np.flatnonzero(data.levels[:, t])
            fh.write(",".join(str(int(v)) for v in idx) + f"|{int(data.counts[t])}\n")
