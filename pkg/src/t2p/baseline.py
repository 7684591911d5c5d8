"""Similarity-search reference methods.

* z-normalised Euclidean distance and DTW between subsequences;
* complete-linkage agglomerative clustering of a distance matrix;
* a greedy snippet selector over non-overlapping windows, a simplified
  stand-in for matrix-profile snippets.
"""

import csv
import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .data import segment
from .errors import ContractError, DimensionError, InputError
from .summary import Summary

# ---------------------------------------------------------------------------
# distances
# ---------------------------------------------------------------------------


def znormalize(x, axis=-1):
    """Subtract the mean and divide by the std; constant input maps to zeros."""
    x = np.asarray(x, dtype=np.float64)
    mu = x.mean(axis=axis, keepdims=True)
    sd = x.std(axis=axis, keepdims=True)
    centered = x - mu
    safe = np.where(sd > 0, sd, 1.0)
    return np.where(sd > 0, centered / safe, 0.0)


def znorm_ed(a, b):
    """Euclidean distance between the z-normalised versions of ``a`` and ``b``."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.ndim != 1 or a.shape != b.shape:
        raise DimensionError(f"z-normalised ED needs equal-length vectors, got {a.shape} and {b.shape}")
    if a.size < 2:
        raise DimensionError("z-normalised ED needs at least 2 samples")
    d = znormalize(a) - znormalize(b)
    return float(np.sqrt(np.dot(d, d)))


def dtw(a, b, band=None):
    """Dynamic time warping distance with squared point cost.

    Parameters
    ----------
    a, b : 1-D arrays
    band : int, optional
        Sakoe-Chiba half-width. It is widened to ``|len(a) - len(b)|`` when
        narrower so that a warping path always exists.

    Returns
    -------
    float
        Square root of the minimal accumulated squared cost.
    """
    a = np.ascontiguousarray(a, dtype=np.float64)
    b = np.ascontiguousarray(b, dtype=np.float64)
    if a.ndim != 1 or b.ndim != 1:
        raise DimensionError("dtw expects 1-D sequences")
    if a.size == 0 or b.size == 0:
        raise ContractError("dtw of an empty sequence")
    w = -1 if band is None else max(int(band), abs(a.size - b.size))
    return math.sqrt(kernels.dtw_cost(a, b, w))


def pairwise_znorm_ed(windows):
    rows = np.ascontiguousarray(znormalize(np.asarray(windows, dtype=np.float64), axis=1))
    return kernels.pairwise_euclidean(rows)


def pairwise_dtw(windows, band=None, normalize=True):
    rows = np.asarray(windows, dtype=np.float64)
    if normalize:
        rows = znormalize(rows, axis=1)
    rows = np.ascontiguousarray(rows)
    return kernels.dtw_matrix(rows, -1 if band is None else int(band))


# ---------------------------------------------------------------------------
# complete linkage
# ---------------------------------------------------------------------------


@dataclass
class Dendrogram:
    """Merge history in scipy's convention.

    ``merges[i] = (left, right, distance, size)``: cluster ids below ``n`` are
    leaves, merge ``i`` creates cluster ``n + i``.
    """

    merges: list
    labels: list

    @property
    def n_leaves(self):
        return len(self.labels)

    def as_array(self):
        return np.array([[l, r, d, s] for l, r, d, s in self.merges], dtype=np.float64).reshape(-1, 4)

    def leaf_order(self):
        """Leaves left to right as drawn."""
        n = self.n_leaves
        if n == 1:
            return [0]
        out = []
        stack = [n + len(self.merges) - 1]
        while stack:
            node = stack.pop()
            if node < n:
                out.append(node)
            else:
                left, right, _, _ = self.merges[node - n]
                stack.append(right)
                stack.append(left)
        return out

    def members(self, node):
        n = self.n_leaves
        if node < n:
            return [node]
        left, right, _, _ = self.merges[node - n]
        return self.members(left) + self.members(right)

    def to_csv(self, path):
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["step", "left", "right", "distance", "size"])
            for i, (l, r, d, s) in enumerate(self.merges):
                w.writerow([i, l, r, repr(float(d)), s])


def _check_distance_matrix(dist):
    d = np.asarray(dist, dtype=np.float64)
    if d.ndim != 2 or d.shape[0] != d.shape[1]:
        raise InputError(f"distance matrix must be square, got shape {d.shape}")
    if d.shape[0] < 1:
        raise InputError("distance matrix is empty")
    if not np.allclose(d, d.T, rtol=0, atol=1e-12):
        raise InputError("distance matrix is not symmetric")
    if np.any(np.abs(np.diag(d)) > 1e-12):
        raise InputError("distance matrix has a non-zero diagonal")
    if not np.all(np.isfinite(d)):
        raise InputError("distance matrix contains non-finite entries")
    return d


def complete_linkage(dist, labels=None):
    """Agglomerative clustering where cluster distance is the maximum pairwise distance.

    Each step merges the closest pair of active clusters; equal distances go
    to the pair with the smallest ``(min id, max id)``.
    """
    d = _check_distance_matrix(dist)
    n = d.shape[0]
    labels = list(range(n)) if labels is None else list(labels)
    if len(labels) != n:
        raise InputError(f"{len(labels)} labels for {n} leaves")
    # cluster-to-cluster distances, indexed by cluster id (up to 2n - 1 ids)
    size = 2 * n - 1
    cd = np.full((size, size), np.inf)
    cd[:n, :n] = d
    active = list(range(n))
    counts = {i: 1 for i in range(n)}
    merges = []
    for step in range(n - 1):
        best = None
        for ia in range(len(active)):
            a = active[ia]
            for b in active[ia + 1:]:
                key = (cd[a, b], a, b)  # active is kept sorted, so a < b
                if best is None or key < best:
                    best = key
        dist_ab, a, b = best
        new = n + step
        for c in active:
            if c not in (a, b):
                v = max(cd[a, c], cd[b, c])
                cd[new, c] = cd[c, new] = v
        counts[new] = counts[a] + counts[b]
        merges.append((a, b, float(dist_ab), counts[new]))
        active = [c for c in active if c not in (a, b)] + [new]
    return Dendrogram(merges, labels)


# ---------------------------------------------------------------------------
# greedy snippets
# ---------------------------------------------------------------------------


@dataclass
class SnippetResult:
    """Chosen snippets and the nearest-snippet assignment of every window.

    ``coverage`` holds, for each window, its z-normalised distance to the
    nearest chosen snippet; ``total_coverage`` is its sum.
    """

    starts: np.ndarray
    window_length: int
    assignments: np.ndarray
    coverage: np.ndarray
    snippets: np.ndarray
    series_length: int
    remainder: int

    @property
    def total_coverage(self):
        return float(self.coverage.sum())

    def to_summary(self, windows):
        """View the result as a :class:`~t2p.summary.Summary` over ``windows``."""
        m = self.window_length
        patterns = self.snippets
        ids = self.assignments
        mse = ((np.asarray(windows) - patterns[ids]) ** 2).mean(axis=1)
        # z-normalised distances lie in [0, 2 sqrt(m)]
        scores = np.clip(1.0 - self.coverage / (2.0 * math.sqrt(m)), 0.0, 1.0)
        return Summary(ids.copy(), scores, np.arange(ids.size) * m, m, self.series_length, self.remainder,
                       mse, patterns.copy())


def greedy_snippets(series, m, k):
    """Pick ``k`` representative windows by greedy coverage reduction.

    Candidates are the non-overlapping length-``m`` windows. Each round adds
    the candidate minimising ``sum_w min(coverage(w), d(candidate, w))``
    (lowest start on ties), where ``d`` is z-normalised ED.
    """
    seg = segment(series, m)
    n = len(seg)
    if k < 1:
        raise InputError(f"need at least one snippet, got k={k}")
    if n < k:
        raise InputError(f"series of length {len(series)} holds {n} windows of length {m}, fewer than k={k}")
    dist = pairwise_znorm_ed(seg.windows)
    coverage = np.full(n, np.inf)
    chosen = []
    for _ in range(k):
        totals = np.minimum(coverage[None, :], dist).sum(axis=1)
        totals[chosen] = np.inf
        pick = int(np.argmin(totals))
        chosen.append(pick)
        coverage = np.minimum(coverage, dist[pick])
    chosen_arr = np.array(chosen, dtype=np.int64)
    sub = dist[chosen_arr]  # (k, n)
    assignments = sub.argmin(axis=0)
    return SnippetResult(
        starts=seg.starts[chosen_arr],
        window_length=m,
        assignments=assignments.astype(np.int64),
        coverage=sub.min(axis=0),
        snippets=seg.windows[chosen_arr].copy(),
        series_length=len(series),
        remainder=seg.remainder,
    )


def snippet_summary(series, m, k):
    """Run :func:`greedy_snippets` and return ``(result, summary)``."""
    res = greedy_snippets(series, m, k)
    return res, res.to_summary(segment(series, m).windows)


# ---------------------------------------------------------------------------
# region clustering demo
# ---------------------------------------------------------------------------


def region_dendrograms(series, n_segments=7, band=None):
    """Split ``series`` into equal regions and cluster them under ED and DTW.

    Returns ``{"ed": Dendrogram, "dtw": Dendrogram}``.
    """
    length = len(series) // n_segments
    if length < 2:
        raise InputError(f"series of length {len(series)} is too short for {n_segments} regions")
    regions = np.asarray(series.values[:length * n_segments]).reshape(n_segments, length)
    names = [f"region{i}" for i in range(n_segments)]
    return {
        "ed": complete_linkage(pairwise_znorm_ed(regions), names),
        "dtw": complete_linkage(pairwise_dtw(regions, band), names),
    }
