import functools
import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.cluster.hierarchy import linkage
from scipy.spatial.distance import squareform

from t2p import kernels
from t2p.baseline import (
    Dendrogram, complete_linkage, dtw, greedy_snippets, pairwise_dtw, pairwise_znorm_ed, region_dendrograms,
    snippet_summary, znorm_ed, znormalize,
)
from t2p.data import TimeSeries, gen_random_walk_demo, gen_sy4, pattern_waveform
from t2p.errors import ContractError, DimensionError, InputError


def dtw_by_enumeration(a, b):
    """Minimum squared cost over every monotone warping path, by recursion."""

    @functools.lru_cache(maxsize=None)
    def paths(i, j):
        # all path costs from (0, 0) to (i, j)
        c = (a[i] - b[j]) ** 2
        if i == 0 and j == 0:
            return [c]
        prev = []
        if i > 0:
            prev += paths(i - 1, j)
        if j > 0:
            prev += paths(i, j - 1)
        if i > 0 and j > 0:
            prev += paths(i - 1, j - 1)
        return [p + c for p in prev]

    return math.sqrt(min(paths(len(a) - 1, len(b) - 1)))


def brute_force_complete_linkage(d):
    """Recompute every cluster distance from scratch at each step."""
    n = d.shape[0]
    clusters = {i: [i] for i in range(n)}
    merges = []
    for step in range(n - 1):
        ids = sorted(clusters)
        best = min(
            (max(d[p, q] for p in clusters[a] for q in clusters[b]), a, b)
            for a, b in itertools.combinations(ids, 2)
        )
        dist, a, b = best
        clusters[n + step] = clusters.pop(a) + clusters.pop(b)
        merges.append((a, b, dist, len(clusters[n + step])))
    return merges


# -- znorm ED ---------------------------------------------------------------


def test_znorm_ed_examples(rng):
    a = rng.normal(size=30)
    assert znorm_ed(a, a) == 0.0
    assert znorm_ed(a, 2 * a + 3) == pytest.approx(0.0, abs=1e-12)
    b = rng.normal(size=30)
    za = (a - a.mean()) / a.std()
    zb = (b - b.mean()) / b.std()
    assert znorm_ed(a, b) == pytest.approx(np.sqrt(np.sum((za - zb) ** 2)), abs=1e-12)
    assert znorm_ed(a, b) == pytest.approx(znorm_ed(b, a), abs=1e-15)


def test_znorm_constant_windows():
    np.testing.assert_array_equal(znormalize(np.full(5, 3.0)), np.zeros(5))
    x = np.array([0.0, 1.0, 0.0, -1.0])
    assert znorm_ed(np.full(4, 2.0), x) == pytest.approx(np.linalg.norm(znormalize(x)))


def test_znorm_ed_errors():
    with pytest.raises(DimensionError):
        znorm_ed(np.zeros(3), np.zeros(4))


def test_pairwise_matches_scalar(rng):
    w = rng.normal(size=(6, 12))
    d = pairwise_znorm_ed(w)
    for i in range(6):
        for j in range(6):
            assert d[i, j] == pytest.approx(znorm_ed(w[i], w[j]), abs=1e-12)


def test_pairwise_backends_agree(rng):
    rows = znormalize(rng.normal(size=(9, 20)), axis=1)
    ref = kernels.NUMPY_KERNELS["pairwise_euclidean"](rows)
    if kernels.NUMBA_KERNELS["pairwise_euclidean"] is not None:
        np.testing.assert_allclose(kernels.NUMBA_KERNELS["pairwise_euclidean"](rows), ref, atol=1e-12)


# -- DTW ----------------------------------------------------------------------


def test_dtw_examples():
    x = np.array([1.0, 5.0, 2.0])
    assert dtw(x, x) == 0.0
    assert dtw([1.0, 2.0, 3.0], [1.0, 2.0, 2.0, 3.0]) == 0.0


def test_dtw_empty():
    with pytest.raises(ContractError):
        dtw([], [1.0])


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 6), st.integers(1, 6), st.integers(0, 2**31))
def test_dtw_matches_path_enumeration(n, m, seed):
    rng = np.random.default_rng(seed)
    a, b = rng.normal(size=n), rng.normal(size=m)
    expected = dtw_by_enumeration(tuple(a), tuple(b))
    assert dtw(a, b) == pytest.approx(expected, abs=1e-12)
    for backend in (kernels.NUMPY_KERNELS, kernels.NUMBA_KERNELS):
        if backend["dtw_cost"] is not None:
            assert math.sqrt(backend["dtw_cost"](a, b, -1)) == pytest.approx(expected, abs=1e-12)


def test_dtw_backends_bit_identical(rng):
    a, b = rng.normal(size=40), rng.normal(size=33)
    if kernels.NUMBA_KERNELS["dtw_cost"] is None:
        pytest.skip("numba unavailable")
    for band in (-1, 3, 10):
        w = band if band < 0 else max(band, 7)
        assert kernels.NUMBA_KERNELS["dtw_cost"](a, b, w) == kernels.NUMPY_KERNELS["dtw_cost"](a, b, w)


def test_dtw_bounded_by_euclidean(rng):
    for _ in range(30):
        a, b = rng.normal(size=15), rng.normal(size=15)
        assert dtw(a, b) <= np.linalg.norm(a - b) + 1e-12
        assert dtw(a, b) == pytest.approx(dtw(b, a), abs=1e-12)


def test_dtw_band(rng):
    a, b = rng.normal(size=12), rng.normal(size=12)
    assert dtw(a, b, band=0) == pytest.approx(np.linalg.norm(a - b))
    assert dtw(a, b, band=0) >= dtw(a, b, band=2) >= dtw(a, b)
    # a band narrower than the length difference is widened so a path exists
    assert np.isfinite(dtw(a, b[:5], band=1))


def test_pairwise_dtw_symmetric(rng):
    d = pairwise_dtw(rng.normal(size=(5, 10)))
    np.testing.assert_allclose(d, d.T)
    assert not np.diag(d).any()


# -- complete linkage -----------------------------------------------------------


def test_linkage_examples():
    dg = complete_linkage(np.array([[0.0, 2.5], [2.5, 0.0]]))
    assert dg.merges == [(0, 1, 2.5, 2)]
    d = np.array([[0, 1, 10], [1, 0, 10], [10, 10, 0]], dtype=float)
    dg = complete_linkage(d)
    assert dg.merges == [(0, 1, 1.0, 2), (2, 3, 10.0, 3)]


def test_linkage_rejects_asymmetric():
    with pytest.raises(InputError):
        complete_linkage(np.array([[0.0, 1.0], [2.0, 0.0]]))


def _random_dist(rng, n):
    pts = rng.normal(size=(n, 3))
    return np.sqrt(((pts[:, None] - pts[None]) ** 2).sum(-1))


def test_linkage_matches_brute_force(rng):
    for _ in range(10):
        d = _random_dist(rng, 8)
        assert complete_linkage(d).merges == brute_force_complete_linkage(d)


def test_linkage_tie_break_smallest_pair():
    d = np.ones((4, 4)) - np.eye(4)
    merges = complete_linkage(d).merges
    assert merges[0][:2] == (0, 1) and merges[1][:2] == (2, 3)
    assert merges == brute_force_complete_linkage(d)


def test_linkage_agrees_with_scipy_heights(rng):
    for _ in range(10):
        d = _random_dist(rng, 10)
        ours = complete_linkage(d).as_array()
        ref = linkage(squareform(d, checks=False), method="complete")
        np.testing.assert_allclose(ours[:, 2], ref[:, 2], atol=1e-12)
        np.testing.assert_array_equal(ours[:, 3], ref[:, 3])


def test_linkage_monotone_and_leaf_order(rng):
    dg = complete_linkage(_random_dist(rng, 12))
    heights = [m[2] for m in dg.merges]
    assert heights == sorted(heights)
    assert sorted(dg.leaf_order()) == list(range(12))
    assert sorted(dg.members(12 + 10)) == list(range(12))


def test_linkage_csv(tmp_path, rng):
    dg = complete_linkage(_random_dist(rng, 4))
    p = tmp_path / "l.csv"
    dg.to_csv(p)
    lines = p.read_text().splitlines()
    assert lines[0] == "step,left,right,distance,size" and len(lines) == 4


def test_region_dendrograms_demo():
    series = gen_random_walk_demo(200, seed=0)
    out = region_dendrograms(series, 7)
    assert set(out) == {"ed", "dtw"}
    for dg in out.values():
        assert isinstance(dg, Dendrogram) and len(dg.merges) == 6


# -- greedy snippets --------------------------------------------------------------


def test_snippets_single_pattern():
    a = pattern_waveform(1, 2, 50)
    res = greedy_snippets(TimeSeries(np.tile(a, 10)), 50, 1)
    assert res.starts[0] % 50 == 0
    assert not res.assignments.any()
    assert res.coverage.max() == pytest.approx(0.0, abs=1e-12)


def _best_pair(d):
    return min((np.minimum(d[i], d[j]).sum(), i, j) for i, j in itertools.combinations(range(len(d)), 2))


def test_snippets_two_blocks_match_exhaustive():
    a, b = pattern_waveform(1, 1, 40), pattern_waveform(1, 4, 40)
    rng = np.random.default_rng(0)
    for noise in (0.0, 0.05):
        windows = [a + noise * rng.normal(size=40) for _ in range(5)]
        windows += [b + noise * rng.normal(size=40) for _ in range(5)]
        res = greedy_snippets(TimeSeries(np.concatenate(windows)), 40, 2)
        assert sorted(s // 40 < 5 for s in res.starts) == [False, True]
        total, i, j = _best_pair(pairwise_znorm_ed(np.array(windows)))
        assert (i < 5) != (j < 5)
        if noise == 0.0:
            assert res.total_coverage == pytest.approx(total, abs=1e-9)
        else:
            assert res.total_coverage >= total - 1e-12


def test_snippets_every_window_its_own():
    series = TimeSeries(np.random.default_rng(1).normal(size=60))
    res = greedy_snippets(series, 10, 6)
    assert sorted(res.starts.tolist()) == [0, 10, 20, 30, 40, 50]
    assert res.total_coverage == pytest.approx(0.0, abs=1e-12)


def test_snippet_coverage_non_increasing_in_k():
    series = gen_sy4(30, 3, 0)
    totals = [greedy_snippets(series, 100, k).total_coverage for k in range(1, 7)]
    assert all(a >= b - 1e-12 for a, b in zip(totals, totals[1:]))


def test_snippets_errors():
    with pytest.raises(InputError):
        greedy_snippets(TimeSeries(np.zeros(30)), 10, 4)


def test_snippet_summary_shape():
    res, summary = snippet_summary(gen_sy4(0, 2, 0), 100, 4)
    assert len(summary) == 8 and summary.patterns.shape == (4, 100)
    assert np.all((summary.scores >= 0) & (summary.scores <= 1))
