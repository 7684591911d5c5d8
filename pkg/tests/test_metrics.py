import itertools
import math

import numpy as np
import pytest
from hypothesis import HealthCheck, assume, given, settings
from hypothesis import strategies as st

from t2p.errors import ConfigurationError, ContractError, InputError
from t2p.metrics import (
    DescriptionLengths, compression, default_mse_threshold, description_lengths, evaluate, hoyer_measure,
    hoyer_sparsity, match_patterns, precision_recall,
)
from t2p.summary import Summary


def make_summary(ids, m=100, series_length=None, window_mse=None, k=None):
    ids = np.asarray(ids, dtype=np.int64)
    n = ids.size
    k = k or int(ids.max()) + 1
    return Summary(
        pattern_ids=ids,
        scores=np.ones(n),
        starts=np.arange(n) * m,
        window_length=m,
        series_length=series_length if series_length is not None else n * m,
        remainder=0,
        window_mse=np.zeros(n) if window_mse is None else np.asarray(window_mse, dtype=float),
        patterns=np.zeros((k, m)),
    )


def exhaustive_best_overlap(ids, labels):
    """Total overlap of the best one-to-one matching, by brute force."""
    learned, truth = sorted(set(ids)), sorted(set(labels))
    best = 0
    for r in range(1, min(len(learned), len(truth)) + 1):
        for ls in itertools.combinations(learned, r):
            for ts in itertools.permutations(truth, r):
                best = max(best, sum(int(np.sum((ids == a) & (labels == b))) for a, b in zip(ls, ts)))
    return best


# -- matching, precision, recall ----------------------------------------------


def test_identity_matching():
    labels = np.array([0, 1, 2, 3, 0, 1, 2, 3])
    assert match_patterns(make_summary(labels), labels) == {0: 0, 1: 1, 2: 2, 3: 3}
    assert precision_recall(make_summary(labels), labels) == (1.0, 1.0)


def test_two_block_matching():
    ids = np.array([0] * 5 + [1] * 5)
    labels = np.array([7] * 5 + [9] * 5)
    assert match_patterns(make_summary(ids), labels) == {0: 7, 1: 9}


def test_overlap_matching_example():
    # windows 1..6: A covers {1,2,3,6}, B covers {4,5}; X = {1,2,3}, Y = {4,5,6}
    ids = np.array([0, 0, 0, 1, 1, 0])
    labels = np.array([0, 0, 0, 1, 1, 1])
    assert match_patterns(make_summary(ids), labels) == {0: 0, 1: 1}
    assert exhaustive_best_overlap(ids, labels) == 5


def test_greedy_matches_exhaustive_on_small_cases():
    rng = np.random.default_rng(0)
    agree = 0
    for _ in range(200):
        ids = rng.integers(0, 4, size=12)
        labels = rng.integers(0, 4, size=12)
        matching = match_patterns(make_summary(ids, k=4), labels)
        greedy = sum(int(np.sum((ids == a) & (labels == b))) for a, b in matching.items())
        best = exhaustive_best_overlap(ids, labels)
        assert greedy <= best
        assert greedy >= best / 2  # greedy maximum-weight matching is a 1/2-approximation
        agree += greedy == best
    assert agree > 150


def test_recall_three_of_four():
    labels = np.repeat([0, 1, 2, 3], 10)
    ids = np.repeat([0, 1, 2, 2], 10)  # fourth pattern's windows go to pattern 2
    p, r = precision_recall(make_summary(ids), labels)
    assert r == 0.75
    assert p == 0.75


def test_precision_counting():
    labels = np.zeros(10, dtype=int)
    ids = np.array([0] * 7 + [1] * 3)
    p, _ = precision_recall(make_summary(ids), labels)
    assert p == 0.7


def test_label_count_mismatch():
    with pytest.raises(InputError):
        match_patterns(make_summary([0, 1]), [0, 1, 2])


def test_unlabelled_windows_count_as_incorrect():
    ids = np.array([0, 0, 1, 1])
    labels = np.array([0, -1, 1, 1])
    assert match_patterns(make_summary(ids), labels) == {0: 0, 1: 1}
    assert precision_recall(make_summary(ids), labels) == (0.75, 1.0)


@settings(max_examples=50, deadline=None, suppress_health_check=[HealthCheck.filter_too_much])
@given(st.lists(st.integers(0, 3), min_size=4, max_size=30), st.integers(0, 2**31))
def test_precision_recall_invariant_under_relabeling(labels, seed):
    labels = np.array(labels)
    rng = np.random.default_rng(seed)
    ids = rng.integers(0, 4, size=labels.size)
    overlap = np.array([[np.sum((ids == a) & (labels == b)) for b in range(4)] for a in range(4)])
    positive = overlap[overlap > 0]
    # with tied overlaps the lowest-id tie-break is, by construction, label dependent
    assume(np.unique(positive).size == positive.size)
    perm = rng.permutation(4)
    s = make_summary(ids, k=4)
    assert precision_recall(s, labels) == precision_recall(s, perm[labels])


# -- description lengths, compression -----------------------------------------


def test_worked_example_exact():
    s = make_summary([0, 1, 0, 1, 0, 1, 0, 1, 0, 1], m=100)
    labels = np.array([0, 1] * 5)
    dl = description_lengths(1000, s, labels=labels)
    assert dl.as_tuple() == (1000, 200, 10, 0)
    assert compression(dl) == 1000 / 210
    assert round(compression(dl), 4) == 4.7619


def test_no_patterns_used():
    s = make_summary([0, 0, 0], m=10, window_mse=[5.0, 5.0, 5.0])
    dl = description_lengths(30, s, mse_threshold=1.0)
    assert dl.dl_P == 0 and dl.dl_T_given_P == 0 and dl.dl_penalty == dl.dl_T


def test_one_misassigned_window():
    s = make_summary([0, 1, 2, 2])
    dl = description_lengths(400, s, labels=[0, 1, 2, 3])
    assert dl.dl_penalty == 100 and dl.dl_T_given_P == 3


def test_all_wrong_never_compresses():
    # no window is explained, so no pattern is charged and the ratio is exactly 1
    s = make_summary([0, 0, 0, 0], m=10, window_mse=[2.0] * 4)
    assert compression(description_lengths(40, s, mse_threshold=1.0)) == 1.0
    s = make_summary([0, 1], m=10)
    assert compression(description_lengths(20, s, labels=[-1, -1])) == 1.0
    # with a remainder the penalty cannot absorb the whole series, still no compression gain
    rng = np.random.default_rng(0)
    for _ in range(50):
        ids = rng.integers(0, 3, size=8)
        labels = rng.integers(0, 3, size=8)
        dl = description_lengths(80, make_summary(ids, m=10, k=3), labels=labels)
        if dl.dl_T_given_P == 0:
            assert compression(dl) <= 1.0


def test_requires_labels_or_threshold():
    with pytest.raises(ConfigurationError):
        description_lengths(100, make_summary([0]))


def test_zero_denominator():
    with pytest.raises(ContractError):
        compression(DescriptionLengths(10.0, 0.0, 0.0, 0.0))


def test_window_accounting():
    rng = np.random.default_rng(1)
    for _ in range(20):
        ids = rng.integers(0, 4, size=16)
        labels = rng.integers(0, 4, size=16)
        dl = description_lengths(1600, make_summary(ids, k=4), labels=labels)
        assert dl.dl_T_given_P + dl.dl_penalty / 100 == 16


def test_compression_grows_with_repeats():
    values = []
    for r in (1, 2, 4, 8):
        labels = np.tile([0, 1, 2, 3], r)
        dl = description_lengths(400 * r, make_summary(labels), labels=labels)
        assert dl.dl_P == 400
        values.append(compression(dl))
    assert all(a < b for a, b in zip(values, values[1:]))
    assert values[-1] < 100  # one pointer per 100 samples bounds the ratio


def test_threshold_mode_uses_mse():
    s = make_summary([0, 1, 1, 0], m=10, window_mse=[0.1, 0.2, 3.0, 0.1])
    dl = description_lengths(40, s, mse_threshold=0.5)
    assert dl.as_tuple() == (40, 20, 3, 10)


def test_default_threshold_is_95th_percentile():
    mse = np.arange(101, dtype=float)
    assert default_mse_threshold(mse) == 95.0


def test_evaluate_with_and_without_labels():
    labels = np.array([0, 1, 2, 3] * 10)
    rep = evaluate(make_summary(labels), labels)
    assert rep.compression == pytest.approx(4000 / 440)
    assert rep.precision == 1.0 and rep.recall == 1.0
    mse = np.linspace(0, 1, 40)
    rep = evaluate(make_summary(labels, window_mse=mse))
    assert rep.precision is None
    assert rep.lengths.dl_penalty == 100 * 2


# -- Hoyer sparsity ----------------------------------------------------------


def test_hoyer_one_hot():
    z = np.eye(4)[[0, 1, 2, 3, 0, 2]]
    assert hoyer_sparsity(z) == pytest.approx(1.0, abs=1e-12)


def test_hoyer_uniform_rows():
    z = np.full((5, 4), 0.25)
    assert hoyer_sparsity(z) == 0.0


def test_hoyer_formula_value():
    assert hoyer_measure([3.0, 1.0, 0.0, 0.0])[0] == pytest.approx(2 - 4 / math.sqrt(10), abs=1e-12)


def test_hoyer_unit_std_columns_keep_value():
    # columns of this matrix all have std 1, so normalization leaves rows unchanged
    z = np.array([[1.0, 1.0, 1.0, 1.0], [-1.0, -1.0, -1.0, -1.0]])
    z = z + np.array([[2.0, 0.0, -1.0, -1.0]])  # shift keeps std at 1
    assert np.allclose(z.std(axis=0), 1.0)
    assert hoyer_sparsity(z) == pytest.approx(np.clip(hoyer_measure(z), 0, 1).mean())


def test_hoyer_zero_rows_score_zero():
    assert hoyer_measure(np.zeros((2, 3))).tolist() == [0.0, 0.0]


def test_hoyer_errors():
    with pytest.raises(ContractError):
        hoyer_sparsity(np.ones((5, 1)))
    with pytest.raises(ContractError):
        hoyer_sparsity(np.ones((1, 4)))


@settings(max_examples=50, deadline=None)
@given(st.integers(2, 10), st.integers(2, 6), st.integers(0, 2**31))
def test_hoyer_permutation_invariance(n, d, seed):
    rng = np.random.default_rng(seed)
    z = rng.random((n, d))
    base = hoyer_sparsity(z)
    assert 0.0 <= base <= 1.0
    assert hoyer_sparsity(z[rng.permutation(n)]) == pytest.approx(base, abs=1e-12)
    assert hoyer_sparsity(z[:, rng.permutation(d)]) == pytest.approx(base, abs=1e-12)
