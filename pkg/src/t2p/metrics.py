"""MDL compression, precision/recall against labelled windows, Hoyer sparsity."""

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError, ContractError, InputError

NO_LABEL = -1


@dataclass(frozen=True)
class DescriptionLengths:
    """Description-length budget of a summary, in samples / pointer units.

    ``dl_T`` is the series length, ``dl_P`` the total length of patterns that
    explain at least one window, ``dl_T_given_P`` one pointer per correctly
    explained window, and ``dl_penalty`` the length of the windows that are
    not correctly explained.
    """

    dl_T: float
    dl_P: float
    dl_T_given_P: float
    dl_penalty: float

    def as_tuple(self):
        return (self.dl_T, self.dl_P, self.dl_T_given_P, self.dl_penalty)


@dataclass
class EvalReport:
    compression: float
    precision: float = None
    recall: float = None
    matching: dict = field(default_factory=dict)
    lengths: DescriptionLengths = None
    sparsity: list = None


def _ids(summary_or_ids):
    ids = getattr(summary_or_ids, "pattern_ids", summary_or_ids)
    return np.asarray(ids, dtype=np.int64)


def _check_labels(ids, labels):
    labels = np.asarray(labels, dtype=np.int64)
    if labels.shape != ids.shape:
        raise InputError(f"{labels.size} window labels for {ids.size} assigned windows")
    return labels


def match_patterns(summary, labels):
    """Greedy one-to-one matching of learned pattern ids to label ids.

    Repeatedly pairs the (learned, label) combination sharing the most
    windows, lowest ids first on ties, until no remaining pair shares a
    window. Windows labelled ``-1`` take no part. Returns ``{learned: label}``.
    """
    ids = _ids(summary)
    labels = _check_labels(ids, labels)
    keep = labels != NO_LABEL
    ids, labels = ids[keep], labels[keep]
    if ids.size == 0:
        return {}
    learned = np.unique(ids)
    truth = np.unique(labels)
    li = np.searchsorted(learned, ids)
    ti = np.searchsorted(truth, labels)
    overlap = np.zeros((learned.size, truth.size), dtype=np.int64)
    np.add.at(overlap, (li, ti), 1)

    matching = {}
    while True:
        best = overlap.max()
        if best <= 0:
            break
        r, c = np.argwhere(overlap == best)[0]  # row-major -> lowest (learned, label)
        matching[int(learned[r])] = int(truth[c])
        overlap[r, :] = -1
        overlap[:, c] = -1
    return matching


def correct_mask(summary, labels, matching=None):
    ids = _ids(summary)
    labels = _check_labels(ids, labels)
    if matching is None:
        matching = match_patterns(ids, labels)
    mapped = np.array([matching.get(int(i), NO_LABEL - 1) for i in ids], dtype=np.int64)
    return (mapped == labels) & (labels != NO_LABEL)


def precision_recall(summary, labels, matching=None):
    """Fraction of windows paired with their label, and fraction of labels found."""
    ids = _ids(summary)
    labels = _check_labels(ids, labels)
    if ids.size == 0:
        raise InputError("no windows to evaluate")
    if matching is None:
        matching = match_patterns(ids, labels)
    precision = float(correct_mask(ids, labels, matching).mean())
    truth = np.unique(labels[labels != NO_LABEL])
    recall = float(len(set(matching.values())) / truth.size) if truth.size else 0.0
    return precision, recall


def description_lengths(series_length, summary, labels=None, mse_threshold=None):
    """Description lengths of ``summary`` over a series of ``series_length`` samples.

    A window is correctly explained when its matched label agrees (``labels``
    given) or when its MSE against the assigned pattern is at most
    ``mse_threshold``.
    """
    m = summary.window_length
    ids = _ids(summary)
    if labels is not None:
        ok = correct_mask(ids, labels)
    elif mse_threshold is not None:
        ok = np.asarray(summary.window_mse) <= mse_threshold
    else:
        raise ConfigurationError("description_lengths needs window labels or an MSE threshold")
    used = np.unique(ids[ok])
    n_ok = int(ok.sum())
    n_bad = ids.size - n_ok
    return DescriptionLengths(float(series_length), float(m * used.size), float(n_ok), float(m * n_bad))


def compression(dl):
    """``dl_T / (dl_P + dl_T_given_P + dl_penalty)``; larger is better."""
    denom = dl.dl_P + dl.dl_T_given_P + dl.dl_penalty
    if denom <= 0:
        raise ContractError("compression undefined: description length of the summary is zero")
    return dl.dl_T / denom


def default_mse_threshold(window_mse, q=95.0):
    return float(np.percentile(np.asarray(window_mse), q))


def hoyer_measure(y):
    """Hoyer sparsity of each row of ``y`` (0 for dense, 1 for one-hot)."""
    y = np.atleast_2d(np.asarray(y, dtype=np.float64))
    d = y.shape[-1]
    if d < 2:
        raise ContractError("Hoyer sparsity needs at least 2 dimensions")
    l1 = np.abs(y).sum(axis=-1)
    l2 = np.sqrt((y * y).sum(axis=-1))
    out = np.zeros(l1.shape)
    nz = l2 > 0
    out[nz] = (np.sqrt(d) - l1[nz] / l2[nz]) / (np.sqrt(d) - 1.0)
    return out


def hoyer_sparsity(z):
    """Mean Hoyer sparsity after scaling each latent dimension to unit std."""
    z = np.asarray(z, dtype=np.float64)
    if z.ndim != 2 or z.shape[1] < 2:
        raise ContractError(f"need an (n, d) latent matrix with d >= 2, got shape {z.shape}")
    if z.shape[0] < 2:
        raise ContractError("need at least two rows to estimate per-dimension std")
    std = z.std(axis=0)
    scale = np.where(std < 1e-12, 1.0, std)
    return float(np.clip(hoyer_measure(z / scale), 0.0, 1.0).mean())


def evaluate(summary, labels=None, mse_threshold=None):
    """Compression plus, when labels are given, precision/recall and matching."""
    if labels is None:
        if mse_threshold is None:
            mse_threshold = default_mse_threshold(summary.window_mse)
        dl = description_lengths(summary.series_length, summary, mse_threshold=mse_threshold)
        return EvalReport(compression(dl), lengths=dl)
    matching = match_patterns(summary, labels)
    p, r = precision_recall(summary, labels, matching)
    dl = description_lengths(summary.series_length, summary, labels=labels)
    return EvalReport(compression(dl), p, r, matching, dl)
