"""Per-window pattern assignments produced by a summarizer."""

from dataclasses import dataclass

import numpy as np


@dataclass
class Summary:
    """Which pattern explains each non-overlapping window, and how well.

    Attributes
    ----------
    pattern_ids : (n_windows,) int array
    scores : (n_windows,) float array in [0, 1]
    starts : (n_windows,) int array of window start offsets
    window_length : int
    series_length : int
        Length of the summarized series, including the dropped remainder.
    remainder : int
        Trailing samples not covered by a window.
    window_mse : (n_windows,) float array
        Mean squared error between each window and its assigned pattern.
    patterns : (n_patterns, window_length) array
    latent : (n_windows, n_patterns) array, optional
        Deterministic latent activations, when the summarizer has them.
    """

    pattern_ids: np.ndarray
    scores: np.ndarray
    starts: np.ndarray
    window_length: int
    series_length: int
    remainder: int
    window_mse: np.ndarray
    patterns: np.ndarray
    latent: np.ndarray = None

    def __len__(self):
        return self.pattern_ids.size

    @property
    def n_patterns(self):
        return self.patterns.shape[0]

    def used_patterns(self):
        return np.unique(self.pattern_ids)
