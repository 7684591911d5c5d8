"""Pattern-bank summarization of univariate time series.

A convolutional variational autoencoder with a BinConcrete latent learns k
patterns (the decoder kernels) that compress a series; each non-overlapping
window is then assigned to one pattern. The package also ships synthetic
benchmarks, MDL-style evaluation, similarity-search baselines and a CLI
(``t2p --help``).
"""

from ._accel import backend_name
from .data import (GeneratorSpec, TimeSeries, add_gaussian_noise, gen_ar1, gen_random_walk_demo, gen_sy4, gen_sy10,
                   generate, load_csv, save_csv, segment)
from .errors import (ConfigurationError, ContractError, DataFormatError, DimensionError, DivergenceError,
                     DomainError, InputError, T2PError)
from .metrics import compression, description_lengths, evaluate, hoyer_sparsity, precision_recall
from .model import PRESETS, T2PConfig, T2PModel, assign, extract_patterns, preset, summarize, train
from .summary import Summary

__version__ = "0.1.0"

__all__ = [
    "backend_name",
    "GeneratorSpec", "TimeSeries", "add_gaussian_noise", "gen_ar1", "gen_random_walk_demo", "gen_sy4", "gen_sy10",
    "generate", "load_csv", "save_csv", "segment",
    "ConfigurationError", "ContractError", "DataFormatError", "DimensionError", "DivergenceError", "DomainError",
    "InputError", "T2PError",
    "compression", "description_lengths", "evaluate", "hoyer_sparsity", "precision_recall",
    "PRESETS", "T2PConfig", "T2PModel", "assign", "extract_patterns", "preset", "summarize", "train",
    "Summary",
]
