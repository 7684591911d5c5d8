"""Time series containers, synthetic benchmarks, segmentation and CSV I/O."""

import configparser
import csv
import math
from dataclasses import dataclass

import numpy as np
from scipy.signal import lfilter

from .errors import ConfigurationError, DataFormatError, DomainError, InputError

#: ``(amplitude, cycles per window)`` of the four SY4 patterns.
SY4_PATTERNS = ((1.0, 1.0), (1.0, 3.0), (2.0, 1.0), (2.0, 3.0))
#: amplitudes {1, 2} x frequencies {1..5} for SY10.
SY10_PATTERNS = tuple((a, f) for a in (1.0, 2.0) for f in (1.0, 2.0, 3.0, 4.0, 5.0))

NO_LABEL = -1


@dataclass
class TimeSeries:
    """A univariate series with optional per-sample integer labels."""

    values: np.ndarray
    labels: np.ndarray = None
    sample_rate: float = None
    provenance: str = ""

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64).reshape(-1)
        if not np.all(np.isfinite(self.values)):
            raise InputError("time series contains non-finite values")
        if self.labels is not None:
            self.labels = np.asarray(self.labels, dtype=np.int64).reshape(-1)
            if self.labels.shape != self.values.shape:
                raise InputError(
                    f"labels length {self.labels.size} differs from series length {self.values.size}"
                )

    def __len__(self):
        return self.values.size

    @property
    def has_labels(self):
        return self.labels is not None


@dataclass
class GeneratorSpec:
    """Recipe for a labelled synthetic series built from sinusoidal patterns.

    Pattern ``i`` is ``amplitude * sin(2 pi * frequency * t / length)`` for
    ``t = 0 .. length-1``. The blocks listed in ``order`` (default: all
    patterns in index order) are concatenated and that block sequence is
    repeated ``repeats`` times before noise is added.
    """

    patterns: tuple = SY4_PATTERNS
    pattern_length: int = 100
    order: tuple = None
    repeats: int = 10
    noise: float = 0.0
    seed: int = 0
    name: str = "custom"

    def validate(self):
        if not 0.0 <= self.noise <= 100.0:
            raise ConfigurationError("noise level must be in [0,100]")
        if self.pattern_length < 9:
            raise ConfigurationError(f"pattern length must be >= 9, got {self.pattern_length}")
        if self.repeats < 1:
            raise ConfigurationError(f"repeats must be >= 1, got {self.repeats}")
        if not self.patterns:
            raise ConfigurationError("at least one pattern is required")
        order = self.block_order()
        if min(order) < 0 or max(order) >= len(self.patterns):
            raise ConfigurationError("block order refers to an undefined pattern")

    def block_order(self):
        return tuple(range(len(self.patterns))) if self.order is None else tuple(self.order)


def pattern_waveform(amplitude, frequency, length):
    t = np.arange(length, dtype=np.float64)
    return amplitude * np.sin(2.0 * np.pi * frequency * t / length)


def pattern_bank(spec):
    """Clean patterns of ``spec`` as a ``(n_patterns, length)`` array."""
    return np.stack([pattern_waveform(a, f, spec.pattern_length) for a, f in spec.patterns])


def generate(spec):
    """Build the series described by ``spec`` (deterministic in ``spec.seed``)."""
    spec.validate()
    bank = pattern_bank(spec)
    order = np.array(spec.block_order() * spec.repeats)
    values = bank[order].reshape(-1)
    labels = np.repeat(order, spec.pattern_length)
    series = TimeSeries(values, labels, provenance=f"{spec.name}:noise={spec.noise:g}:seed={spec.seed}")
    if spec.noise > 0:
        series = add_gaussian_noise(series, spec.noise, spec.seed)
    return series


def gen_sy4(noise_level=0.0, repeats=10, seed=0):
    return generate(GeneratorSpec(SY4_PATTERNS, 100, None, repeats, noise_level, seed, "sy4"))


def gen_sy10(repeats=10, seed=0, noise_level=0.0):
    return generate(GeneratorSpec(SY10_PATTERNS, 100, None, repeats, noise_level, seed, "sy10"))


def add_gaussian_noise(series, level, seed):
    """Add white noise with std ``level/100`` times the series' own std."""
    if not 0.0 <= level <= 100.0:
        raise DomainError("noise level must be in [0,100]")
    if level == 0:
        return TimeSeries(series.values.copy(), None if series.labels is None else series.labels.copy(),
                          series.sample_rate, series.provenance)
    rng = np.random.default_rng(seed)
    sigma = level / 100.0 * series.values.std()
    noisy = series.values + rng.normal(0.0, sigma, size=series.values.size)
    labels = None if series.labels is None else series.labels.copy()
    return TimeSeries(noisy, labels, series.sample_rate, series.provenance)


def gen_ar1(alpha, n, noise_std=1.0, seed=0):
    """``X_t = alpha X_{t-1} + eps_t`` with ``X_0 = 0`` and Gaussian ``eps``."""
    if n < 1:
        raise ConfigurationError(f"n must be >= 1, got {n}")
    rng = np.random.default_rng(seed)
    eps = rng.normal(0.0, noise_std, size=n) if noise_std > 0 else np.zeros(n)
    eps[0] = 0.0
    values = lfilter([1.0], [1.0, -alpha], eps)
    return TimeSeries(values, provenance=f"ar1:alpha={alpha:g}:seed={seed}")


def gen_random_walk_demo(region_length=200, seed=0):
    """Random walk with three embedded periodic regions, split into 7 regions.

    Regions 1, 3 and 5 hold a 10-period sine, an 8-period sine and a
    time-warped 10-period sine; the others are random walk. Labels are the
    region indices.
    """
    rng = np.random.default_rng(seed)
    n_regions = 7
    t = np.arange(region_length) / region_length
    periodic = {
        1: np.sin(2 * np.pi * 10 * t),
        3: np.sin(2 * np.pi * 8 * t),
        5: np.sin(2 * np.pi * 10 * t ** 1.5),
    }
    parts = []
    level = 0.0
    for r in range(n_regions):
        if r in periodic:
            seg = level + 3.0 * periodic[r]
        else:
            seg = level + np.cumsum(rng.normal(0.0, 0.3, region_length))
        parts.append(seg)
        level = seg[-1]
    values = np.concatenate(parts)
    labels = np.repeat(np.arange(n_regions), region_length)
    return TimeSeries(values, labels, provenance=f"randomwalk-demo:seed={seed}")


@dataclass
class Segmentation:
    """Non-overlapping windows of length ``m``."""

    windows: np.ndarray
    starts: np.ndarray
    labels: np.ndarray = None
    remainder: int = 0

    def __len__(self):
        return self.windows.shape[0]


def majority_labels(label_windows):
    """Strict-majority label per row; rows without one get ``NO_LABEL``."""
    out = np.full(label_windows.shape[0], NO_LABEL, dtype=np.int64)
    for i, row in enumerate(label_windows):
        vals, counts = np.unique(row, return_counts=True)
        best = counts.argmax()
        if 2 * counts[best] > row.size:
            out[i] = vals[best]
    return out


def segment(series, m):
    """Split into ``floor(n/m)`` windows; the trailing remainder is dropped."""
    if m < 1:
        raise ConfigurationError(f"window length must be >= 1, got {m}")
    n = len(series)
    if n < m:
        raise InputError(f"series of length {n} is shorter than the window length {m}")
    count = n // m
    used = count * m
    windows = series.values[:used].reshape(count, m).copy()
    labels = None
    if series.labels is not None:
        labels = majority_labels(series.labels[:used].reshape(count, m))
    return Segmentation(windows, np.arange(count) * m, labels, n - used)


def concatenate_windows(windows):
    return np.asarray(windows, dtype=np.float64).reshape(-1)


# ---------------------------------------------------------------------------
# CSV
# ---------------------------------------------------------------------------


def _parse_float(text, lineno, path):
    try:
        v = float(text)
    except ValueError:
        raise DataFormatError(f"{path}:{lineno}: non-numeric value {text!r}") from None
    if not math.isfinite(v):
        raise DataFormatError(f"{path}:{lineno}: non-finite value {text!r}")
    return v


def load_csv(path):
    """Read one value per row with an optional integer label column.

    A header row is recognised when its first field is not numeric.
    """
    values, labels = [], []
    n_cols = None
    with open(path, newline="", encoding="utf-8") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row or all(not c.strip() for c in row):
                continue
            row = [c.strip() for c in row]
            if lineno == 1 and not _looks_numeric(row[0]):
                continue
            if n_cols is None:
                n_cols = len(row)
                if n_cols not in (1, 2):
                    raise DataFormatError(f"{path}:{lineno}: expected 1 or 2 columns, got {n_cols}")
            elif len(row) != n_cols:
                raise DataFormatError(f"{path}:{lineno}: ragged row with {len(row)} columns, expected {n_cols}")
            values.append(_parse_float(row[0], lineno, path))
            if n_cols == 2:
                try:
                    labels.append(int(row[1]))
                except ValueError:
                    raise DataFormatError(f"{path}:{lineno}: non-integer label {row[1]!r}") from None
    if not values:
        raise DataFormatError(f"{path}: no data rows")
    return TimeSeries(np.array(values), np.array(labels) if labels else None, provenance=str(path))


def _looks_numeric(text):
    try:
        float(text)
    except ValueError:
        return False
    return True


def save_csv(series, path):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        if series.labels is None:
            w.writerow(["value"])
            for v in series.values:
                w.writerow([repr(float(v))])
        else:
            w.writerow(["value", "label"])
            for v, lab in zip(series.values, series.labels):
                w.writerow([repr(float(v)), int(lab)])


# ---------------------------------------------------------------------------
# key = value generator specs
# ---------------------------------------------------------------------------

PRESET_SPECS = {
    "sy4": dict(patterns=SY4_PATTERNS, pattern_length=100, name="sy4"),
    "sy10": dict(patterns=SY10_PATTERNS, pattern_length=100, name="sy10"),
}


def _parse_patterns(text):
    pats = []
    for item in text.replace(";", " ").split():
        amp, freq = item.split(":")
        pats.append((float(amp), float(freq)))
    return tuple(pats)


def read_kv_file(path):
    """Parse ``key = value`` lines (``#`` comments allowed) into a dict of strings."""
    parser = configparser.ConfigParser(interpolation=None, comment_prefixes=("#", ";"))
    parser.optionxform = str
    with open(path, encoding="utf-8") as fh:
        parser.read_string("[root]\n" + fh.read())
    return {k.replace("-", "_"): v for k, v in parser["root"].items()}


def spec_from_mapping(mapping):
    """Build a :class:`GeneratorSpec` from string key/values.

    Recognised keys: ``preset``, ``patterns`` (``amp:freq`` pairs separated by
    spaces), ``pattern_length``, ``order`` (comma-separated indices),
    ``repeats``, ``noise``, ``seed``.
    """
    kw = {}
    preset = mapping.get("preset")
    if preset:
        if preset not in PRESET_SPECS:
            raise ConfigurationError(f"unknown generator preset {preset!r}")
        kw.update(PRESET_SPECS[preset])
    if "patterns" in mapping:
        kw["patterns"] = _parse_patterns(mapping["patterns"])
    for key, conv in (("pattern_length", int), ("repeats", int), ("noise", float), ("seed", int)):
        if key in mapping and mapping[key] is not None:
            kw[key] = conv(mapping[key])
    if mapping.get("order"):
        kw["order"] = tuple(int(s) for s in str(mapping["order"]).split(","))
    if "name" in mapping:
        kw["name"] = mapping["name"]
    return GeneratorSpec(**kw)
