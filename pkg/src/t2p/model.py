"""The T2P network: convolutional encoder, BinConcrete latent, pattern-bank decoder.

Encoder: three width-3 convolutions (12, 24, 32 feature maps, ReLU) with a
2/2 max-pool after the second, then a dense SoftPlus head producing two
positive k-vectors ``alpha1`` and ``alpha2``. The latent ``z`` is drawn with
:func:`t2p.binconcrete.sample` and the decoder reconstructs a window as
``z @ patterns``, so each of the k decoder kernels is one learned pattern.
"""

import logging
from dataclasses import asdict, dataclass, field, fields, replace

import numpy as np

from . import binconcrete as bc
from . import tensor as T
from .data import segment
from .errors import ConfigurationError, ContractError, DimensionError, DivergenceError, InputError
from .metrics import hoyer_sparsity
from .optim import Adam
from .summary import Summary

log = logging.getLogger(__name__)

ALPHA_FLOOR = 1e-6
CONV_CHANNELS = (12, 24, 32)
CONV_WIDTH = 3
MIN_PATTERN_LENGTH = 10


def encoded_length(m):
    """Length of the encoder feature map for windows of length ``m``."""
    mt = (m - 4) // 2 - 2
    if mt < 1:
        raise ConfigurationError(
            f"pattern length {m} is too short: the encoder needs m >= {MIN_PATTERN_LENGTH}"
        )
    return mt


@dataclass
class T2PConfig:
    n_patterns: int = 4
    pattern_length: int = 100
    prior_location: float = 0.8
    lambda1: float = 0.83
    lambda2: float = 0.21
    epochs: int = 1000
    learning_rate: float = 1e-3
    batch_size: int = 8
    seed: int = 0
    kl_mode: str = "posterior"
    mc_samples: int = 10

    def validate(self):
        if self.n_patterns < 1:
            raise ConfigurationError(f"n_patterns must be >= 1, got {self.n_patterns}")
        encoded_length(self.pattern_length)
        if self.prior_location <= 0:
            raise ConfigurationError(f"prior location must be > 0, got {self.prior_location}")
        for name in ("lambda1", "lambda2"):
            v = getattr(self, name)
            if not 0.0 < v <= 1.0:
                raise ConfigurationError(f"{name} must lie in (0, 1], got {v}")
        if self.epochs < 0:
            raise ConfigurationError(f"epochs must be >= 0, got {self.epochs}")
        if self.learning_rate <= 0:
            raise ConfigurationError(f"learning rate must be > 0, got {self.learning_rate}")
        if self.batch_size < 1:
            raise ConfigurationError(f"batch size must be >= 1, got {self.batch_size}")
        if self.kl_mode not in bc.KL_MODES:
            raise ConfigurationError(f"kl_mode must be one of {bc.KL_MODES}, got {self.kl_mode!r}")
        if self.mc_samples < 1:
            raise ConfigurationError(f"mc_samples must be >= 1, got {self.mc_samples}")
        return self

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, mapping):
        names = {f.name: f.type for f in fields(cls)}
        kw = {}
        for key, value in mapping.items():
            key = key.replace("-", "_")
            if key not in names or value is None:
                continue
            default = getattr(cls, key)
            kw[key] = type(default)(value) if not isinstance(default, str) else str(value)
        return cls(**kw)

    def with_(self, **changes):
        return replace(self, **changes)


#: Hyperparameter rows used in the published experiments. SY10 uses ten
#: patterns so that every embedded pattern can receive a kernel.
PRESETS = {
    "sy4": T2PConfig(4, 100, 0.8, 0.83, 0.21, 1000, 1e-3),
    "sy10": T2PConfig(10, 100, 0.8, 0.83, 0.21, 1000, 1e-3),
    "vital-sign": T2PConfig(2, 850, 0.8, 0.83, 0.23, 1000, 1e-3),
    "audio-mnist": T2PConfig(2, 8000, 0.8, 0.83, 0.23, 2000, 1e-4),
    "ecg": T2PConfig(2, 96, 0.8, 0.91, 0.25, 2000, 1e-3),
    "plane": T2PConfig(7, 144, 0.92, 0.90, 0.10, 4000, 1e-3),
}


def preset(name, **overrides):
    try:
        base = PRESETS[name]
    except KeyError:
        raise ConfigurationError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}") from None
    return replace(base, **overrides)


@dataclass
class LossTerms:
    total: T.Tensor
    mse: T.Tensor
    kl: T.Tensor


@dataclass
class Noise:
    """Frozen uniform draws for one loss evaluation, each ``(S, batch, k)``."""

    posterior: np.ndarray
    kl: np.ndarray = None

    @classmethod
    def draw(cls, rng, samples, batch, k, mode):
        shape = (samples, batch, k)
        post = bc.uniform_draws(rng, shape)
        extra = bc.uniform_draws(rng, shape) if mode == "uniform" else None
        return cls(post, extra)


class T2PModel:
    """Encoder/decoder parameters plus the forward computations."""

    PARAM_ORDER = ("conv1.weight", "conv1.bias", "conv2.weight", "conv2.bias",
                   "conv3.weight", "conv3.bias", "head.weight", "head.bias", "decoder.patterns")

    def __init__(self, config, params):
        self.config = config
        self.params = params

    @classmethod
    def initialize(cls, config, rng):
        """Uniform ``+-1/sqrt(fan_in)`` initialisation in a fixed order."""
        config.validate()
        k, m = config.n_patterns, config.pattern_length
        mt = encoded_length(m)
        c1, c2, c3 = CONV_CHANNELS
        shapes = {
            "conv1.weight": ((c1, 1, CONV_WIDTH), CONV_WIDTH),
            "conv1.bias": ((c1,), CONV_WIDTH),
            "conv2.weight": ((c2, c1, CONV_WIDTH), c1 * CONV_WIDTH),
            "conv2.bias": ((c2,), c1 * CONV_WIDTH),
            "conv3.weight": ((c3, c2, CONV_WIDTH), c2 * CONV_WIDTH),
            "conv3.bias": ((c3,), c2 * CONV_WIDTH),
            "head.weight": ((2 * k, c3 * mt), c3 * mt),
            "head.bias": ((2 * k,), c3 * mt),
            "decoder.patterns": ((k, m), k),
        }
        params = {}
        for name in cls.PARAM_ORDER:
            shape, fan_in = shapes[name]
            bound = 1.0 / np.sqrt(fan_in)
            params[name] = T.Tensor(rng.uniform(-bound, bound, size=shape), requires_grad=True, name=name)
        return cls(config, params)

    def parameters(self):
        return [self.params[name] for name in self.PARAM_ORDER]

    def copy(self):
        return T2PModel(self.config, {
            name: T.Tensor(p.data.copy(), requires_grad=True, name=name) for name, p in self.params.items()
        })

    @property
    def patterns(self):
        return self.params["decoder.patterns"].data

    # -- forward ------------------------------------------------------------

    def _as_batch(self, x):
        x = T.as_tensor(x)
        m = self.config.pattern_length
        single = x.ndim == 1
        if single:
            x = x.reshape(1, x.shape[0])
        if x.ndim != 2 or x.shape[1] != m:
            raise DimensionError(f"expected windows of length {m}, got shape {x.shape}")
        return x, single

    def encode(self, x):
        """Map windows ``(m,)`` or ``(batch, m)`` to ``(alpha1, alpha2)``."""
        p = self.params
        xb, single = self._as_batch(x)
        n = xb.shape[0]
        h = xb.reshape(n, 1, xb.shape[1])
        h = T.relu(T.conv1d(h, p["conv1.weight"], p["conv1.bias"]))
        h = T.relu(T.conv1d(h, p["conv2.weight"], p["conv2.bias"]))
        h = T.maxpool1d(h, 2, 2)
        h = T.relu(T.conv1d(h, p["conv3.weight"], p["conv3.bias"]))
        h = h.reshape(n, h.shape[1] * h.shape[2])
        out = T.softplus(h @ p["head.weight"].T + p["head.bias"])
        out = T.maximum(out, ALPHA_FLOOR)
        k = self.config.n_patterns
        a1, a2 = out[:, :k], out[:, k:]
        if single:
            a1, a2 = a1.reshape(k), a2.reshape(k)
        return a1, a2

    def decode(self, z):
        """Reconstruct ``sum_i z_i * pattern_i``."""
        z = T.as_tensor(z)
        if z.ndim == 0 or z.shape[-1] != self.config.n_patterns:
            raise DimensionError(f"latent must have last axis {self.config.n_patterns}, got shape {z.shape}")
        if z.ndim == 1:
            return (z.reshape(1, z.shape[0]) @ self.params["decoder.patterns"]).reshape(self.config.pattern_length)
        return z @ self.params["decoder.patterns"]

    def latent_mean(self, x, chunk=64):
        """Deterministic latent with every uniform draw fixed at 0.5.

        Long inputs are encoded ``chunk`` windows at a time so the working set
        (and therefore the cost per window) does not grow with the series.
        """
        xb, single = self._as_batch(x)
        with T.no_grad():
            parts = []
            for start in range(0, xb.shape[0], chunk):
                a1, a2 = self.encode(xb.data[start:start + chunk])
                parts.append(bc.sample(a1, a2, self.config.lambda1, np.full(a1.shape, 0.5)).z.data)
        z = np.concatenate(parts, axis=0)
        return z[0] if single else z

    def loss(self, x, noise):
        """Reconstruction MSE plus the Monte-Carlo KL term, averaged over the batch."""
        cfg = self.config
        xb, _ = self._as_batch(x)
        if xb.shape[0] == 0:
            raise ContractError("loss of an empty batch")
        a1, a2 = self.encode(xb)
        draw = bc.sample(a1, a2, cfg.lambda1, noise.posterior)
        xhat = self.decode(draw.z)
        diff = xhat - xb
        mse = (diff * diff).mean()

        prior = bc.BinConcreteParams(cfg.prior_location, cfg.lambda2)
        if cfg.kl_mode == "posterior":
            log_alpha = T.log(a1) - T.log(a2)
            log_q = bc.log_density_from_logit(draw.logit, log_alpha, cfg.lambda1)
            log_p = bc.log_density_from_logit(draw.logit, float(np.log(cfg.prior_location)), cfg.lambda2)
            kl = (log_q - log_p).sum(axis=-1).mean()
        else:
            posterior = bc.BinConcreteParams(a1 / a2, cfg.lambda1)
            kl = bc.kl_samples(posterior, prior, noise.kl.shape[0], mode="uniform", u=noise.kl).mean()
        return LossTerms(mse + kl, mse, kl)


def encode(model, x):
    return model.encode(x)


def decode(model, z):
    return model.decode(z)


def loss(model, batch, config=None, rng=None, noise=None):
    """Objective for ``batch``; draws fresh noise from ``rng`` unless ``noise`` is given."""
    if config is not None and config is not model.config:
        model = T2PModel(config, model.params)
    if noise is None:
        batch_arr = np.atleast_2d(T.as_tensor(batch).data)
        cfg = model.config
        noise = Noise.draw(rng, cfg.mc_samples, batch_arr.shape[0], cfg.n_patterns, cfg.kl_mode)
    return model.loss(batch, noise).total


# ---------------------------------------------------------------------------
# training
# ---------------------------------------------------------------------------


@dataclass
class TrainTrace:
    epoch: list = field(default_factory=list)
    loss: list = field(default_factory=list)
    mse: list = field(default_factory=list)
    kl: list = field(default_factory=list)
    sparsity: list = field(default_factory=list)

    def append(self, epoch, loss_, mse, kl, sparsity):
        self.epoch.append(epoch)
        self.loss.append(loss_)
        self.mse.append(mse)
        self.kl.append(kl)
        self.sparsity.append(sparsity)

    def __len__(self):
        return len(self.epoch)

    def rows(self):
        return list(zip(self.epoch, self.loss, self.mse, self.kl, self.sparsity))


def _seed_streams(seed):
    init_ss, train_ss = np.random.SeedSequence(seed).spawn(2)
    return np.random.default_rng(init_ss), np.random.default_rng(train_ss)


def as_windows(dataset, m):
    if hasattr(dataset, "values") and hasattr(dataset, "labels"):
        return segment(dataset, m).windows
    arr = np.asarray(dataset, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr.reshape(1, -1)
    if arr.ndim != 2 or arr.shape[1] != m:
        raise DimensionError(f"expected windows of length {m}, got shape {arr.shape}")
    return arr


def train(dataset, config, progress=None):
    """Fit a model with Adam on shuffled mini-batches.

    ``dataset`` is a ``(n_windows, m)`` array or a :class:`~t2p.data.TimeSeries`
    (segmented into non-overlapping windows). Returns ``(model, trace)``.
    Results depend only on ``config`` (including its seed) and the data.
    """
    config.validate()
    windows = as_windows(dataset, config.pattern_length)
    n = windows.shape[0]
    if n < 1:
        raise InputError("training needs at least one window")
    init_rng, rng = _seed_streams(config.seed)
    model = T2PModel.initialize(config, init_rng)
    opt = Adam(model.parameters(), lr=config.learning_rate)
    trace = TrainTrace()
    bs = config.batch_size

    for epoch in range(1, config.epochs + 1):
        order = rng.permutation(n)
        tot = mse_sum = kl_sum = 0.0
        for start in range(0, n, bs):
            idx = order[start:start + bs]
            noise = Noise.draw(rng, config.mc_samples, idx.size, config.n_patterns, config.kl_mode)
            terms = model.loss(windows[idx], noise)
            value = terms.total.item()
            if not np.isfinite(value):
                raise DivergenceError(epoch, config.learning_rate, value)
            opt.zero_grad()
            terms.total.backward()
            opt.step()
            tot += value * idx.size
            mse_sum += terms.mse.item() * idx.size
            kl_sum += terms.kl.item() * idx.size
        sparsity = hoyer_sparsity(model.latent_mean(windows)) if config.n_patterns >= 2 and n >= 2 else 0.0
        trace.append(epoch, tot / n, mse_sum / n, kl_sum / n, sparsity)
        if progress is not None:
            progress(epoch, trace)
    return model, trace


# ---------------------------------------------------------------------------
# interpretation
# ---------------------------------------------------------------------------


def extract_patterns(model):
    """The k decoder kernels in index order, shape ``(k, m)``."""
    return model.patterns.copy()


def assign_latent(z):
    """``(argmax, max)`` of latent rows; ties go to the lowest index."""
    z = np.asarray(z, dtype=np.float64)
    ids = z.argmax(axis=-1)
    return ids, np.take_along_axis(z, ids[..., None], axis=-1)[..., 0]


def assign(model, window):
    """Pattern id and similarity score for one window (or a batch)."""
    z = model.latent_mean(window)
    ids, scores = assign_latent(z)
    if np.ndim(ids) == 0:
        return int(ids), float(scores)
    return ids, scores


def summarize(model, series):
    """Assign every non-overlapping window of ``series`` to a learned pattern."""
    m = model.config.pattern_length
    seg = segment(series, m)
    z = model.latent_mean(seg.windows)
    ids, scores = assign_latent(z)
    pats = extract_patterns(model)
    window_mse = ((seg.windows - pats[ids]) ** 2).mean(axis=1)
    if seg.remainder:
        log.info("dropped %d trailing samples (< window length %d)", seg.remainder, m)
    return Summary(ids, scores, seg.starts, m, len(series), seg.remainder, window_mse, pats, z)


def reconstruction_mse(model, windows):
    """Per-window MSE of each window against its assigned pattern."""
    windows = as_windows(windows, model.config.pattern_length)
    ids, _ = assign_latent(model.latent_mean(windows))
    return ((windows - model.patterns[ids]) ** 2).mean(axis=1)
