"""BinConcrete (relaxed Bernoulli) distribution.

A BinConcrete variable with location ``alpha > 0`` and temperature
``0 < lam <= 1`` is ``sigmoid((log alpha + log U - log(1 - U)) / lam)`` for
``U ~ Uniform(0, 1)``. Its density on ``(0, 1)`` is::

    lam * alpha * x**-(lam+1) * (1-x)**-(lam+1) / (alpha * x**-lam + (1-x)**-lam)**2

Differentiable quantities are computed from the logit ``l`` of the sample so
that values within rounding of 0 or 1 keep finite log-densities.
"""

from dataclasses import dataclass

import numpy as np
from scipy.special import expit

from . import tensor as T
from .errors import ContractError, DomainError

EPS = 1e-8
KL_MODES = ("posterior", "uniform")


@dataclass(frozen=True)
class BinConcreteParams:
    """Location and temperature of a BinConcrete density.

    ``location`` may be a float, an array or a :class:`~t2p.tensor.Tensor`
    (one location per latent dimension).
    """

    location: object
    temperature: float

    def __post_init__(self):
        if not 0.0 < float(self.temperature) <= 1.0:
            raise DomainError(f"temperature must lie in (0, 1], got {self.temperature}")
        loc = self.location.data if isinstance(self.location, T.Tensor) else np.asarray(self.location)
        if not np.all(loc > 0):
            raise DomainError("location must be strictly positive")

    def log_location(self):
        if isinstance(self.location, T.Tensor):
            return T.log(self.location)
        return T.Tensor(np.log(np.asarray(self.location, dtype=np.float64)))


@dataclass
class LatentSample:
    """One reparameterised draw of the latent vector.

    ``z`` sums to one over the last axis; ``relaxed`` is ``Y / (1 + Y)``
    before the softmax and ``logit`` its log-odds ``log Y``.
    """

    z: T.Tensor
    relaxed: T.Tensor
    logit: T.Tensor
    Y: np.ndarray
    u: np.ndarray


def _check_unit_interval(x, what):
    x = np.asarray(x, dtype=np.float64)
    if not np.all((x > 0.0) & (x < 1.0)):
        raise DomainError(f"{what} must lie strictly inside (0, 1)")
    return x


def logistic_noise(u, eps=EPS):
    """``log U - log(1 - U + eps)``."""
    u = _check_unit_interval(u, "uniform draws")
    return np.log(u) - np.log1p(eps - u)


def uniform_draws(rng, shape):
    """Uniform variates on the open interval (0, 1)."""
    u = rng.random(shape)
    return np.clip(u, np.finfo(np.float64).tiny, 1.0 - 1e-16)


def sample(alpha1, alpha2, lambda1, u, eps=EPS):
    """Reparameterised latent draw.

    ``alpha = alpha1 / alpha2`` sets the location, ``Y = (alpha U / (1 - U +
    eps)) ** (1/lambda1)`` and ``z = softmax(Y / (1 + Y) * alpha1)`` over the
    last axis. Gradients flow to ``alpha1`` and ``alpha2``.
    """
    if not 0.0 < lambda1 <= 1.0:
        raise DomainError(f"temperature must lie in (0, 1], got {lambda1}")
    a1, a2 = T.as_tensor(alpha1), T.as_tensor(alpha2)
    noise = logistic_noise(u, eps)
    logit = (T.log(a1) - T.log(a2) + noise) * (1.0 / lambda1)
    relaxed = T.sigmoid(logit)
    z = T.softmax(relaxed * a1, axis=-1)
    with np.errstate(over="ignore"):
        Y = np.exp(logit.data)
    return LatentSample(z=z, relaxed=relaxed, logit=logit, Y=Y, u=np.asarray(u, dtype=np.float64))


def pdf(x, params):
    """Density at ``x`` in (0, 1), evaluated from the closed form."""
    x = _check_unit_interval(x, "x")
    lam = float(params.temperature)
    alpha = np.asarray(params.location, dtype=np.float64)
    # closed form divided through by x**-lam; t = (x / (1-x))**lam
    t = (x / (1.0 - x)) ** lam
    return (lam * alpha * t) / ((x * (1.0 - x)) * (alpha + t) ** 2)


def cdf(x, params):
    """``P(X <= x) = sigmoid(lam * logit(x) - log alpha)``."""
    x = _check_unit_interval(x, "x")
    lam = float(params.temperature)
    alpha = np.asarray(params.location, dtype=np.float64)
    return expit(lam * (np.log(x) - np.log1p(-x)) - np.log(alpha))


def log_pdf(x, params):
    """Log-density at ``x`` in (0, 1), stable near the boundaries."""
    x = _check_unit_interval(x, "x")
    lam = float(params.temperature)
    log_alpha = np.log(np.asarray(params.location, dtype=np.float64))
    log_x = np.log(x)
    log_1mx = np.log1p(-x)
    return (np.log(lam) + log_alpha - (lam + 1.0) * (log_x + log_1mx)
            - 2.0 * np.logaddexp(log_alpha - lam * log_x, -lam * log_1mx))


def log_density(log_x, log_1mx, log_alpha, lam):
    """Differentiable log-density given ``log x`` and ``log(1 - x)``."""
    return (np.log(lam) + log_alpha - (lam + 1.0) * (log_x + log_1mx)
            - 2.0 * T.logaddexp(log_alpha - lam * log_x, -lam * log_1mx))


def log_density_from_logit(logit, log_alpha, lam):
    """Log-density at ``sigmoid(logit)``."""
    log_x = -T.softplus(-logit)
    log_1mx = -T.softplus(logit)
    return log_density(log_x, log_1mx, log_alpha, lam)


def _reduce_latent(values, loc_ndim):
    return values.sum(axis=-1) if loc_ndim >= 1 else values


def kl_samples(posterior, prior, samples, mode="posterior", rng=None, u=None, eps=EPS):
    """Per-draw Monte-Carlo terms of the KL estimator.

    Returns a Tensor of shape ``(samples,) + batch_shape`` where vector
    locations are summed over their last (latent) axis.

    ``mode="posterior"`` draws ``y ~ q`` by reparameterisation and returns
    ``log q(y) - log p(y)`` (a KL(q || p) estimate). ``mode="uniform"``
    draws ``y ~ Uniform(0, 1)`` and returns ``log p(y) - log q(y)``.
    """
    if samples < 1:
        raise ContractError(f"need at least one Monte-Carlo sample, got {samples}")
    if mode not in KL_MODES:
        raise ContractError(f"unknown KL mode {mode!r}; expected one of {KL_MODES}")
    log_alpha_q = posterior.log_location()
    log_alpha_p = prior.log_location()
    shape = (samples,) + log_alpha_q.shape
    if u is None:
        if rng is None:
            raise ContractError("kl_samples needs either rng or frozen draws u")
        u = uniform_draws(rng, shape)
    elif np.shape(u) != shape:
        raise ContractError(f"frozen draws must have shape {shape}, got {np.shape(u)}")

    lam_q = float(posterior.temperature)
    lam_p = float(prior.temperature)
    if mode == "posterior":
        logit = (log_alpha_q + logistic_noise(u, eps)) * (1.0 / lam_q)
        log_q = log_density_from_logit(logit, log_alpha_q, lam_q)
        log_p = log_density_from_logit(logit, log_alpha_p, lam_p)
        terms = log_q - log_p
    else:
        u = _check_unit_interval(u, "uniform draws")
        log_x = T.Tensor(np.log(u))
        log_1mx = T.Tensor(np.log1p(-u))
        log_q = log_density(log_x, log_1mx, log_alpha_q, lam_q)
        log_p = log_density(log_x, log_1mx, log_alpha_p, lam_p)
        terms = log_p - log_q
    return _reduce_latent(terms, log_alpha_q.ndim)


def mc_kl(posterior, prior, samples=10, mode="posterior", rng=None, u=None, eps=EPS):
    """Monte-Carlo KL estimate averaged over draws (and any batch axes)."""
    return kl_samples(posterior, prior, samples, mode=mode, rng=rng, u=u, eps=eps).mean()
