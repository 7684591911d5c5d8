"""Central finite-difference gradient oracle."""

import numpy as np


def _central(f, flat, i, h):
    orig = flat[i]
    flat[i] = orig + h
    f_plus = f().data.item()
    flat[i] = orig - h
    f_minus = f().data.item()
    flat[i] = orig
    return (f_plus - f_minus) / (2.0 * h)


def _stable_central(f, flat, i, steps, rtol):
    # first step whose quotient agrees with the next smaller one; a kink between
    # the two stencils or roundoff at the small step breaks agreement
    prev = _central(f, flat, i, steps[0])
    best, best_gap = prev, np.inf
    for h in steps[1:]:
        cur = _central(f, flat, i, h)
        gap = abs(prev - cur) / max(abs(prev), abs(cur), 1e-300)
        if gap <= rtol:
            return prev
        if gap < best_gap:
            best, best_gap = prev, gap
        prev = cur
    return best


def numerical_gradient(f, param, h=1e-4, coords=None, steps=None, rtol=1e-4):
    """Central differences of scalar ``f()`` with respect to ``param.data``.

    ``coords`` restricts evaluation to the given flat indices; other entries
    are returned as NaN. With ``steps`` (decreasing step sizes) each entry
    uses the first step whose quotient agrees with the next smaller step to
    ``rtol``; this avoids both non-differentiable points (large steps) and
    cancellation on tiny gradients (small steps) without consulting the
    analytic gradient.
    """
    flat = param.data.reshape(-1)
    out = np.full(flat.shape, np.nan)
    idx = range(flat.size) if coords is None else coords
    for i in idx:
        if steps is None:
            out[i] = _central(f, flat, i, h)
        else:
            out[i] = _stable_central(f, flat, i, steps, rtol)
    return out.reshape(param.shape)


def finite_diff_check(f, params, h=1e-4, max_coords=None, rng=None, steps=None):
    """Max relative error between backprop and central-difference gradients.

    Parameters
    ----------
    f : callable
        Rebuilds the graph and returns a scalar Tensor. Must be deterministic,
        i.e. any random noise has to be frozen by the caller.
    params : sequence of Tensor
        Leaves with ``requires_grad=True``. Their ``grad`` is overwritten.
    h : float
        Step size.
    max_coords : int, optional
        Check at most this many randomly chosen entries per parameter.
    rng : numpy.random.Generator, optional
        Used to choose entries when ``max_coords`` is set.
    steps : sequence of float, optional
        Decreasing step ladder for :func:`numerical_gradient`; overrides ``h``.

    Returns
    -------
    float
        ``max_i |g_analytic - g_fd| / max(1e-8, |g_fd|)``.
    """
    params = list(params)
    for p in params:
        p.grad = None
    f().backward()
    rng = np.random.default_rng(0) if rng is None else rng

    worst = 0.0
    for p in params:
        analytic = np.zeros(p.shape) if p.grad is None else p.grad
        coords = None
        if max_coords is not None and p.size > max_coords:
            coords = np.sort(rng.choice(p.size, size=max_coords, replace=False))
        fd = numerical_gradient(f, p, h=h, coords=coords, steps=steps)
        sel = slice(None) if coords is None else coords
        a = analytic.reshape(-1)[sel]
        n = fd.reshape(-1)[sel]
        err = np.abs(a - n) / np.maximum(1e-8, np.abs(n))
        if err.size:
            worst = max(worst, float(err.max()))
    return worst
