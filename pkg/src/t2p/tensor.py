"""A small reverse-mode automatic differentiation engine.

:class:`Tensor` wraps a float64 numpy array and records the operation that
produced it. Calling :meth:`Tensor.backward` on a scalar walks the recorded
graph in reverse topological order and accumulates ``d loss / d leaf`` into
the ``grad`` attribute of every leaf created with ``requires_grad=True``.

Only the operators needed by the T2P network are provided.
"""

import threading
from contextlib import contextmanager

import numpy as np
from scipy.special import expit

from . import kernels
from .errors import ContractError, DimensionError

_state = threading.local()


def is_grad_enabled():
    return getattr(_state, "enabled", True)


@contextmanager
def no_grad():
    """Evaluate without recording a graph (inference, metrics)."""
    prev = is_grad_enabled()
    _state.enabled = False
    try:
        yield
    finally:
        _state.enabled = prev


def _unbroadcast(grad, shape):
    if grad.shape == shape:
        return grad
    extra = grad.ndim - len(shape)
    if extra > 0:
        grad = grad.sum(axis=tuple(range(extra)))
    axes = tuple(i for i, n in enumerate(shape) if n == 1 and grad.shape[i] != 1)
    if axes:
        grad = grad.sum(axis=axes, keepdims=True)
    return grad.reshape(shape)


def as_tensor(x):
    return x if isinstance(x, Tensor) else Tensor(x)


class Tensor:
    """Differentiable n-dimensional float64 array.

    Parameters
    ----------
    data : array_like
        Values; copied to a contiguous float64 array.
    requires_grad : bool
        Mark as a leaf whose gradient should be accumulated.
    name : str, optional
        Label used in error messages and checkpoints.
    """

    __array_priority__ = 1000

    def __init__(self, data, requires_grad=False, name=None):
        self.data = np.array(data, dtype=np.float64)
        self.grad = None
        self.requires_grad = bool(requires_grad)
        self.name = name
        self._parents = ()
        self._backward = None
        self.op = "leaf"

    # -- introspection ------------------------------------------------------

    @property
    def shape(self):
        return self.data.shape

    @property
    def ndim(self):
        return self.data.ndim

    @property
    def size(self):
        return self.data.size

    @property
    def is_leaf(self):
        return self._backward is None

    def item(self):
        return float(self.data.reshape(-1)[0]) if self.data.size == 1 else self.data.item()

    def numpy(self):
        return self.data

    def __len__(self):
        return len(self.data)

    def __repr__(self):
        label = f", name={self.name!r}" if self.name else ""
        return f"Tensor(shape={self.shape}, op={self.op}{label})"

    def detach(self):
        return Tensor(self.data)

    def zero_grad(self):
        self.grad = np.zeros_like(self.data)

    # -- graph --------------------------------------------------------------

    def backward(self):
        """Accumulate gradients of this scalar into every reachable leaf.

        Repeated calls add to existing ``grad`` values; reset them with
        :meth:`zero_grad` (or the optimizer's ``zero_grad``) between steps.
        """
        if self.data.size != 1:
            raise ContractError(f"backward() needs a scalar loss, got shape {self.shape}")
        if not self.requires_grad:
            raise ContractError("loss does not depend on any tensor with requires_grad=True")

        order = _toposort(self)
        pending = {id(self): np.ones_like(self.data)}
        for node in reversed(order):
            g = pending.pop(id(node), None)
            if g is None:
                continue
            if node._backward is None:
                node.grad = g.copy() if node.grad is None else node.grad + g
                continue
            for parent, pg in zip(node._parents, node._backward(g)):
                if pg is None or not parent.requires_grad:
                    continue
                key = id(parent)
                pending[key] = pg if key not in pending else pending[key] + pg

    # -- operators ----------------------------------------------------------

    def __add__(self, other):
        return add(self, other)

    __radd__ = __add__

    def __sub__(self, other):
        return sub(self, other)

    def __rsub__(self, other):
        return sub(other, self)

    def __mul__(self, other):
        return mul(self, other)

    __rmul__ = __mul__

    def __truediv__(self, other):
        return div(self, other)

    def __rtruediv__(self, other):
        return div(other, self)

    def __neg__(self):
        return mul(self, -1.0)

    def __pow__(self, exponent):
        return power(self, exponent)

    def __matmul__(self, other):
        return matmul(self, other)

    def __getitem__(self, index):
        return getitem(self, index)

    @property
    def T(self):
        return transpose(self)

    def sum(self, axis=None, keepdims=False):
        return tsum(self, axis=axis, keepdims=keepdims)

    def mean(self, axis=None, keepdims=False):
        return mean(self, axis=axis, keepdims=keepdims)

    def reshape(self, *shape):
        if len(shape) == 1 and isinstance(shape[0], (tuple, list)):
            shape = tuple(shape[0])
        return reshape(self, shape)


def _toposort(root):
    order = []
    seen = set()
    stack = [(root, False)]
    while stack:
        node, expanded = stack.pop()
        if expanded:
            order.append(node)
            continue
        if id(node) in seen:
            continue
        seen.add(id(node))
        stack.append((node, True))
        for parent in reversed(node._parents):
            if parent.requires_grad and id(parent) not in seen:
                stack.append((parent, False))
    return order


def _result(data, parents, backward, op):
    out = Tensor.__new__(Tensor)
    out.data = data
    out.grad = None
    out.name = None
    out.op = op
    if is_grad_enabled() and any(p.requires_grad for p in parents):
        out.requires_grad = True
        out._parents = tuple(parents)
        out._backward = backward
    else:
        out.requires_grad = False
        out._parents = ()
        out._backward = None
    return out


# ---------------------------------------------------------------------------
# element-wise arithmetic (numpy broadcasting)
# ---------------------------------------------------------------------------


def add(a, b):
    a, b = as_tensor(a), as_tensor(b)

    def backward(g):
        return _unbroadcast(g, a.shape), _unbroadcast(g, b.shape)

    return _result(a.data + b.data, (a, b), backward, "add")


def sub(a, b):
    a, b = as_tensor(a), as_tensor(b)

    def backward(g):
        return _unbroadcast(g, a.shape), _unbroadcast(-g, b.shape)

    return _result(a.data - b.data, (a, b), backward, "sub")


def mul(a, b):
    a, b = as_tensor(a), as_tensor(b)

    def backward(g):
        return _unbroadcast(g * b.data, a.shape), _unbroadcast(g * a.data, b.shape)

    return _result(a.data * b.data, (a, b), backward, "mul")


def div(a, b):
    a, b = as_tensor(a), as_tensor(b)
    out = a.data / b.data

    def backward(g):
        gb = -g * out / b.data
        return _unbroadcast(g / b.data, a.shape), _unbroadcast(gb, b.shape)

    return _result(out, (a, b), backward, "div")


def power(a, exponent):
    if isinstance(exponent, Tensor):
        raise ContractError("power() supports constant exponents only")
    a = as_tensor(a)
    p = float(exponent)

    def backward(g):
        return (g * p * a.data ** (p - 1.0),)

    return _result(a.data ** p, (a,), backward, "pow")


def exp(a):
    a = as_tensor(a)
    out = np.exp(a.data)
    return _result(out, (a,), lambda g: (g * out,), "exp")


def log(a):
    a = as_tensor(a)
    return _result(np.log(a.data), (a,), lambda g: (g / a.data,), "log")


def relu(a):
    a = as_tensor(a)
    mask = a.data > 0
    return _result(np.where(mask, a.data, 0.0), (a,), lambda g: (g * mask,), "relu")


def softplus(a):
    """``ln(1 + e^x)`` without overflow."""
    a = as_tensor(a)
    return _result(np.logaddexp(0.0, a.data), (a,), lambda g: (g * expit(a.data),), "softplus")


def sigmoid(a):
    a = as_tensor(a)
    out = expit(a.data)
    return _result(out, (a,), lambda g: (g * out * (1.0 - out),), "sigmoid")


def activation(a, kind):
    if kind == "relu":
        return relu(a)
    if kind == "softplus":
        return softplus(a)
    raise ContractError(f"unknown activation {kind!r}; expected 'relu' or 'softplus'")


def logaddexp(a, b):
    a, b = as_tensor(a), as_tensor(b)
    out = np.logaddexp(a.data, b.data)

    def backward(g):
        return (_unbroadcast(g * np.exp(a.data - out), a.shape),
                _unbroadcast(g * np.exp(b.data - out), b.shape))

    return _result(out, (a, b), backward, "logaddexp")


def maximum(a, floor):
    """Clamp from below at a constant; gradient is zero where clamped."""
    a = as_tensor(a)
    mask = a.data > floor
    return _result(np.where(mask, a.data, floor), (a,), lambda g: (g * mask,), "maximum")


def softmax(a, axis=-1):
    a = as_tensor(a)
    shifted = a.data - a.data.max(axis=axis, keepdims=True)
    e = np.exp(shifted)
    out = e / e.sum(axis=axis, keepdims=True)

    def backward(g):
        return (out * (g - (g * out).sum(axis=axis, keepdims=True)),)

    return _result(out, (a,), backward, "softmax")


# ---------------------------------------------------------------------------
# reductions and shape
# ---------------------------------------------------------------------------


def tsum(a, axis=None, keepdims=False):
    a = as_tensor(a)
    out = a.data.sum(axis=axis, keepdims=keepdims)

    def backward(g):
        if axis is not None and not keepdims:
            g = np.expand_dims(g, axis)
        return (np.broadcast_to(g, a.shape).copy(),)

    return _result(np.asarray(out, dtype=np.float64), (a,), backward, "sum")


def mean(a, axis=None, keepdims=False):
    a = as_tensor(a)
    if axis is None:
        count = a.size
    else:
        axes = (axis,) if isinstance(axis, int) else axis
        count = int(np.prod([a.shape[ax] for ax in axes]))
    return tsum(a, axis=axis, keepdims=keepdims) * (1.0 / count)


def reshape(a, shape):
    a = as_tensor(a)
    return _result(a.data.reshape(shape), (a,), lambda g: (g.reshape(a.shape),), "reshape")


def transpose(a):
    a = as_tensor(a)
    if a.ndim != 2:
        raise DimensionError(f"transpose expects a 2-D tensor, got {a.ndim}-D")
    return _result(a.data.T.copy(), (a,), lambda g: (g.T.copy(),), "transpose")


def getitem(a, index):
    a = as_tensor(a)

    def backward(g):
        full = np.zeros_like(a.data)
        np.add.at(full, index, g)
        return (full,)

    return _result(np.array(a.data[index]), (a,), backward, "getitem")


def matmul(a, b):
    """``a @ b`` for ``a`` of shape ``(..., n)`` and a 2-D ``b`` of shape ``(n, p)``."""
    a, b = as_tensor(a), as_tensor(b)
    if b.ndim != 2 or a.ndim < 1 or a.shape[-1] != b.shape[0]:
        raise DimensionError(
            f"matmul: a.shape[-1]={a.shape[-1] if a.ndim else None} must equal b.shape[0]"
            f" for a {a.shape} and b {b.shape}"
        )

    def backward(g):
        ga = g @ b.data.T
        gb = a.data.reshape(-1, a.shape[-1]).T @ g.reshape(-1, b.shape[1])
        return ga, gb

    return _result(a.data @ b.data, (a, b), backward, "matmul")


def mse(a, b):
    d = sub(a, b)
    return mean(d * d)


# ---------------------------------------------------------------------------
# convolution and pooling
# ---------------------------------------------------------------------------


def _as_batched(x, op):
    if x.ndim == 2:
        return reshape(x, (1,) + x.shape), True
    if x.ndim == 3:
        return x, False
    raise DimensionError(f"{op}: input must be (channels, length) or (batch, channels, length), got {x.shape}")


def conv1d(x, kernels_, bias=None, stride=1, padding=0):
    """Cross-correlate ``x`` with a bank of 1-D kernels.

    ``x`` is ``(channels_in, length)`` or ``(batch, channels_in, length)``;
    ``kernels_`` is ``(channels_out, channels_in, width)``; ``bias`` is
    ``(channels_out,)``. The output length is
    ``floor((length + 2*padding - width) / stride) + 1``.
    """
    x, w = as_tensor(x), as_tensor(kernels_)
    if stride < 1 or padding < 0:
        raise ContractError(f"conv1d: stride must be >= 1 and padding >= 0, got {stride}, {padding}")
    if w.ndim != 3:
        raise DimensionError(f"conv1d: kernels must be (channels_out, channels_in, width), got {w.shape}")
    xb, squeeze = _as_batched(x, "conv1d")
    if xb.shape[1] != w.shape[1]:
        raise DimensionError(
            f"conv1d: input channels axis ({xb.shape[1]}) does not match kernel channels_in axis ({w.shape[1]})"
        )
    length = xb.shape[2] + 2 * padding
    width = w.shape[2]
    if width > length:
        raise DimensionError(f"conv1d: kernel width axis ({width}) exceeds padded length axis ({length})")

    xdata = xb.data
    if padding:
        xdata = np.pad(xdata, ((0, 0), (0, 0), (padding, padding)))
    xdata = np.ascontiguousarray(xdata)
    wdata = np.ascontiguousarray(w.data)
    out = kernels.conv1d_forward(xdata, wdata, stride)

    def backward(g):
        g = np.ascontiguousarray(g)
        gx = gw = None
        if xb.requires_grad:
            gx = kernels.conv1d_backward_input(g, wdata, stride, length)
            if padding:
                gx = gx[:, :, padding:length - padding]
        if w.requires_grad:
            gw = kernels.conv1d_backward_weight(g, xdata, stride, width)
        return gx, gw

    y = _result(out, (xb, w), backward, "conv1d")
    if bias is not None:
        bias = as_tensor(bias)
        if bias.shape != (w.shape[0],):
            raise DimensionError(f"conv1d: bias must have shape ({w.shape[0]},), got {bias.shape}")
        y = add(y, reshape(bias, (1, w.shape[0], 1)))
    if squeeze:
        y = reshape(y, y.shape[1:])
    return y


def maxpool1d(x, window, stride):
    """Max over sliding windows along the last axis; ties go to the first index."""
    x = as_tensor(x)
    if window < 1 or stride < 1:
        raise ContractError(f"maxpool1d: window and stride must be >= 1, got {window}, {stride}")
    xb, squeeze = _as_batched(x, "maxpool1d")
    length = xb.shape[2]
    if window > length:
        raise DimensionError(f"maxpool1d: window ({window}) exceeds length axis ({length})")
    out, idx = kernels.maxpool1d_forward(np.ascontiguousarray(xb.data), window, stride)

    def backward(g):
        return (kernels.maxpool1d_backward(np.ascontiguousarray(g), idx, length),)

    y = _result(out, (xb,), backward, "maxpool1d")
    if squeeze:
        y = reshape(y, y.shape[1:])
    return y
