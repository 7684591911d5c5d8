"""Adam optimizer over :class:`~t2p.tensor.Tensor` parameters."""

from dataclasses import dataclass, field

import numpy as np

from .errors import ContractError


@dataclass
class AdamState:
    """Per-parameter Adam moments."""

    first_moment: np.ndarray
    second_moment: np.ndarray
    step: int = 0
    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    @classmethod
    def zeros_like(cls, values, **hyper):
        return cls(np.zeros_like(values), np.zeros_like(values), **hyper)


def adam_step(params, states):
    """Apply one bias-corrected Adam update in place.

    ``params`` and ``states`` are parallel sequences. Every parameter must
    carry a populated ``grad``.
    """
    for p, s in zip(params, states):
        if p.grad is None:
            raise ContractError(f"parameter {p.name or p.shape} has no gradient; call backward() first")
        g = p.grad
        s.step += 1
        s.first_moment = s.beta1 * s.first_moment + (1.0 - s.beta1) * g
        s.second_moment = s.beta2 * s.second_moment + (1.0 - s.beta2) * g * g
        m_hat = s.first_moment / (1.0 - s.beta1 ** s.step)
        v_hat = s.second_moment / (1.0 - s.beta2 ** s.step)
        p.data -= s.lr * m_hat / (np.sqrt(v_hat) + s.eps)


@dataclass
class Adam:
    params: list
    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    states: list = field(init=False)

    def __post_init__(self):
        self.params = list(self.params)
        self.states = [
            AdamState.zeros_like(p.data, lr=self.lr, beta1=self.beta1, beta2=self.beta2, eps=self.eps)
            for p in self.params
        ]

    def zero_grad(self):
        for p in self.params:
            p.zero_grad()

    def step(self):
        adam_step(self.params, self.states)
