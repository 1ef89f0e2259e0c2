"""Adam with an exponential per-epoch learning-rate schedule."""

import logging
from dataclasses import dataclass

import numpy as np

from .config import TrainConfig
from .exceptions import DivergenceError
from .model import Gradients, Model

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class OptimizerState:
    first_moment: tuple[np.ndarray, ...]
    second_moment: tuple[np.ndarray, ...]
    step: int = 0

    @classmethod
    def for_model(cls, model: Model) -> "OptimizerState":
        zeros = tuple(np.zeros_like(p) for p in model.parameters())
        return cls(first_moment=zeros, second_moment=tuple(np.zeros_like(p) for p in zeros), step=0)


def learning_rate(cfg: TrainConfig, epoch: int) -> float:
    """lr * gamma^epoch."""
    return cfg.lr * cfg.lr_gamma ** epoch


def adam_step(
    model: Model,
    state: OptimizerState,
    grads: Gradients,
    cfg: TrainConfig,
    epoch: int = 0,
) -> tuple[Model, OptimizerState]:
    """One bias-corrected Adam update at the learning rate of ``epoch``.

    Raises:
        DivergenceError: a gradient entry is NaN or infinite
    """
    if not grads.is_finite():
        raise DivergenceError(f"Non-finite gradient at step {state.step + 1}", step=state.step + 1)

    t = state.step + 1
    lr = learning_rate(cfg, epoch)
    b1, b2 = cfg.adam_beta1, cfg.adam_beta2
    correction1 = 1.0 - b1 ** t
    correction2 = 1.0 - b2 ** t

    params, firsts, seconds = [], [], []
    for p, g, m, v in zip(model.parameters(), grads.parameters(), state.first_moment, state.second_moment):
        m = b1 * m + (1.0 - b1) * g
        v = b2 * v + (1.0 - b2) * g * g
        m_hat = m / correction1
        v_hat = v / correction2
        params.append(p - lr * m_hat / (np.sqrt(v_hat) + cfg.adam_epsilon))
        firsts.append(m)
        seconds.append(v)

    return Model.from_parameters(params), OptimizerState(tuple(firsts), tuple(seconds), t)
