"""One-hidden-layer ReLU network with a sigmoid output, trained by full-batch Adam."""

from __future__ import annotations

import numpy as np
from scipy.special import expit

from ..datagen import LabeledDataset
from ..errors import NonFiniteLoss
from .base import LearnerKind, NeuralNetParams, ScoringModel, check_training_set


def n_parameters(d: int, hidden: int) -> int:
    return d * hidden + hidden + hidden + 1


def unpack(theta: np.ndarray, d: int, hidden: int):
    i = d * hidden
    w1 = theta[:i].reshape(d, hidden)
    b1 = theta[i : i + hidden]
    w2 = theta[i + hidden : i + 2 * hidden]
    b2 = theta[i + 2 * hidden]
    return w1, b1, w2, b2


def loss_and_grad(theta: np.ndarray, x: np.ndarray, y: np.ndarray, hidden: int):
    """Mean cross-entropy and its gradient with respect to the flat parameter vector."""
    n, d = x.shape
    w1, b1, w2, b2 = unpack(theta, d, hidden)
    pre = x @ w1 + b1
    act = np.maximum(pre, 0.0)
    logit = act @ w2 + b2
    loss = float(np.mean(np.logaddexp(0.0, logit) - y * logit))

    dlogit = (expit(logit) - y) / n
    dpre = np.outer(dlogit, w2) * (pre > 0)
    grad = np.concatenate(
        [
            (x.T @ dpre).ravel(),
            dpre.sum(axis=0),
            act.T @ dlogit,
            [dlogit.sum()],
        ]
    )
    return loss, grad


class NeuralNetModel(ScoringModel):
    kind = LearnerKind.NeuralNet

    def __init__(self, theta: np.ndarray, n_features: int, hidden: int, final_loss: float):
        super().__init__(n_features)
        self.theta = theta
        self.hidden = hidden
        self.final_loss = final_loss

    def _raw_score(self, x):
        w1, b1, w2, b2 = unpack(self.theta, self.n_features, self.hidden)
        return expit(np.maximum(x @ w1 + b1, 0.0) @ w2 + b2)


def fit_neural_net(train: LabeledDataset, hp: NeuralNetParams = NeuralNetParams()) -> NeuralNetModel:
    x, y = check_training_set(train)
    d = x.shape[1]
    rng = np.random.default_rng(hp.seed)
    theta = rng.uniform(-hp.init_scale, hp.init_scale, size=n_parameters(d, hp.hidden))
    m = np.zeros_like(theta)
    v = np.zeros_like(theta)
    loss = np.nan
    for t in range(1, hp.epochs + 1):
        loss, grad = loss_and_grad(theta, x, y, hp.hidden)
        if not np.isfinite(loss):
            raise NonFiniteLoss(f"cross-entropy became {loss} at epoch {t}")
        m = hp.beta1 * m + (1 - hp.beta1) * grad
        v = hp.beta2 * v + (1 - hp.beta2) * grad * grad
        m_hat = m / (1 - hp.beta1**t)
        v_hat = v / (1 - hp.beta2**t)
        theta = theta - hp.learning_rate * m_hat / (np.sqrt(v_hat) + hp.eps)
    return NeuralNetModel(theta, d, hp.hidden, float(loss))
