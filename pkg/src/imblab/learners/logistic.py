"""Logistic regression fitted by iteratively reweighted least squares."""

from __future__ import annotations

import numpy as np
from scipy.special import expit

from ..datagen import LabeledDataset
from ..errors import NonFiniteLoss
from .base import LearnerKind, LogisticParams, ScoringModel, check_training_set


def _design(x: np.ndarray) -> np.ndarray:
    return np.hstack([np.ones((x.shape[0], 1)), x])


def negative_log_likelihood(beta: np.ndarray, design: np.ndarray, y: np.ndarray) -> float:
    eta = design @ beta
    # log(1 + e^eta) - y * eta, stable for large |eta|
    return float(np.sum(np.logaddexp(0.0, eta) - y * eta))


class LogisticModel(ScoringModel):
    kind = LearnerKind.LogisticRegression

    def __init__(self, coef: np.ndarray, loss_history: list[float], converged: bool):
        super().__init__(coef.size - 1)
        self.coef = coef
        self.loss_history = tuple(loss_history)
        self.converged = converged

    @property
    def intercept(self) -> float:
        return float(self.coef[0])

    def decision_function(self, x: np.ndarray) -> np.ndarray:
        return self.coef[0] + x @ self.coef[1:]

    def _raw_score(self, x):
        return expit(self.decision_function(x))


def fit_logistic(train: LabeledDataset, hp: LogisticParams = LogisticParams()) -> LogisticModel:
    """Newton/IRLS with step halving.

    A ``hp.ridge`` jitter on the diagonal keeps the normal equations solvable
    for separable or collinear data. Iteration stops once the largest
    coefficient change is at most ``hp.tol`` or after ``hp.max_iter`` steps.
    """
    x, y = check_training_set(train)
    design = _design(x)
    beta = np.zeros(design.shape[1])
    loss = negative_log_likelihood(beta, design, y)
    history = [loss]
    jitter = hp.ridge * np.eye(design.shape[1])
    converged = False
    for _ in range(hp.max_iter):
        p = expit(design @ beta)
        w = p * (1.0 - p)
        hess = design.T @ (design * w[:, None]) + jitter
        step = np.linalg.solve(hess, design.T @ (y - p))
        if not np.all(np.isfinite(step)):
            raise NonFiniteLoss("IRLS produced a non-finite Newton step")
        t = 1.0
        while True:
            candidate = beta + t * step
            new_loss = negative_log_likelihood(candidate, design, y)
            if new_loss <= loss or t < 1e-10:
                break
            t *= 0.5
        if not np.isfinite(new_loss):
            raise NonFiniteLoss(f"negative log-likelihood became {new_loss}")
        if new_loss > loss:
            # no descent possible along the Newton direction: at the optimum up to rounding
            converged = True
            break
        change = np.max(np.abs(candidate - beta))
        beta, loss = candidate, new_loss
        history.append(loss)
        if change <= hp.tol:
            converged = True
            break
    return LogisticModel(beta, history, converged)
