"""Multinomial logistic regression estimate of the logging policy."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import N_ACTIONS, Dataset, DatasetError, apply_floor, as_contexts
from .models import NonFiniteError, read_header, softmax
from .policies import StochasticPolicy

FEATURE_MAP = "quad-v1"
N_FEATURES = 6
DEFAULT_FLOOR = 0.01
DEFAULT_EPOCHS = 500
DEFAULT_LR = 0.5
GRAD_TOL = 1e-6

# fixed affine standardisation of each feature (mean, scale) for contexts in [0, 1]^2;
# improves conditioning of gradient descent, absorbed into the stored coefficients
_FEATURE_SHIFT = np.array([0.0, 0.5, 0.5, 0.25, 1 / 3, 1 / 3])
_FEATURE_SCALE = np.array([1.0, 0.29, 0.29, 0.2, 0.3, 0.3])


def features(contexts) -> np.ndarray:
    """Feature rows ``(1, q, c, q*c, q^2, c^2)``."""
    x = as_contexts(contexts)
    q, c = x[:, 0], x[:, 1]
    return np.column_stack([np.ones(len(x)), q, c, q * c, q * q, c * c])


@dataclass(frozen=True, eq=False)
class MultinomialLogitModel(StochasticPolicy):
    """Softmax over ``features(x) @ coef.T`` followed by a probability floor."""

    coef: np.ndarray
    floor: float = DEFAULT_FLOOR

    def __post_init__(self):
        coef = np.array(self.coef, dtype=float).reshape(N_ACTIONS, N_FEATURES)
        coef.setflags(write=False)
        object.__setattr__(self, "coef", coef)
        if not 0 < self.floor < 1 / N_ACTIONS:
            raise ValueError("floor must lie in (0, 1/3)")

    def raw_probs(self, contexts) -> np.ndarray:
        return softmax(features(contexts) @ self.coef.T)

    def action_probs(self, contexts) -> np.ndarray:
        return apply_floor(self.raw_probs(contexts), self.floor)

    def cross_entropy(self, d: Dataset) -> float:
        p = self.raw_probs(d.contexts)[np.arange(len(d)), d.action_index]
        return float(-np.mean(np.log(p)))

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(f"# kind=propensity,floor={self.floor!r},features={FEATURE_MAP}\n")
            fh.write("action,intercept,q,c,qc,q2,c2\n")
            for a, row in zip((-1, 0, 1), self.coef):
                fh.write(f"{a}," + ",".join(repr(float(v)) for v in row) + "\n")

    @classmethod
    def load(cls, path) -> "MultinomialLogitModel":
        meta = read_header(path)
        if meta.get("kind") != "propensity" or meta.get("features") != FEATURE_MAP:
            raise ValueError(f"{path}: not a {FEATURE_MAP} propensity model")
        rows = np.loadtxt(path, delimiter=",", skiprows=2, ndmin=2)
        if rows.shape != (N_ACTIONS, N_FEATURES + 1):
            raise ValueError(f"{path}: expected 3 rows of 7 values")
        return cls(rows[:, 1:], float(meta["floor"]))


def predict_propensity(m: MultinomialLogitModel, x) -> np.ndarray:
    return m(x)


def empirical_action_entropy(d: Dataset) -> float:
    """Cross-entropy of the context-free marginal action model on ``d``."""
    freq = d.action_counts() / len(d)
    return float(-np.sum(freq[freq > 0] * np.log(freq[freq > 0])))


def fit_propensity(
    d: Dataset,
    epochs: int = DEFAULT_EPOCHS,
    lr: float = DEFAULT_LR,
    seed: int = 0,
    floor: float = DEFAULT_FLOOR,
    history: list | None = None,
) -> MultinomialLogitModel:
    """Full-batch gradient descent on the mean categorical cross-entropy.

    Starts from zero coefficients and stops after ``epochs`` steps or once the
    largest gradient entry falls below 1e-6. ``seed`` is accepted for API
    symmetry; the path is fully determined by the data. When ``history`` is a
    list, the objective before each step is appended to it.
    """
    del seed
    if len(d) == 0 or np.count_nonzero(d.action_counts()) < 2:
        raise DatasetError("propensity fitting needs at least two distinct logged actions")
    z = (features(d.contexts) - _FEATURE_SHIFT) / _FEATURE_SCALE
    z[:, 0] = 1.0
    y = np.zeros((len(d), N_ACTIONS))
    y[np.arange(len(d)), d.action_index] = 1.0
    beta = np.zeros((N_ACTIONS, N_FEATURES))
    n = len(d)
    for _ in range(epochs):
        p = softmax(z @ beta.T)
        if history is not None:
            history.append(float(-np.mean(np.log(p[y > 0]))))
        grad = (p - y).T @ z / n
        if not np.all(np.isfinite(grad)):
            raise NonFiniteError("non-finite gradient while fitting propensities")
        if np.abs(grad).max() < GRAD_TOL:
            break
        beta -= lr * grad
    return MultinomialLogitModel(_unstandardise(beta), floor)


def _unstandardise(beta: np.ndarray) -> np.ndarray:
    # score = sum_j beta_j (f_j - m_j)/s_j for j >= 1, plus beta_0
    coef = beta / _FEATURE_SCALE
    coef[:, 0] = beta[:, 0] - (beta[:, 1:] * _FEATURE_SHIFT[1:] / _FEATURE_SCALE[1:]).sum(axis=1)
    return coef


def mean_tv_distance(p: np.ndarray, q: np.ndarray) -> float:
    """Average total-variation distance between matching rows."""
    return float(0.5 * np.abs(np.asarray(p) - np.asarray(q)).sum(axis=1).mean())
