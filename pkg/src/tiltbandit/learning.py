"""Off-policy training of the policy network (IPS) and the loss network (DM)."""
from __future__ import annotations

import csv
import dataclasses
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .core import Dataset, DatasetError
from .estimators import LOGGED, NoMatchError, PropensitySource, logged_action_propensities, test_loss
from .models import DEFAULT_HIDDEN, AdamState, LossNet, NonFiniteError, PolicyNet, adam_step, softmax
from .policies import ArgmaxPolicy, DeterministicPolicy

ESTIMATED = "estimated"


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 100
    batch_size: Optional[int] = None  # None -> round(batch_fraction * N_train)
    batch_fraction: float = 0.01
    lr_policy: float = 0.0005
    lr_loss: float = 0.001
    seed: int = 0
    propensity_source: str = ESTIMATED
    hidden: tuple = DEFAULT_HIDDEN

    def __post_init__(self):
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if self.batch_size is not None and self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if not 0 < self.batch_fraction <= 1:
            raise ValueError("batch_fraction must lie in (0, 1]")
        if self.propensity_source not in (LOGGED, ESTIMATED):
            raise ValueError(f"propensity_source must be {LOGGED!r} or {ESTIMATED!r}")

    def replace(self, **kw) -> "TrainConfig":
        return dataclasses.replace(self, **kw)

    def batch_for(self, n_train: int) -> int:
        b = self.batch_size if self.batch_size is not None else max(1, int(np.floor(self.batch_fraction * n_train + 0.5)))
        if not 1 <= b <= n_train:
            raise ValueError(f"batch_size {b} outside [1, {n_train}]")
        return b


@dataclass
class TrainHistory:
    objective: list = field(default_factory=list)
    test_loss: list = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.objective)

    def to_csv(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["epoch", "objective", "test_loss"])
            for e, obj in enumerate(self.objective, start=1):
                tl = self.test_loss[e - 1] if self.test_loss else None
                w.writerow([e, repr(obj), "" if tl is None or np.isnan(tl) else repr(tl)])


def ips_objective(net: PolicyNet, x: np.ndarray, a_idx: np.ndarray, scaled_loss: np.ndarray) -> float:
    """mean_i pi(a_i|x_i) * loss_i / lambda_i; ``scaled_loss`` is loss_i / lambda_i."""
    p = net.action_probs(x)[np.arange(len(x)), a_idx]
    return float(np.mean(p * scaled_loss))


def ips_gradient(net: PolicyNet, x: np.ndarray, a_idx: np.ndarray, scaled_loss: np.ndarray) -> np.ndarray:
    probs = softmax(net.forward(x))
    rows = np.arange(len(x))
    pa = probs[rows, a_idx]
    # d pi_a / d z = pi_a (onehot_a - pi)
    g = -probs * (pa * scaled_loss)[:, None]
    g[rows, a_idx] += pa * scaled_loss
    return net.backward(g / len(x))


def mse_objective(net: LossNet, x: np.ndarray, a_idx: np.ndarray, loss: np.ndarray) -> float:
    pred = net.predict(x)[np.arange(len(x)), a_idx]
    return float(np.mean((loss - pred) ** 2))


def mse_gradient(net: LossNet, x: np.ndarray, a_idx: np.ndarray, loss: np.ndarray) -> np.ndarray:
    out = net.forward(x)
    rows = np.arange(len(x))
    g = np.zeros_like(out)
    g[rows, a_idx] = -2.0 * (loss - out[rows, a_idx]) / len(x)
    return net.backward(g)


def _run(net, objective, gradient, target, d_train: Dataset, cfg: TrainConfig, lr: float, evaluate):
    n = len(d_train)
    batch = cfg.batch_for(n)
    x, a = d_train.contexts, d_train.action_index
    rng = np.random.default_rng([cfg.seed, 1])
    state = AdamState.zeros(net.n_params)
    hist = TrainHistory()
    for _ in range(cfg.epochs):
        order = rng.permutation(n)
        for start in range(0, n, batch):
            idx = order[start:start + batch]
            adam_step(net.params, gradient(net, x[idx], a[idx], target[idx]), state, lr)
        obj = objective(net, x, a, target)
        if not np.isfinite(obj):
            raise NonFiniteError("training objective became non-finite")
        hist.objective.append(obj)
        if evaluate is not None:
            hist.test_loss.append(evaluate(net))
    return hist


def _epoch_evaluator(greedy, d_test: Optional[Dataset], lambda_test: Optional[PropensitySource]):
    if d_test is None:
        return None

    def evaluate(net):
        try:
            return test_loss(d_test, greedy(net), lambda_test if lambda_test is not None else LOGGED)
        except NoMatchError:
            return float("nan")

    return evaluate


def train_ips(
    d_train: Dataset,
    lambda_hat: PropensitySource,
    cfg: TrainConfig = TrainConfig(),
    d_test: Optional[Dataset] = None,
    lambda_test: Optional[PropensitySource] = None,
) -> tuple[PolicyNet, TrainHistory]:
    """Minimise the IPS risk estimate of a softmax policy network with mini-batch Adam.

    When ``d_test`` is supplied the greedy policy's test loss is recorded
    after every epoch, weighted by ``lambda_test`` (defaults to logged).
    """
    if len(d_train) == 0:
        raise DatasetError("empty training set")
    lam = logged_action_propensities(d_train, lambda_hat)
    scaled = d_train.losses / lam
    if not np.all(np.isfinite(scaled)):
        raise NonFiniteError("non-finite importance-weighted losses")
    net = PolicyNet(cfg.hidden, seed=cfg.seed)
    hist = _run(net, ips_objective, ips_gradient, scaled, d_train, cfg, cfg.lr_policy,
                _epoch_evaluator(greedy_from_policy, d_test, lambda_test))
    return net, hist


def train_dm(
    d_train: Dataset,
    cfg: TrainConfig = TrainConfig(),
    d_test: Optional[Dataset] = None,
    lambda_test: Optional[PropensitySource] = None,
) -> tuple[LossNet, TrainHistory]:
    """Fit the per-action loss network by least squares on the logged action's output."""
    if len(d_train) == 0:
        raise DatasetError("empty training set")
    net = LossNet(cfg.hidden, seed=cfg.seed)
    hist = _run(net, mse_objective, mse_gradient, d_train.losses, d_train, cfg, cfg.lr_loss,
                _epoch_evaluator(greedy_from_loss, d_test, lambda_test))
    return net, hist


class GreedyPolicy(ArgmaxPolicy):
    """Greedy deterministic policy over a frozen copy of a trained network."""

    def __init__(self, net, minimize: bool):
        self.net = net.copy()
        scores = self.net.predict if minimize else self.net.logits
        super().__init__(scores, minimize=minimize)


def greedy_from_policy(p: PolicyNet) -> DeterministicPolicy:
    """Most probable action; softmax is monotone so the argmax is taken on logits."""
    return GreedyPolicy(p, minimize=False)


def greedy_from_loss(l: LossNet) -> DeterministicPolicy:
    """Action of smallest predicted loss."""
    return GreedyPolicy(l, minimize=True)
