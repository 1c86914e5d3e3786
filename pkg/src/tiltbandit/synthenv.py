"""Synthetic sectorised-network log generator with a ground-truth oracle.

Contexts are two independent Beta-distributed alarm KPIs. A tilt step moves
the coverage alarm and the capacity alarm by ``effect_magnitude`` in opposite
directions, Gaussian exogenous noise is added to both, and the result is
clipped to [0, 1]. The loss is the change of the worse alarm,
``max(c', q') - max(c, q)``.
"""
from __future__ import annotations

import hashlib
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.special import ndtr

from .core import (
    N_ACTIONS,
    Action,
    Context,
    Dataset,
    RiskEstimate,
    apply_floor,
    as_contexts,
)
from .policies import ArgmaxPolicy, StochasticPolicy, sample_actions

RULE_BASED = "rule"
SOFTMAX_LINEAR = "softmax"

# rows: DownTilt, NoChange, UpTilt; columns: intercept, coverage, capacity
DEFAULT_SOFTMAX_COEFS = (
    -1.0, 2.5, 0.0,
    1.0, -0.5, -0.5,
    -1.0, 0.0, 2.5,
)


@dataclass(frozen=True)
class EnvConfig:
    context_shape_a: float = 2.0
    context_shape_b: float = 5.0
    effect_magnitude: float = 0.1
    noise_std: float = 0.05
    logging_kind: str = RULE_BASED
    logging_smoothing: float = 0.05
    rule_threshold_high: float = 0.55
    softmax_coefs: tuple = DEFAULT_SOFTMAX_COEFS
    # +1: up-tilt lowers the coverage alarm and raises the capacity alarm; -1 reverses it
    tilt_sign: int = 1
    tilt_step_epsilon: float = 1.0
    num_sectors: int = 1

    def __post_init__(self):
        object.__setattr__(self, "softmax_coefs", tuple(float(v) for v in self.softmax_coefs))
        if self.context_shape_a <= 0 or self.context_shape_b <= 0:
            raise ValueError("Beta shape parameters must be positive")
        if not 0 < self.effect_magnitude < 1:
            raise ValueError("effect_magnitude must lie in (0, 1)")
        if self.noise_std < 0:
            raise ValueError("noise_std must be non-negative")
        if self.logging_kind not in (RULE_BASED, SOFTMAX_LINEAR):
            raise ValueError(f"logging_kind must be {RULE_BASED!r} or {SOFTMAX_LINEAR!r}")
        if not 0 < self.logging_smoothing < 1 / 3:
            raise ValueError("logging_smoothing must lie in (0, 1/3)")
        if not 0 < self.rule_threshold_high < 1:
            raise ValueError("rule_threshold_high must lie in (0, 1)")
        if len(self.softmax_coefs) != 9:
            raise ValueError("softmax_coefs needs 9 values (3 actions x [1, q, c])")
        if self.tilt_sign not in (1, -1):
            raise ValueError("tilt_sign must be +1 or -1")
        if self.num_sectors < 1:
            raise ValueError("num_sectors must be positive")

    def digest(self) -> str:
        """Short stable hash of every field, used in dataset provenance."""
        text = ";".join(f"{k}={v!r}" for k, v in sorted(asdict(self).items()))
        return hashlib.sha256(text.encode()).hexdigest()[:16]


def sample_contexts(cfg: EnvConfig, n: int, rng: np.random.Generator) -> np.ndarray:
    """``n`` independent contexts as an (n, 2) array of (coverage, capacity)."""
    return rng.beta(cfg.context_shape_a, cfg.context_shape_b, size=(n, 2))


def sample_context(cfg: EnvConfig, rng: np.random.Generator) -> Context:
    q, c = sample_contexts(cfg, 1, rng)[0]
    return Context(float(q), float(c))


def logging_probs(cfg: EnvConfig, contexts) -> np.ndarray:
    """Logging-policy action probabilities, shape (n, 3)."""
    x = as_contexts(contexts)
    q, c = x[:, 0], x[:, 1]
    s = cfg.logging_smoothing
    if cfg.logging_kind == RULE_BASED:
        thr = cfg.rule_threshold_high
        favored = np.where(q > thr, Action.DOWN_TILT.index,
                           np.where(c > thr, Action.UP_TILT.index, Action.NO_CHANGE.index))
        p = np.full((len(x), N_ACTIONS), s)
        p[np.arange(len(x)), favored] = 1.0 - 2.0 * s
        return p
    coefs = np.asarray(cfg.softmax_coefs).reshape(N_ACTIONS, 3)
    feats = np.column_stack([np.ones(len(x)), q, c])
    scores = feats @ coefs.T
    scores -= scores.max(axis=1, keepdims=True)
    p = np.exp(scores)
    p /= p.sum(axis=1, keepdims=True)
    return apply_floor(p, s)


def logging_propensities(cfg: EnvConfig, x: Context) -> np.ndarray:
    """Distribution over (DownTilt, NoChange, UpTilt) at one context."""
    return logging_probs(cfg, x)[0]


class LoggingPolicy(StochasticPolicy):
    def __init__(self, cfg: EnvConfig):
        self.cfg = cfg

    def action_probs(self, contexts) -> np.ndarray:
        return logging_probs(self.cfg, contexts)


def transition(cfg: EnvConfig, contexts: np.ndarray, action_idx, noise: np.ndarray):
    """Apply actions given pre-drawn standard-normal ``noise`` of shape (n, 2).

    Returns ``(next_contexts, losses)``. Sharing ``noise`` across calls gives
    common random numbers for comparing actions at the same contexts.
    """
    x = as_contexts(contexts)
    step = cfg.tilt_sign * cfg.effect_magnitude * (np.asarray(action_idx) - 1)
    eta = cfg.noise_std * noise
    q_next = np.clip(x[:, 0] - step + eta[:, 0], 0.0, 1.0)
    c_next = np.clip(x[:, 1] + step + eta[:, 1], 0.0, 1.0)
    loss = np.maximum(q_next, c_next) - np.maximum(x[:, 0], x[:, 1])
    return np.column_stack([q_next, c_next]), loss


def simulate_transitions(cfg: EnvConfig, contexts, action_idx, rng: np.random.Generator):
    x = as_contexts(contexts)
    return transition(cfg, x, action_idx, rng.standard_normal((len(x), 2)))


def simulate_transition(cfg: EnvConfig, x: Context, a: Action, rng: np.random.Generator):
    nxt, loss = simulate_transitions(cfg, x, [Action(a).index], rng)
    return Context(float(nxt[0, 0]), float(nxt[0, 1])), float(loss[0])


def generate_dataset(cfg: EnvConfig, n: int, seed: int) -> Dataset:
    """Draw ``n`` logged samples under the configured logging policy."""
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = np.random.default_rng(seed)
    x = sample_contexts(cfg, n, rng)
    p = logging_probs(cfg, x)
    a = sample_actions(LoggingPolicy(cfg), x, rng)
    _, loss = simulate_transitions(cfg, x, a, rng)
    prop = p[np.arange(n), a]
    return Dataset(x, a - 1, loss, prop, provenance=f"config={cfg.digest()};seed={seed}")


_QUAD_CHUNK = 8192


def expected_losses_quadrature(cfg: EnvConfig, contexts, n_nodes: int = 400) -> np.ndarray:
    """Mean loss of every action at every context, shape (n, 3), by 1-D quadrature.

    Uses E[max(X, Y)] = integral over t in [0, 1] of 1 - P(X <= t) P(Y <= t)
    for the clipped Gaussians X, Y. Deterministic, so safe for building
    greedy policies on arbitrary context batches.
    """
    x = as_contexts(contexts)
    steps = cfg.tilt_sign * cfg.effect_magnitude * np.array([-1.0, 0.0, 1.0])
    mq = x[:, [0]] - steps  # (n, 3)
    mc = x[:, [1]] + steps
    base = np.maximum(x[:, 0], x[:, 1])[:, None]
    if cfg.noise_std == 0:
        return np.maximum(np.clip(mq, 0, 1), np.clip(mc, 0, 1)) - base
    t, w = np.polynomial.legendre.leggauss(n_nodes)
    t = 0.5 * (t + 1.0)
    w = 0.5 * w
    out = np.empty((len(x), N_ACTIONS))
    sd = cfg.noise_std
    # chunked to bound the (rows, n_nodes) temporaries
    for lo in range(0, len(x), _QUAD_CHUNK):
        rows = slice(lo, lo + _QUAD_CHUNK)
        for k in range(N_ACTIONS):
            fq = ndtr((t[None, :] - mq[rows, [k]]) / sd)
            fc = ndtr((t[None, :] - mc[rows, [k]]) / sd)
            out[rows, k] = (1.0 - fq * fc) @ w
    return out - base


@dataclass
class EnvOracle:
    """Monte-Carlo ground truth for mean losses and policy risks."""

    cfg: EnvConfig = field(default_factory=EnvConfig)
    n_mc: int = 200_000
    seed: int = 12345

    def __post_init__(self):
        if self.n_mc < 1:
            raise ValueError("n_mc must be >= 1")

    def expected_loss(self, x: Context, a: Action) -> RiskEstimate:
        rng = np.random.default_rng([self.seed, 0])
        ctx = np.tile(as_contexts(x), (self.n_mc, 1))
        _, loss = simulate_transitions(self.cfg, ctx, np.full(self.n_mc, Action(a).index), rng)
        return RiskEstimate.from_terms(loss)

    def _per_context_losses(self, n: int, stream: int):
        rng = np.random.default_rng([self.seed, 1, stream])
        x = sample_contexts(self.cfg, n, rng)
        noise = rng.standard_normal((n, 2))
        losses = np.column_stack([transition(self.cfg, x, np.full(n, k), noise)[1] for k in range(N_ACTIONS)])
        return x, losses

    def risk(self, pi: StochasticPolicy, stream: int = 0) -> RiskEstimate:
        """R(pi): per draw, the policy-weighted loss of all three actions under shared noise."""
        x, losses = self._per_context_losses(self.n_mc, stream)
        return RiskEstimate.from_terms((pi.action_probs(x) * losses).sum(axis=1))

    def risk_gap(self, pi: StochasticPolicy, other: StochasticPolicy, stream: int = 0) -> RiskEstimate:
        """R(pi) - R(other) with common random numbers."""
        x, losses = self._per_context_losses(self.n_mc, stream)
        diff = pi.action_probs(x) - other.action_probs(x)
        return RiskEstimate.from_terms((diff * losses).sum(axis=1))

    def greedy_policy(self) -> ArgmaxPolicy:
        """Deterministic policy picking the action of least true mean loss."""
        return ArgmaxPolicy(lambda x: expected_losses_quadrature(self.cfg, x), minimize=True)


def oracle_expected_loss(o: EnvOracle, x: Context, a: Action) -> RiskEstimate:
    return o.expected_loss(x, a)


def oracle_risk(o: EnvOracle, pi: StochasticPolicy) -> RiskEstimate:
    return o.risk(pi)
