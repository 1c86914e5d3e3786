"""Policy interfaces.

A stochastic policy maps an (n, 2) context array to an (n, 3) array of action
probabilities with columns ordered (DownTilt, NoChange, UpTilt). A
deterministic policy additionally exposes ``act`` returning column indices.
"""
from __future__ import annotations

from typing import Callable

import numpy as np

from .core import N_ACTIONS, Action, Context, as_contexts


class StochasticPolicy:
    def action_probs(self, contexts) -> np.ndarray:
        raise NotImplementedError

    def __call__(self, x: Context) -> np.ndarray:
        """Distribution for a single context."""
        return self.action_probs(as_contexts(x))[0]


class DeterministicPolicy(StochasticPolicy):
    """Context -> single action; ``action_probs`` is the matching one-hot."""

    def act(self, contexts) -> np.ndarray:
        raise NotImplementedError

    def action(self, x: Context) -> Action:
        return Action.from_index(self.act(as_contexts(x))[0])

    def action_probs(self, contexts) -> np.ndarray:
        idx = self.act(contexts)
        out = np.zeros((len(idx), N_ACTIONS))
        out[np.arange(len(idx)), idx] = 1.0
        return out


def first_argmax(scores: np.ndarray) -> np.ndarray:
    # np.argmax returns the first maximiser, which is the DownTilt < NoChange < UpTilt tie rule
    return np.argmax(scores, axis=1)


class ArgmaxPolicy(DeterministicPolicy):
    """Greedy action of a score function ``f(contexts) -> (n, 3)``."""

    def __init__(self, scores: Callable[[np.ndarray], np.ndarray], minimize: bool = False):
        self.scores = scores
        self.minimize = minimize

    def act(self, contexts) -> np.ndarray:
        s = np.asarray(self.scores(as_contexts(contexts)), dtype=float)
        return first_argmax(-s if self.minimize else s)


class ConstantPolicy(DeterministicPolicy):
    def __init__(self, action: Action):
        self.fixed = Action(action)

    def act(self, contexts) -> np.ndarray:
        return np.full(len(as_contexts(contexts)), self.fixed.index, dtype=np.int64)


class FixedDistributionPolicy(StochasticPolicy):
    """Same distribution at every context (``UniformPolicy`` when omitted)."""

    def __init__(self, probs=(1 / 3, 1 / 3, 1 / 3)):
        p = np.asarray(probs, dtype=float)
        if p.shape != (N_ACTIONS,) or np.any(p < 0) or abs(p.sum() - 1) > 1e-9:
            raise ValueError("probs must be a distribution over three actions")
        self.probs = p

    def action_probs(self, contexts) -> np.ndarray:
        return np.tile(self.probs, (len(as_contexts(contexts)), 1))


UniformPolicy = FixedDistributionPolicy


class FunctionPolicy(StochasticPolicy):
    """Wrap a vectorised ``contexts -> probs`` callable."""

    def __init__(self, fn: Callable[[np.ndarray], np.ndarray]):
        self.fn = fn

    def action_probs(self, contexts) -> np.ndarray:
        return np.asarray(self.fn(as_contexts(contexts)), dtype=float)


def sample_actions(policy: StochasticPolicy, contexts: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Draw one action index per context from ``policy``."""
    if isinstance(policy, DeterministicPolicy):
        return policy.act(contexts)
    p = policy.action_probs(contexts)
    u = rng.random(len(p))
    idx = (u[:, None] > np.cumsum(p, axis=1)).sum(axis=1)
    return np.minimum(idx, N_ACTIONS - 1)
