"""Small fully-connected tanh networks with hand-written backprop and Adam."""
from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional, Sequence

import numpy as np

from .core import N_ACTIONS, as_contexts
from .policies import StochasticPolicy

DEFAULT_HIDDEN = (32, 32)


class NonFiniteError(FloatingPointError):
    pass


def softmax(z: np.ndarray) -> np.ndarray:
    z = z - z.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


class MLP:
    """Feed-forward net ``sizes[0] -> ... -> sizes[-1]`` with tanh hidden layers.

    All weights live in one flat vector ``params``; ``weights``/``biases`` are
    views into it, so optimisers can update ``params`` in place.
    """

    activation = "tanh"

    def __init__(self, sizes: Sequence[int], seed: int = 0, params: Optional[np.ndarray] = None):
        self.sizes = tuple(int(s) for s in sizes)
        if len(self.sizes) < 2 or min(self.sizes) < 1:
            raise ValueError(f"invalid layer sizes {sizes}")
        self.seed = seed
        self.params = np.zeros(self.n_params)
        self._bind_views()
        if params is not None:
            self.set_params(params)
        else:
            rng = np.random.default_rng(seed)
            for W in self.weights:
                # uniform with variance 1 / fan_in
                lim = np.sqrt(3.0 / W.shape[0])
                W[...] = rng.uniform(-lim, lim, size=W.shape)
        self._cache = None

    @property
    def n_params(self) -> int:
        return sum((a + 1) * b for a, b in zip(self.sizes[:-1], self.sizes[1:]))

    def _bind_views(self):
        self.weights, self.biases = [], []
        off = 0
        for a, b in zip(self.sizes[:-1], self.sizes[1:]):
            self.weights.append(self.params[off:off + a * b].reshape(a, b))
            off += a * b
            self.biases.append(self.params[off:off + b])
            off += b

    def set_params(self, params) -> None:
        params = np.asarray(params, dtype=float)
        if params.shape != (self.n_params,):
            raise ValueError(f"expected {self.n_params} parameters, got {params.shape}")
        self.params[...] = params

    def forward(self, x: np.ndarray) -> np.ndarray:
        """Raw outputs for a batch; caches activations for :meth:`backward`."""
        if not np.all(np.isfinite(self.params)):
            raise NonFiniteError("network parameters contain non-finite values")
        h = np.asarray(x, dtype=float)
        acts = [h]
        last = len(self.weights) - 1
        for i, (W, b) in enumerate(zip(self.weights, self.biases)):
            h = h @ W + b
            if i < last:
                h = np.tanh(h)
            acts.append(h)
        self._cache = acts
        return h

    def backward(self, grad_out: np.ndarray) -> np.ndarray:
        """Parameter gradient given d(objective)/d(outputs) for the cached batch."""
        if self._cache is None:
            raise RuntimeError("backward called before forward")
        acts = self._cache
        g = np.asarray(grad_out, dtype=float)
        if g.shape != acts[-1].shape:
            raise ValueError(f"upstream gradient shape {g.shape} != output shape {acts[-1].shape}")
        grad = np.empty_like(self.params)
        gW, gb = [], []
        off = 0
        for a, b in zip(self.sizes[:-1], self.sizes[1:]):
            gW.append(grad[off:off + a * b].reshape(a, b))
            off += a * b
            gb.append(grad[off:off + b])
            off += b
        for i in range(len(self.weights) - 1, -1, -1):
            gW[i][...] = acts[i].T @ g
            gb[i][...] = g.sum(axis=0)
            if i > 0:
                g = (g @ self.weights[i].T) * (1.0 - acts[i] ** 2)
        return grad

    def copy(self) -> "MLP":
        return type(self)(self.sizes, self.seed, self.params.copy())


class PolicyNet(MLP, StochasticPolicy):
    """Softmax policy over the three tilt actions."""

    kind = "policy"

    def __init__(self, hidden: Sequence[int] = DEFAULT_HIDDEN, seed: int = 0, params=None):
        super().__init__((2, *hidden, N_ACTIONS), seed, params)

    def copy(self):
        return type(self)(self.sizes[1:-1], self.seed, self.params.copy())

    def logits(self, contexts) -> np.ndarray:
        return self.forward(as_contexts(contexts))

    def action_probs(self, contexts) -> np.ndarray:
        return softmax(self.logits(contexts))


class LossNet(MLP):
    """Per-action loss regressor: column ``a`` of the output estimates the mean loss of action ``a``."""

    kind = "loss"

    def __init__(self, hidden: Sequence[int] = DEFAULT_HIDDEN, seed: int = 0, params=None):
        super().__init__((2, *hidden, N_ACTIONS), seed, params)

    def copy(self):
        return type(self)(self.sizes[1:-1], self.seed, self.params.copy())

    def predict(self, contexts) -> np.ndarray:
        return self.forward(as_contexts(contexts))


def policy_forward(p: PolicyNet, x) -> np.ndarray:
    return p(x)


def loss_forward(l: LossNet, x) -> np.ndarray:
    return l.predict(x)[0]


def backward(net: MLP, grad_out: np.ndarray) -> np.ndarray:
    return net.backward(grad_out)


@dataclass
class AdamState:
    m: np.ndarray
    v: np.ndarray
    t: int = 0
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    @classmethod
    def zeros(cls, n: int, **kw) -> "AdamState":
        return cls(np.zeros(n), np.zeros(n), **kw)


def adam_step(params: np.ndarray, grads: np.ndarray, st: AdamState, lr: float) -> np.ndarray:
    """In-place bias-corrected Adam update of ``params``; returns ``params``."""
    if params.shape != grads.shape or st.m.shape != params.shape:
        raise ValueError("parameter, gradient and moment shapes must agree")
    if not np.all(np.isfinite(grads)):
        raise NonFiniteError("non-finite gradient")
    st.t += 1
    st.m *= st.beta1
    st.m += (1 - st.beta1) * grads
    st.v *= st.beta2
    st.v += (1 - st.beta2) * grads * grads
    m_hat = st.m / (1 - st.beta1 ** st.t)
    v_hat = st.v / (1 - st.beta2 ** st.t)
    params -= lr * m_hat / (np.sqrt(v_hat) + st.eps)
    return params


@dataclass
class GradCheckReport:
    max_rel_error: float
    failing: list = field(default_factory=list)
    analytic: Optional[np.ndarray] = None
    numeric: Optional[np.ndarray] = None

    @property
    def ok(self) -> bool:
        return not self.failing


def gradient_check(
    objective: Callable[[np.ndarray], float],
    gradient: Callable[[np.ndarray], np.ndarray],
    at: np.ndarray,
    h: float = 1e-5,
    tol: float = 1e-4,
    atol: float = 1e-7,
) -> GradCheckReport:
    """Compare ``gradient(at)`` with central differences of ``objective``.

    Relative error per coordinate is ``|g - n| / max(|g|, |n|, atol)``; the
    ``atol`` floor stops coordinates whose true gradient is ~0 from reporting
    pure round-off as failure.
    """
    if h <= 0:
        raise ValueError("h must be positive")
    at = np.array(at, dtype=float)
    g = np.asarray(gradient(at.copy()), dtype=float)
    num = np.empty_like(at)
    for i in range(at.size):
        e = np.zeros_like(at)
        e[i] = h
        num[i] = (objective(at + e) - objective(at - e)) / (2 * h)
    rel = np.abs(g - num) / np.maximum(np.maximum(np.abs(g), np.abs(num)), atol)
    failing = np.flatnonzero(rel > tol).tolist()
    return GradCheckReport(float(rel.max(initial=0.0)), failing, g, num)


def save_checkpoint(net: MLP, path) -> None:
    """Flat parameter vector, one value per line, under a ``#`` metadata header."""
    layers = "-".join(str(s) for s in net.sizes)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(f"# kind={net.kind},layers={layers},activation={net.activation},seed={net.seed}\n")
        fh.write("param\n")
        for v in net.params:
            fh.write(f"{float(v)!r}\n")


def read_header(path) -> dict:
    with open(path, encoding="utf-8") as fh:
        first = fh.readline().strip()
    if not first.startswith("#"):
        raise ValueError(f"{path}: missing metadata header")
    meta = {}
    for item in first[1:].strip().split(","):
        key, _, val = item.partition("=")
        meta[key.strip()] = val.strip()
    return meta


def load_checkpoint(path):
    """Load a :class:`PolicyNet` or :class:`LossNet` written by :func:`save_checkpoint`."""
    path = Path(path)
    meta = read_header(path)
    cls = {"policy": PolicyNet, "loss": LossNet}.get(meta.get("kind"))
    if cls is None:
        raise ValueError(f"{path}: not a network checkpoint (kind={meta.get('kind')!r})")
    if meta.get("activation") != "tanh":
        raise ValueError(f"{path}: unsupported activation {meta.get('activation')!r}")
    sizes = [int(s) for s in meta["layers"].split("-")]
    if sizes[0] != 2 or sizes[-1] != N_ACTIONS:
        raise ValueError(f"{path}: layer sizes {sizes} do not map contexts to actions")
    params = np.loadtxt(path, comments="#", skiprows=2, ndmin=1)
    return cls(sizes[1:-1], int(meta.get("seed", 0)), params)
