"""Domain types, the logged-data container, CSV I/O, splitting and down-sampling."""
from __future__ import annotations

import csv
import enum
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator, NamedTuple, Optional, Union

import numpy as np

N_ACTIONS = 3
CSV_HEADER = ("coverage_alarm", "capacity_alarm", "action", "loss", "propensity")
SIM_TOL = 1e-9

PathLike = Union[str, Path]


class DatasetError(ValueError):
    """Raised for malformed or out-of-range logged data."""


class Action(enum.IntEnum):
    """Tilt update. The integer value is the signed tilt step (-1, 0, +1)."""

    DOWN_TILT = -1
    NO_CHANGE = 0
    UP_TILT = 1

    @property
    def index(self) -> int:
        """Column of this action in every (n, 3) probability / loss array."""
        return int(self) + 1

    @classmethod
    def from_index(cls, i: int) -> "Action":
        return cls(int(i) - 1)


ACTIONS = (Action.DOWN_TILT, Action.NO_CHANGE, Action.UP_TILT)


class Context(NamedTuple):
    """Risk-alarming KPIs of a sector; higher means worse."""

    coverage_alarm: float
    capacity_alarm: float

    def as_array(self) -> np.ndarray:
        return np.array([self.coverage_alarm, self.capacity_alarm], dtype=float)


class LoggedSample(NamedTuple):
    context: Context
    action: Action
    loss: float
    true_propensity: Optional[float] = None


def as_contexts(x) -> np.ndarray:
    """Coerce a Context, a pair or an (n, 2) array into a float (n, 2) array."""
    arr = np.asarray(x, dtype=float)
    if arr.ndim == 1:
        arr = arr.reshape(1, -1)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise ValueError(f"contexts must have shape (n, 2), got {arr.shape}")
    return arr


def check_action_distribution(p: np.ndarray, atol: float = SIM_TOL) -> np.ndarray:
    """Validate rows of ``p`` as distributions over the three actions."""
    p = np.asarray(p, dtype=float)
    if p.shape[-1] != N_ACTIONS:
        raise ValueError(f"expected {N_ACTIONS} action probabilities, got shape {p.shape}")
    if not np.all(np.isfinite(p)) or np.any(p < 0):
        raise ValueError("action probabilities must be finite and non-negative")
    if np.any(np.abs(p.sum(axis=-1) - 1.0) > atol):
        raise ValueError("action probabilities must sum to 1")
    return p


@dataclass(frozen=True)
class Dataset:
    """Column-oriented bandit-feedback log.

    ``action`` holds the signed encoding (-1/0/+1). Missing propensities are
    stored as NaN; ``propensity`` is None when no row carries one.
    """

    contexts: np.ndarray
    actions: np.ndarray
    losses: np.ndarray
    propensity: Optional[np.ndarray] = None
    provenance: str = ""
    validate: bool = field(default=True, repr=False, compare=False)

    def __post_init__(self):
        contexts = np.asarray(self.contexts, dtype=float).reshape(-1, 2)
        actions = np.asarray(self.actions, dtype=np.int64).reshape(-1)
        losses = np.asarray(self.losses, dtype=float).reshape(-1)
        prop = self.propensity
        if prop is not None:
            prop = np.asarray(prop, dtype=float).reshape(-1)
            if np.all(np.isnan(prop)):
                prop = None
        for name, arr in (("contexts", contexts), ("actions", actions), ("losses", losses), ("propensity", prop)):
            if arr is not None:
                arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        if self.validate:
            self.check()

    def check(self) -> None:
        n = len(self.actions)
        if self.contexts.shape != (n, 2) or self.losses.shape != (n,):
            raise DatasetError("column lengths disagree")
        if self.propensity is not None and self.propensity.shape != (n,):
            raise DatasetError("propensity column length disagrees")
        bad = ~np.isfinite(self.contexts).all(axis=1) | (self.contexts < 0).any(axis=1) | (self.contexts > 1).any(axis=1)
        if bad.any():
            raise DatasetError(f"context out of [0, 1] at row {int(np.argmax(bad))}")
        bad = ~np.isin(self.actions, (-1, 0, 1))
        if bad.any():
            raise DatasetError(f"invalid action at row {int(np.argmax(bad))}")
        bad = ~np.isfinite(self.losses) | (np.abs(self.losses) > 1)
        if bad.any():
            raise DatasetError(f"loss out of [-1, 1] at row {int(np.argmax(bad))}")
        if self.propensity is not None:
            p = self.propensity
            bad = ~np.isnan(p) & ~((p > 0) & (p <= 1))
            if bad.any():
                raise DatasetError(f"propensity out of (0, 1] at row {int(np.argmax(bad))}")

    def __len__(self) -> int:
        return len(self.actions)

    @property
    def action_index(self) -> np.ndarray:
        """Actions as column indices 0/1/2 (Down, NoChange, Up)."""
        return self.actions + 1

    @property
    def has_propensity(self) -> bool:
        return self.propensity is not None and not np.isnan(self.propensity).any()

    def sample(self, i: int) -> LoggedSample:
        p = None
        if self.propensity is not None and not np.isnan(self.propensity[i]):
            p = float(self.propensity[i])
        q, c = self.contexts[i]
        return LoggedSample(Context(float(q), float(c)), Action(int(self.actions[i])), float(self.losses[i]), p)

    def __iter__(self) -> Iterator[LoggedSample]:
        return (self.sample(i) for i in range(len(self)))

    def subset(self, idx) -> "Dataset":
        idx = np.asarray(idx, dtype=np.int64)
        prop = None if self.propensity is None else self.propensity[idx]
        return Dataset(self.contexts[idx], self.actions[idx], self.losses[idx], prop, self.provenance, validate=False)

    def action_counts(self) -> np.ndarray:
        return np.bincount(self.action_index, minlength=N_ACTIONS)

    @classmethod
    def from_samples(cls, samples, provenance: str = "") -> "Dataset":
        samples = list(samples)
        if not samples:
            return cls.empty(provenance)
        ctx = [tuple(s.context) for s in samples]
        prop = [np.nan if s.true_propensity is None else s.true_propensity for s in samples]
        return cls(ctx, [int(s.action) for s in samples], [s.loss for s in samples], prop, provenance)

    @classmethod
    def empty(cls, provenance: str = "") -> "Dataset":
        return cls(np.zeros((0, 2)), np.zeros(0, dtype=np.int64), np.zeros(0), None, provenance)


def _fmt(x: float) -> str:
    return f"{x:.9g}"


def save_dataset(d: Dataset, path: PathLike) -> None:
    """Write ``d`` as CSV with reals at 9 significant digits."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(",".join(CSV_HEADER) + "\n")
        prop = d.propensity
        for i in range(len(d)):
            q, c = d.contexts[i]
            p = "" if prop is None or np.isnan(prop[i]) else _fmt(prop[i])
            fh.write(f"{_fmt(q)},{_fmt(c)},{int(d.actions[i])},{_fmt(d.losses[i])},{p}\n")


def load_dataset(path: PathLike) -> Dataset:
    """Read a dataset written by :func:`save_dataset`.

    Errors name the offending line (1-based, header is line 1).
    """
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"dataset file not found: {path}")
    q, c, a, loss, prop = [], [], [], [], []
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or tuple(h.strip() for h in header) != CSV_HEADER:
            raise DatasetError(f"{path}:1: expected header {','.join(CSV_HEADER)}")
        for row in reader:
            line = reader.line_num
            if not row:
                continue
            if len(row) != 5:
                raise DatasetError(f"{path}:{line}: expected 5 fields, got {len(row)}")
            try:
                qi, ci, li = float(row[0]), float(row[1]), float(row[3])
                ai = int(row[2])
                pi = float(row[4]) if row[4].strip() else math.nan
            except ValueError as exc:
                raise DatasetError(f"{path}:{line}: {exc}") from None
            if not (0.0 <= qi <= 1.0 and 0.0 <= ci <= 1.0):
                raise DatasetError(f"{path}:{line}: context outside [0, 1]")
            if ai not in (-1, 0, 1):
                raise DatasetError(f"{path}:{line}: action must be -1, 0 or 1")
            if not -1.0 <= li <= 1.0:
                raise DatasetError(f"{path}:{line}: loss {li} outside [-1, 1]")
            if not math.isnan(pi) and not 0.0 < pi <= 1.0:
                raise DatasetError(f"{path}:{line}: propensity {pi} outside (0, 1]")
            q.append(qi)
            c.append(ci)
            a.append(ai)
            loss.append(li)
            prop.append(pi)
    if not a:
        return Dataset.empty(provenance=str(path))
    return Dataset(np.column_stack([q, c]), a, loss, prop, provenance=str(path))


def train_size(n: int, train_fraction: float) -> int:
    # round-half-up so that 309435 * 0.7 = 216604.5 -> 216605
    return int(math.floor(train_fraction * n + 0.5))


def split_dataset(d: Dataset, train_fraction: float, seed: int) -> tuple[Dataset, Dataset]:
    """Random train/test partition with ``round(train_fraction * N)`` training rows."""
    if not 0.0 < train_fraction < 1.0:
        raise ValueError("train_fraction must lie in (0, 1)")
    if len(d) == 0:
        raise DatasetError("cannot split an empty dataset")
    perm = np.random.default_rng(seed).permutation(len(d))
    n_train = train_size(len(d), train_fraction)
    return d.subset(np.sort(perm[:n_train])), d.subset(np.sort(perm[n_train:]))


def downsample_balanced(d: Dataset, seed: int) -> Dataset:
    """Subsample so each action appears as often as the rarest one.

    Rows of the rarest action are all kept; the others are drawn without
    replacement. Output keeps the original row order.
    """
    counts = d.action_counts()
    if np.any(counts == 0):
        raise DatasetError(f"every action must appear at least once, counts={counts.tolist()}")
    m = int(counts.min())
    rng = np.random.default_rng(seed)
    keep = []
    for k in range(N_ACTIONS):
        rows = np.flatnonzero(d.action_index == k)
        keep.append(rows if len(rows) == m else rng.choice(rows, size=m, replace=False))
    return d.subset(np.sort(np.concatenate(keep)))


@dataclass(frozen=True)
class RiskEstimate:
    """Mean of per-sample terms with its standard error."""

    value: float
    std_error: float
    n: int

    @classmethod
    def from_terms(cls, terms) -> "RiskEstimate":
        terms = np.asarray(terms, dtype=float)
        n = len(terms)
        if n == 0:
            raise ValueError("no terms to average")
        se = float(terms.std(ddof=1) / math.sqrt(n)) if n > 1 else 0.0
        return cls(float(terms.mean()), se, n)

    def __float__(self) -> float:
        return self.value


def apply_floor(p: np.ndarray, floor: float) -> np.ndarray:
    """Raise every probability to at least ``floor`` and renormalise.

    Returns the fixed point of repeated clamp-then-renormalise: entries that
    would fall below the floor sit exactly at it, the rest keep their ratios.
    """
    p = np.array(p, dtype=float, copy=True)
    squeeze = p.ndim == 1
    p = np.atleast_2d(p)
    if floor <= 0:
        return p[0] if squeeze else p
    if floor * p.shape[1] >= 1:
        raise ValueError("floor too large for the number of actions")
    pinned = np.zeros(p.shape, dtype=bool)
    for _ in range(p.shape[1]):
        pinned |= p < floor
        free_mass = 1.0 - floor * pinned.sum(axis=1, keepdims=True)
        free_sum = np.where(pinned, 0.0, p).sum(axis=1, keepdims=True)
        p = np.where(pinned, floor, p * free_mass / free_sum)
        if not (p < floor).any():
            break
    return p[0] if squeeze else p
