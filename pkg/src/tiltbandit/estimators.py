"""Off-policy risk estimators, the held-out test-loss metric and replicate diagnostics."""
from __future__ import annotations

import csv
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

import numpy as np

from .core import Action, Context, Dataset, DatasetError, RiskEstimate
from .models import LossNet
from .policies import DeterministicPolicy, StochasticPolicy

IPS = "ips"
DM = "dm"
LOGGED = "logged"

PropensitySource = Union[str, StochasticPolicy]


def logged_action_propensities(d: Dataset, lambda_hat: PropensitySource) -> np.ndarray:
    """lambda(a_i | x_i) for every row, from the log itself or a propensity model."""
    if isinstance(lambda_hat, str):
        if lambda_hat != LOGGED:
            raise ValueError(f"unknown propensity source {lambda_hat!r}")
        if not d.has_propensity:
            raise DatasetError("dataset lacks logged propensities")
        p = np.asarray(d.propensity, dtype=float)
    else:
        p = lambda_hat.action_probs(d.contexts)[np.arange(len(d)), d.action_index]
    if np.any(~(p > 0)):
        raise ValueError("propensities must be strictly positive; use a floored propensity model")
    return p


def ips_weight(pi: StochasticPolicy, lambda_hat: StochasticPolicy, x: Context, a: Action) -> float:
    """pi(a|x) / lambda(a|x)."""
    k = Action(a).index
    lam = float(lambda_hat(x)[k])
    if not lam > 0:
        raise ValueError(f"non-positive propensity {lam} at context {tuple(x)}")
    return float(pi(x)[k]) / lam


def ips_terms(d: Dataset, pi: StochasticPolicy, lambda_hat: PropensitySource) -> np.ndarray:
    lam = logged_action_propensities(d, lambda_hat)
    target = pi.action_probs(d.contexts)[np.arange(len(d)), d.action_index]
    return target / lam * d.losses


def ips_risk(d: Dataset, pi: StochasticPolicy, lambda_hat: PropensitySource = LOGGED) -> RiskEstimate:
    """Importance-weighted mean of the logged losses."""
    if len(d) == 0:
        raise DatasetError("IPS risk of an empty dataset")
    return RiskEstimate.from_terms(ips_terms(d, pi, lambda_hat))


def dm_risk(d: Dataset, pi: StochasticPolicy, l: LossNet) -> RiskEstimate:
    """Mean over logged contexts of the policy-weighted predicted loss."""
    if len(d) == 0:
        raise DatasetError("DM risk of an empty dataset")
    terms = (pi.action_probs(d.contexts) * l.predict(d.contexts)).sum(axis=1)
    return RiskEstimate.from_terms(terms)


def empirical_mse(l: LossNet, d: Dataset) -> float:
    """Mean squared error of the logged action's predicted loss."""
    if len(d) == 0:
        raise DatasetError("MSE of an empty dataset")
    pred = l.predict(d.contexts)[np.arange(len(d)), d.action_index]
    return float(np.mean((d.losses - pred) ** 2))


class NoMatchError(DatasetError):
    """The evaluated policy agrees with no logged action."""


def test_loss(d_test: Dataset, pi_det: DeterministicPolicy, lambda_hat: PropensitySource = LOGGED) -> float:
    """Propensity-weighted loss over rows where the policy repeats the logged action,
    normalised by the number of such rows. Lower is better."""
    match = pi_det.act(d_test.contexts) == d_test.action_index
    n_match = int(match.sum())
    if n_match == 0:
        raise NoMatchError("policy matches no logged action; test loss undefined")
    lam = logged_action_propensities(d_test.subset(np.flatnonzero(match)), lambda_hat)
    return float(np.sum(d_test.losses[match] / lam) / n_match)


test_loss.__test__ = False  # not a pytest test


@dataclass
class DiagnosticsRow:
    estimator: str
    n: int
    m: int
    bias: float
    variance: float
    oracle_risk: float
    oracle_se: float
    estimates: np.ndarray = field(repr=False, default=None)

    @property
    def bias_se(self) -> float:
        """Standard error of the empirical bias (replicate spread only)."""
        return float(np.sqrt(self.variance / self.m))


@dataclass
class DiagnosticsReport:
    rows: list

    def row(self, estimator: str, n: int) -> DiagnosticsRow:
        for r in self.rows:
            if r.estimator == estimator and r.n == n:
                return r
        raise KeyError((estimator, n))

    def variance_slope(self, estimator: str) -> float:
        """Least-squares slope of log(variance) against log(N)."""
        rows = [r for r in self.rows if r.estimator == estimator]
        x = np.log([r.n for r in rows])
        y = np.log([r.variance for r in rows])
        return float(np.polyfit(x, y, 1)[0])

    def to_csv(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["estimator", "N", "M", "bias", "variance", "oracle_risk", "oracle_se"])
            for r in self.rows:
                w.writerow([r.estimator, r.n, r.m, repr(r.bias), repr(r.variance), repr(r.oracle_risk), repr(r.oracle_se)])


def diagnostic_train_config():
    """Full-batch Adam fit used when refitting the loss model per replicate.

    Converged fits keep optimiser noise out of the replicate variance.
    """
    from .learning import TrainConfig

    return TrainConfig(epochs=200, batch_fraction=1.0, lr_loss=0.01)


def estimator_diagnostics(
    cfg,
    pi: StochasticPolicy,
    kind: str,
    n_values: Sequence[int],
    m_replicates: int,
    seed: int,
    *,
    oracle=None,
    train_cfg=None,
    fixed_loss_model: Optional[LossNet] = None,
    lambda_hat: PropensitySource = LOGGED,
    workers: int = 1,
) -> DiagnosticsReport:
    """Empirical bias and variance of an estimator over independent replicate logs.

    For DM the loss network is refit on each replicate with ``train_cfg``
    (same initialisation every time, so the estimator is a deterministic
    function of the replicate's data) unless ``fixed_loss_model`` is given,
    in which case only the context sampling contributes to the variance.
    Replicates run on ``workers`` threads; each has its own derived seed, so
    the report does not depend on the thread count.
    """
    from .learning import train_dm
    from .synthenv import EnvOracle, generate_dataset

    tc = train_cfg or diagnostic_train_config()
    if m_replicates < 30:
        raise ValueError("at least 30 replicates are required")
    if kind not in (IPS, DM):
        raise ValueError(f"unknown estimator {kind!r}")
    if not n_values or any(int(n) < 2 for n in n_values):
        raise ValueError("n_values must be a non-empty list of integers >= 2")
    oracle = oracle or EnvOracle(cfg)
    truth = oracle.risk(pi)
    if workers < 1:
        raise ValueError("workers must be >= 1")

    def replicate(j: int, n: int, r: int) -> float:
        rep_seed = int(np.random.SeedSequence([seed, j, r]).generate_state(1)[0])
        d = generate_dataset(cfg, n, rep_seed)
        if kind == IPS:
            return ips_risk(d, pi, lambda_hat).value
        model = fixed_loss_model
        if model is None:
            model, _ = train_dm(d, tc)
        return dm_risk(d, pi, model).value

    rows = []
    with ThreadPoolExecutor(max_workers=workers) as pool:
        for j, n in enumerate(n_values):
            est = np.array(list(pool.map(lambda r: replicate(j, int(n), r), range(m_replicates))))
            rows.append(DiagnosticsRow(kind, int(n), m_replicates, float(est.mean() - truth.value),
                                       float(est.var(ddof=1)), truth.value, truth.std_error, est))
    return DiagnosticsReport(rows)
