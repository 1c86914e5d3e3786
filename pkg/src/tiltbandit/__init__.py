"""Offline contextual-bandit learning of antenna tilt policies.

Learns down/no-change/up tilt decisions from logs of a deployed rule-based
controller, using inverse propensity scoring (IPS) or a direct loss model
(DM), and checks both against a synthetic environment with known ground truth.
"""
from .core import (
    ACTIONS,
    Action,
    Context,
    Dataset,
    DatasetError,
    LoggedSample,
    RiskEstimate,
    downsample_balanced,
    load_dataset,
    save_dataset,
    split_dataset,
    train_size,
)
from .estimators import (
    DM,
    IPS,
    LOGGED,
    DiagnosticsReport,
    NoMatchError,
    dm_risk,
    empirical_mse,
    estimator_diagnostics,
    ips_risk,
    ips_weight,
    test_loss,
)
from .learning import TrainConfig, TrainHistory, greedy_from_loss, greedy_from_policy, train_dm, train_ips
from .models import LossNet, PolicyNet, gradient_check, load_checkpoint, save_checkpoint
from .policies import ArgmaxPolicy, ConstantPolicy, FixedDistributionPolicy, UniformPolicy
from .propensity import MultinomialLogitModel, fit_propensity, predict_propensity
from .synthenv import EnvConfig, EnvOracle, LoggingPolicy, generate_dataset

__version__ = "0.1.0"
