"""
Learning tilt policies from the log
===================================

Two learners: a softmax policy network trained on the IPS objective, and a
loss network trained by least squares whose greedy action is the DM policy.
Both are compared with the logging rule on the held-out test loss and on
the oracle risk.
"""

import numpy as np

from tiltbandit import (
    ArgmaxPolicy,
    EnvConfig,
    EnvOracle,
    LoggingPolicy,
    TrainConfig,
    downsample_balanced,
    fit_propensity,
    generate_dataset,
    greedy_from_loss,
    greedy_from_policy,
    split_dataset,
    test_loss,
    train_dm,
    train_ips,
)

cfg = EnvConfig()
train, test = split_dataset(generate_dataset(cfg, 30_000, seed=0), 0.7, seed=0)
lam_hat = fit_propensity(train)

tc = TrainConfig(epochs=30)
policy_net, ips_hist = train_ips(train, lam_hat, tc)
loss_net, dm_hist = train_dm(train, tc)
print(f"IPS objective: {ips_hist.objective[0]:+.4f} -> {ips_hist.objective[-1]:+.4f}")
print(f"DM training MSE: {dm_hist.objective[0]:.2e} -> {dm_hist.objective[-1]:.2e}")

###############################################################################
# The logging policy enters the comparison as its most likely action.

policies = {
    "lambda": ArgmaxPolicy(lam_hat.action_probs),
    "IPS": greedy_from_policy(policy_net),
    "DM": greedy_from_loss(loss_net),
}
balanced = downsample_balanced(test, seed=0)
oracle = EnvOracle(cfg, n_mc=100_000)
print(f"{'policy':>7} {'test loss':>10} {'balanced':>10} {'oracle risk':>12}")
for name, pi in policies.items():
    print(f"{name:>7} {test_loss(test, pi, lam_hat):10.4f} {test_loss(balanced, pi, lam_hat):10.4f} "
          f"{oracle.risk(pi).value:+12.5f}")
print(f"{'logging':>7} {'':>10} {'':>10} {oracle.risk(LoggingPolicy(cfg)).value:+12.5f}")

###############################################################################
# Where does the learned policy tilt? A coarse text heatmap of its argmax
# (rows: coverage alarm q, columns: capacity alarm c).

ticks = np.linspace(0, 1, 11)
grid = np.array([[q, c] for q in ticks for c in ticks])
symbols = np.array(list("v.^"))  # down, no change, up
best = policy_net.action_probs(grid).argmax(axis=1).reshape(11, 11)
print("q\\c " + " ".join(f"{c:.1f}"[-1] for c in ticks))
for q, row in zip(ticks, best):
    print(f"{q:.1f} " + " ".join(symbols[row]))
