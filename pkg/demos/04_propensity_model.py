"""
Recovering the logging policy
=============================

When the controller's propensities were not recorded, a multinomial logit
on quadratic features of (q, c) estimates them. It recovers a smooth
softmax logger closely; a hard threshold rule is only approximated.
"""

import numpy as np

from tiltbandit import EnvConfig, fit_propensity, generate_dataset
from tiltbandit.propensity import empirical_action_entropy, mean_tv_distance
from tiltbandit.synthenv import SOFTMAX_LINEAR, logging_probs, sample_contexts

for kind in ("rule", SOFTMAX_LINEAR):
    cfg = EnvConfig(logging_kind=kind)
    d = generate_dataset(cfg, 100_000, seed=0)
    model = fit_propensity(d)
    x = sample_contexts(cfg, 1000, np.random.default_rng(1))
    tv = mean_tv_distance(model.action_probs(x), logging_probs(cfg, x))
    print(f"{kind:>8}: cross-entropy {model.cross_entropy(d):.4f} "
          f"(marginal {empirical_action_entropy(d):.4f}), mean TV to truth {tv:.4f}")

###############################################################################
# The fitted probabilities never fall below the floor (0.01 by default),
# which keeps importance weights bounded by 100.

p = model.action_probs(np.random.default_rng(2).random((10_000, 2)))
print(f"smallest fitted propensity: {p.min():.4f}")
