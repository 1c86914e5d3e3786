"""
Simulating a tilt-controller log
================================

The synthetic environment stands in for a real network log. Each sample
holds a coverage alarm ``q`` and a capacity alarm ``c`` (both in [0, 1],
higher is worse), the tilt action chosen by a conservative rule-based
controller, the resulting loss and the controller's propensity.
"""

import numpy as np

from tiltbandit import Action, Context, EnvConfig, EnvOracle, LoggingPolicy, generate_dataset

cfg = EnvConfig()
d = generate_dataset(cfg, 20_000, seed=0)
print(f"{len(d)} samples, provenance: {d.provenance}")

# The logging rule mostly leaves the tilt alone.
down, nochange, up = d.action_counts()
print(f"down={down} no-change={nochange} up={up}")

###############################################################################
# The rule favours one action per region of context space and spreads a
# small floor probability over the others, so every action stays possible.

lam = LoggingPolicy(cfg)
for x in [Context(0.1, 0.1), Context(0.8, 0.2), Context(0.2, 0.8)]:
    print(x, np.round(lam(x), 3))

###############################################################################
# The oracle knows the true expected loss of every action. Under the default
# sign convention an up-tilt lowers the coverage alarm and raises the
# capacity alarm, so it helps when coverage is the worse KPI.

oracle = EnvOracle(cfg, n_mc=50_000)
x = Context(0.7, 0.2)
for a in Action:
    est = oracle.expected_loss(x, a)
    print(f"{a.name:>10}: {est.value:+.4f} +- {est.std_error:.1e}")

###############################################################################
# Policy risks of the logging rule and of the oracle's own greedy policy,
# both on common random numbers.

for name, pi in [("logging", lam), ("oracle greedy", oracle.greedy_policy())]:
    print(f"{name:>14}: {oracle.risk(pi).value:+.5f}")
