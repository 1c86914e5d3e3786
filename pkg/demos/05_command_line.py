"""
The experiment pipeline from the command line
=============================================

The ``tiltbandit`` command runs the same pipeline and writes CSV
artifacts. Here it is driven through :func:`tiltbandit.cli.main` in a
temporary directory with a short training budget; drop the ``--set``
overrides for the full protocol (100 epochs, 5 splits).
"""

import tempfile
from pathlib import Path

from tiltbandit.cli import main

work = Path(tempfile.mkdtemp())
data = work / "log.csv"

main(["generate", "--n", "20000", "--seed", "1", "--out", str(data)])
print((work / "log.csv.provenance").read_text().splitlines()[3])

main(["train", str(data), "--estimator", "ips", "--set", "train.epochs=10", "--out", str(work / "ips.csv")])
main(["heatmap", str(work / "ips.csv"), "--grid", "3", "--out", str(work / "heat.csv")])
print((work / "heat.csv").read_text())

###############################################################################
# K-split evaluation: every split refits the propensity model and both
# learners on its training part, then scores them on the test part.

main(["evaluate", str(data), "--splits", "2", "--downsample", "--set", "train.epochs=10",
      "--out", str(work / "table.csv")])

###############################################################################
# Errors are one machine-readable line on stderr and a nonzero exit code.

print("exit code:", main(["generate", "--n", "0"]))
