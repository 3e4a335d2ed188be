"""Track a tiny pressure bump on top of the equilibrium and write its profile.

With amplitude 1e-5 the balanced q=3 scheme follows a fine q=5 reference,
while the unbalanced q=3 scheme is swamped by its own equilibrium error.
"""

import sys
from pathlib import Path

from wbeuler import RunConfig
from wbeuler.harness import Experiment, run_experiment

out = Path(sys.argv[1] if len(sys.argv) > 1 else "demo_output")
out.mkdir(exist_ok=True)

for mode in ("wb", "unb"):
    exp = Experiment("perturb-1d", RunConfig(order=3, mode=mode, output_dir=str(out)),
                     {"A": 1e-5}, (40,), name=f"perturb-{mode}")
    res = run_experiment(exp)
    dist = res.metrics["relative_l1_distance"][40]
    print(f"{mode:>3}: relative L1 distance from reference {100 * dist:.1f}%  -> {res.files}")
