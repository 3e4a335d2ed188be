"""Third-order convergence on a smooth two-dimensional manufactured flow."""

from wbeuler import RunConfig
from wbeuler.harness import Experiment, run_experiment

res = run_experiment(Experiment("accuracy-2d", RunConfig(order=3), grids=(10, 20, 40)))
print(res.table.format())
