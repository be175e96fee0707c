"""Finite-difference audit of the potential gradients, scenario by scenario.

Draws random scenarios, perturbs their initial states, and compares the
analytic gradient grid against central differences.  Accepts a seed:

    python3 demos/03_gradient_check.py [seed]
"""

import sys

import numpy as np

from swarmsim.potential import PotentialModel
from swarmsim.sampling import random_free_state, random_scenario
from swarmsim.selfcheck import gradient_errors

seed = int(sys.argv[1]) if len(sys.argv) > 1 else 2024
rng = np.random.default_rng(seed)

N_SCENARIOS = 5
STATES_EACH = 10

print(f"seed {seed}: {N_SCENARIOS} scenarios x {STATES_EACH} states\n")
print("scenario  agents  obstacles  worst rel error")
overall = 0.0
for k in range(N_SCENARIOS):
    sc = random_scenario(rng)
    model = PotentialModel(sc)
    worst = 0.0
    for _ in range(STATES_EACH):
        X = random_free_state(rng, model)
        worst = max(worst, gradient_errors(model, X))
    overall = max(overall, worst)
    print(f"{k:8d}  {sc.n_agents:6d}  {len(sc.obstacles):9d}  {worst:15.3e}")

print(f"\noverall worst: {overall:.3e} (bound 1e-5)")
print("OK" if overall < 1e-5 else "MISMATCH")
