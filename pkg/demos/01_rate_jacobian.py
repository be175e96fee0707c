"""Pose rate matrix walkthrough: determinant, inverse, singular band.

Run from the repository root:  python3 demos/01_rate_jacobian.py
"""

import numpy as np

from swarmsim.errors import SingularPoseError
from swarmsim.kinematics import (EPS_SINGULAR, body_rates_to_state_rates,
                                 jacobian)

rng = np.random.default_rng(7)

# The determinant of the full 6x6 rate matrix is exactly cos(pitch):
# position rows are the identity, so only the angle block contributes.
print("pitch      det(J)         cos(pitch)")
for pitch in (0.0, 0.4, 1.0, 1.4, 1.5):
    ev = jacobian(np.array([0.3, pitch, -0.8]))
    print(f"{pitch:5.2f}   {ev.det: .10f}   {np.cos(pitch): .10f}")

# Closed-form inverse vs. multiply-back over random non-singular poses.
worst = 0.0
for _ in range(1000):
    q = rng.uniform(-np.pi, np.pi, 3)
    q[1] = rng.uniform(-1.45, 1.45)
    ev = jacobian(q)
    worst = max(worst, np.abs(ev.J @ ev.J_inv - np.eye(6)).max())
print(f"\nmax |J J^-1 - I| over 1000 poses: {worst:.3e}")

# Round trip: generalized velocity -> pose rates -> generalized velocity.
q = np.array([0.5, 0.9, -1.2])
twist = rng.normal(size=6)
qdot = body_rates_to_state_rates(q, twist)
back = jacobian(q).J @ qdot
print(f"rate round-trip error: {np.abs(back - twist).max():.3e}")

# Approaching the singular band the inverse grows like 1/cos(pitch),
# until the guard refuses to produce one at all.
print("\npitch margin   |J^-1| max")
for margin in (1e-1, 1e-2, 1e-4, 1e-6):
    q = np.array([0.0, np.pi / 2 - margin, 0.0])
    ev = jacobian(q)
    if ev.regular:
        print(f"{margin:10.0e}   {np.abs(ev.J_inv).max():10.3e}")
    else:
        print(f"{margin:10.0e}   refused (|cos| <= {EPS_SINGULAR})")

try:
    body_rates_to_state_rates(np.array([0.0, np.pi / 2, 0.0]), twist)
except SingularPoseError as e:
    print(f"\nat the band itself: {e}")
