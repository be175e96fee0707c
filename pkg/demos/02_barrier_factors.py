"""Plot the transition curve and every barrier factor family.

Writes demos/out/barriers.png.  The safety product multiplies factors of
exactly these shapes; each one ramps from 0 at the forbidden boundary to 1
at the comfort threshold and stays flat beyond it.
"""

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from swarmsim.potential import (BumpSpec, b_singularity, b_workspace, bump,
                                eta, smoothstep)

OUT = Path(__file__).resolve().parent / "out"
OUT.mkdir(exist_ok=True)

fig, axes = plt.subplots(2, 2, figsize=(10, 7))

# transition curve and its clamped tails
ts = np.linspace(-0.3, 1.3, 400)
axes[0, 0].plot(ts, smoothstep(ts))
axes[0, 0].axvline(0.0, color="gray", lw=0.5)
axes[0, 0].axvline(1.0, color="gray", lw=0.5)
axes[0, 0].set_title("quintic transition, clamped outside [0, 1]")

# proximity factor between two agents: radius sum 0.5, sensing 5
contact, sensing = 0.5, 5.0
knot = sensing**2 - contact**2
spec = BumpSpec("agent", knot)
ds = np.linspace(0.0, 6.0, 500)
vals = [bump(spec, eta("agent", d, contact)).value for d in ds]
axes[0, 1].plot(ds, vals)
axes[0, 1].axvline(contact, color="r", lw=0.8, label="contact")
axes[0, 1].legend()
axes[0, 1].set_title("inter-agent clearance factor vs. distance")

# connectivity factor for the same pair: falls to 0 at sensing range
cvals = [bump(BumpSpec("connectivity", knot),
              eta("connectivity", d, sensing)).value for d in ds]
axes[1, 0].plot(ds, cvals)
axes[1, 0].axvline(sensing, color="r", lw=0.8, label="sensing limit")
axes[1, 0].legend()
axes[1, 0].set_title("link preservation factor vs. distance")

# workspace containment and pitch factors
r_w, r_i = 10.0, 0.25
rs = np.linspace(0.0, r_w, 400)
axes[1, 1].plot(rs, [b_workspace(r * r, r_w, r_i) for r in rs],
                label="containment vs. |p|")
pitches = np.linspace(-np.pi / 2, np.pi / 2, 400)
axes[1, 1].plot(pitches + r_w / 2, [b_singularity(th) for th in pitches],
                label="pitch factor (shifted axis)")
axes[1, 1].legend()
axes[1, 1].set_title("workspace and orientation factors")

fig.tight_layout()
fig.savefig(OUT / "barriers.png", dpi=120)
print(f"wrote {OUT / 'barriers.png'}")

# numeric spot checks mirroring the figure
print(f"transition at 1/4: {smoothstep(0.25)}")
print(f"containment at the boundary: {b_workspace((r_w - r_i)**2, r_w, r_i)}")
print(f"pitch factor at 60 deg: {b_singularity(np.pi / 3):.6f}")
