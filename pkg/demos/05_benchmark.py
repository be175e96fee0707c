"""Full benchmark showcase: four agents, two obstacles, every monitor.

Runs the bundled scenario, writes the standard artifact set plus a figure.

    python3 demos/05_benchmark.py [t_end]

The full 30 s horizon takes under a minute; pass a shorter horizon for a
quick look.
"""

import sys
import time
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from swarmsim.reporting import monitor_extrema, write_run_artifacts
from swarmsim.scenario_io import apply_overrides, load_golden
from swarmsim.sim import Simulator

OUT = Path(__file__).resolve().parent / "out" / "benchmark"

scenario = load_golden()
if len(sys.argv) > 1:
    scenario = apply_overrides(scenario, t_end=float(sys.argv[1]))

start = time.perf_counter()
log = Simulator(scenario).run()
wall = time.perf_counter() - start
print(f"verdict: {log.verdict}   ({log.steps_taken} steps, {wall:.1f} s wall)")

mon = monitor_extrema(log)
print(f"goal residual: {mon['gamma_initial_max']:.3f} -> "
      f"{mon['gamma_final_max']:.4f} (max over agents)")
print(f"safety product minimum: {min(mon['min_beta'].values()):.3e}")
print(f"closest agents {mon['min_dist_agents']:.3f} m, "
      f"closest obstacle {mon['min_dist_obstacles']:.3f} m")
print(f"max reach {mon['max_reach']:.3f} m, max |pitch| {mon['max_pitch']:.3f} rad")
print(f"energy rises beyond slack: {mon['lyapunov_slack_exceedances']}")

files = write_run_artifacts(log, scenario, OUT)
print(f"artifacts in {OUT}")

fig, axes = plt.subplots(1, 3, figsize=(14, 4))
for k, aid in enumerate(log.agent_ids):
    axes[0].plot(log.X[:, k, 0], log.X[:, k, 1], label=f"agent {aid}")
axes[0].set_title("paths, top view")
axes[0].set_xlabel("x [m]")
axes[0].set_ylabel("y [m]")
axes[0].legend(fontsize=8)

axes[1].semilogy(log.series_t, log.series_gamma)
axes[1].set_title("goal residuals")
axes[1].set_xlabel("t [s]")

axes[2].semilogy(log.series_t, log.series_beta)
axes[2].set_title("safety products")
axes[2].set_xlabel("t [s]")

fig.tight_layout()
fig.savefig(OUT / "benchmark.png", dpi=120)
print(f"wrote {OUT / 'benchmark.png'}")
