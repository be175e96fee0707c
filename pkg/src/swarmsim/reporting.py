"""Run artifacts: trajectory CSV, per-figure plot data, summary report.

All numbers are printed with 17 significant digits, enough for a double to
round-trip exactly, so re-parsing an emitted CSV reproduces the logged
values bit for bit and two identical runs emit identical bytes.
"""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np
import yaml

from .model import Scenario
from .scenario_io import scenario_digest
from .sim import TrajectoryLog

FLOAT_FMT = "%.17g"


def _fmt(x: float) -> str:
    return FLOAT_FMT % x


def agent_columns(agent_id: int) -> list[str]:
    """Per-agent column names in trajectory-CSV order."""
    base = ["p_x", "p_y", "p_z", "phi", "theta", "psi",
            "v_x", "v_y", "v_z", "w_x", "w_y", "w_z",
            "u_1", "u_2", "u_3", "u_4", "u_5", "u_6",
            "gamma", "beta"]
    return [f"{name}_{agent_id}" for name in base]


def trajectory_header(log: TrajectoryLog) -> list[str]:
    cols = ["t"]
    for aid in log.agent_ids:
        cols.extend(agent_columns(aid))
    cols.extend(["L", "min_dist_agents", "min_dist_obstacles"])
    return cols


def trajectory_csv_text(log: TrajectoryLog) -> str:
    """Logged rows as CSV text; deterministic for equal logs."""
    lines = [",".join(trajectory_header(log))]
    for k in range(log.t.shape[0]):
        vals = [log.t[k]]
        for a in range(len(log.agent_ids)):
            vals.extend(log.X[k, a])
            vals.extend(log.V[k, a])
            vals.extend(log.U[k, a])
            vals.append(log.gamma[k, a])
            vals.append(log.beta[k, a])
        vals.extend([log.L[k], log.min_dist_agents[k], log.min_dist_obstacles[k]])
        lines.append(",".join(_fmt(v) for v in vals))
    return "\n".join(lines) + "\n"


def write_trajectory_csv(log: TrajectoryLog, path: str | Path) -> Path:
    path = Path(path)
    path.write_text(trajectory_csv_text(log))
    return path


def read_trajectory_csv(path: str | Path) -> dict[str, np.ndarray]:
    """Columns of an emitted trajectory CSV, keyed by header name."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        rows = [[float(c) for c in row] for row in reader]
    data = np.array(rows) if rows else np.zeros((0, len(header)))
    return {name: data[:, k] for k, name in enumerate(header)}


def _write_series_csv(path: Path, header: list[str], columns: list[np.ndarray]) -> Path:
    lines = [",".join(header)]
    n = columns[0].shape[0] if columns else 0
    for k in range(n):
        lines.append(",".join(_fmt(col[k]) for col in columns))
    path.write_text("\n".join(lines) + "\n")
    return path


def write_plot_data(log: TrajectoryLog, outdir: str | Path) -> dict[str, Path]:
    """Per-figure CSVs: goal residuals, safety products, energy, inputs, paths.

    Residual, safety-product and energy curves use the every-step monitor
    series; input and path polylines use the thinned rows.
    """
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    ids = log.agent_ids
    files = {}
    files["gamma"] = _write_series_csv(
        outdir / "gamma.csv",
        ["t"] + [f"gamma_{a}" for a in ids],
        [log.series_t] + [log.series_gamma[:, k] for k in range(len(ids))])
    files["beta"] = _write_series_csv(
        outdir / "beta.csv",
        ["t"] + [f"beta_{a}" for a in ids],
        [log.series_t] + [log.series_beta[:, k] for k in range(len(ids))])
    files["lyapunov"] = _write_series_csv(
        outdir / "lyapunov.csv", ["t", "L"], [log.series_t, log.series_L])
    u_cols, u_names = [], ["t"]
    p_cols, p_names = [], ["t"]
    for k, aid in enumerate(ids):
        for c in range(6):
            u_names.append(f"u_{c + 1}_{aid}")
            u_cols.append(log.U[:, k, c])
        for c, ax in enumerate(("x", "y", "z")):
            p_names.append(f"p_{ax}_{aid}")
            p_cols.append(log.X[:, k, c])
    files["inputs"] = _write_series_csv(outdir / "inputs.csv", u_names,
                                        [log.t] + u_cols)
    files["paths"] = _write_series_csv(outdir / "paths.csv", p_names,
                                       [log.t] + p_cols)
    return files


def monitor_extrema(log: TrajectoryLog) -> dict:
    """Worst case of every monitored quantity over the whole run."""
    if log.series_t.shape[0] == 0:
        return {}
    out = {
        "min_beta": {int(a): float(log.series_beta[:, k].min())
                     for k, a in enumerate(log.agent_ids)},
        "min_dist_agents": float(log.series_min_dist_agents.min()),
        "min_dist_obstacles": float(log.series_min_dist_obstacles.min()),
        "max_reach": float(log.series_max_reach.max()),
        "max_pitch": float(log.series_max_pitch.max()),
        "gamma_initial_max": float(log.series_gamma[0].max()),
        "gamma_final_max": float(log.series_gamma[-1].max()),
        "lyapunov_initial": float(log.series_L[0]),
        "lyapunov_final": float(log.series_L[-1]),
        "lyapunov_total_increase": float(log.lyap_total_increase),
        "lyapunov_slack_exceedances": int(log.lyap_increase_count),
    }
    if log.series_edge_dist.shape[1]:
        out["max_edge_dist"] = {
            f"{i}-{j}": float(log.series_edge_dist[:, k].max())
            for k, (i, j) in enumerate(log.edge_ids)
        }
    return out


def summary_mapping(log: TrajectoryLog, scenario: Scenario,
                    files: dict[str, Path] | None = None) -> dict:
    verdict = {
        "status": log.verdict.status,
        "kind": log.verdict.kind,
        "t": log.verdict.t,
        "agents": list(log.verdict.agents),
        "detail": log.verdict.detail,
    }
    out = {
        "scenario_digest": scenario_digest(scenario),
        "verdict": verdict,
        "agents": list(log.agent_ids),
        "dt": float(log.dt),
        "steps_taken": int(log.steps_taken),
        "wall_time_s": round(float(log.wall_time), 3),
        "monitors": monitor_extrema(log),
        "critical_point_steps": int(log.critical_point_steps),
    }
    if log.critical_point_first_t is not None:
        out["critical_point_first_t"] = float(log.critical_point_first_t)
    if files:
        out["files"] = {k: str(p) for k, p in files.items()}
    return out


def write_run_artifacts(log: TrajectoryLog, scenario: Scenario,
                        outdir: str | Path) -> dict[str, Path]:
    """Write trajectory CSV, plot data and summary; returns all paths."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    files = {"trajectory": write_trajectory_csv(log, outdir / "trajectory.csv")}
    files.update(write_plot_data(log, outdir))
    summary = summary_mapping(log, scenario, files)
    path = outdir / "summary.yaml"
    path.write_text(yaml.safe_dump(summary, sort_keys=False))
    files["summary"] = path
    return files
