"""Scenario files: YAML parsing, serialization, digests, overrides.

Parsing is strict about structure (unknown keys, wrong types and malformed
vectors are format errors) but deliberately does not judge values: a file
with an out-of-range pitch or overlapping bodies parses fine and is then
rejected by validation, so the user sees every violation listed instead of
the first type error.
"""

from __future__ import annotations

import hashlib
from dataclasses import replace
from pathlib import Path
from importlib import resources

import numpy as np
import yaml

from .errors import ScenarioFormatError
from .model import (AgentSpec, FormationEdge, FormationSpec, NumericsConfig,
                    Obstacle, Pose, Scenario, Twist, Workspace)

_AGENT_KEYS = {"id", "radius", "sensing", "mass", "gain", "body_inertia",
               "position", "angles", "velocity", "angular_velocity"}
_NUMERICS_KEYS = {"dt", "t_end", "integrator", "control_update", "log_every",
                  "kappa", "eps_sing", "eps_beta", "lyap_slack_c",
                  "gamma_rel_tol", "v_tol", "g0", "gravity_off"}
_TOP_KEYS = {"workspace", "agents", "obstacles", "formation", "numerics",
             "theta_bar", "epsilon_r"}


def _mapping(x, ctx: str) -> dict:
    if not isinstance(x, dict):
        raise ScenarioFormatError(f"{ctx}: expected a mapping, got {type(x).__name__}")
    return x


def _check_keys(m: dict, allowed: set, ctx: str) -> None:
    unknown = set(m) - allowed
    if unknown:
        raise ScenarioFormatError(f"{ctx}: unknown keys {sorted(unknown)}")


def _num(x, ctx: str) -> float:
    if isinstance(x, bool) or not isinstance(x, (int, float)):
        raise ScenarioFormatError(f"{ctx}: expected a number, got {x!r}")
    return float(x)


def _intval(x, ctx: str) -> int:
    if isinstance(x, bool) or not isinstance(x, int):
        raise ScenarioFormatError(f"{ctx}: expected an integer, got {x!r}")
    return x


def _boolval(x, ctx: str) -> bool:
    if not isinstance(x, bool):
        raise ScenarioFormatError(f"{ctx}: expected true/false, got {x!r}")
    return x


def _strval(x, ctx: str) -> str:
    if not isinstance(x, str):
        raise ScenarioFormatError(f"{ctx}: expected a string, got {x!r}")
    return x


def _vec3(x, ctx: str) -> np.ndarray:
    if not isinstance(x, (list, tuple)) or len(x) != 3:
        raise ScenarioFormatError(f"{ctx}: expected a 3-element list, got {x!r}")
    return np.array([_num(c, f"{ctx}[{k}]") for k, c in enumerate(x)])


def _get(m: dict, key: str, ctx: str):
    if key not in m:
        raise ScenarioFormatError(f"{ctx}: missing required key {key!r}")
    return m[key]


def parse_scenario(data, source: str = "scenario") -> Scenario:
    """Build a scenario from already-loaded YAML data (a mapping).

    Raises:
        ScenarioFormatError: structural problems; value problems are left
            to validation.
    """
    m = _mapping(data, source)
    _check_keys(m, _TOP_KEYS, source)

    ws = _mapping(_get(m, "workspace", source), f"{source}.workspace")
    _check_keys(ws, {"radius"}, f"{source}.workspace")
    workspace = Workspace(radius=_num(_get(ws, "radius", "workspace"), "workspace.radius"))

    raw_agents = _get(m, "agents", source)
    if not isinstance(raw_agents, list) or not raw_agents:
        raise ScenarioFormatError(f"{source}.agents: expected a non-empty list")
    agents, poses, twists = [], [], []
    for k, ra in enumerate(raw_agents):
        ctx = f"{source}.agents[{k}]"
        am = _mapping(ra, ctx)
        _check_keys(am, _AGENT_KEYS, ctx)
        inertia = am.get("body_inertia")
        agents.append(AgentSpec(
            id=_intval(_get(am, "id", ctx), f"{ctx}.id"),
            radius=_num(_get(am, "radius", ctx), f"{ctx}.radius"),
            sensing=_num(_get(am, "sensing", ctx), f"{ctx}.sensing"),
            mass=_num(am.get("mass", 1.0), f"{ctx}.mass"),
            body_inertia=None if inertia is None else _vec3(inertia, f"{ctx}.body_inertia"),
            gain=_num(am.get("gain", 5.0), f"{ctx}.gain"),
        ))
        poses.append(Pose(
            p=_vec3(_get(am, "position", ctx), f"{ctx}.position"),
            q=_vec3(am.get("angles", [0, 0, 0]), f"{ctx}.angles"),
        ))
        twists.append(Twist(
            v=_vec3(am.get("velocity", [0, 0, 0]), f"{ctx}.velocity"),
            omega=_vec3(am.get("angular_velocity", [0, 0, 0]), f"{ctx}.angular_velocity"),
        ))

    obstacles = []
    for z, ro in enumerate(m.get("obstacles") or []):
        ctx = f"{source}.obstacles[{z}]"
        om = _mapping(ro, ctx)
        _check_keys(om, {"center", "radius"}, ctx)
        obstacles.append(Obstacle(center=_vec3(_get(om, "center", ctx), f"{ctx}.center"),
                                  radius=_num(_get(om, "radius", ctx), f"{ctx}.radius")))

    edges = []
    for k, re_ in enumerate(m.get("formation") or []):
        ctx = f"{source}.formation[{k}]"
        em = _mapping(re_, ctx)
        _check_keys(em, {"between", "position_offset", "angle_offset"}, ctx)
        pair = _get(em, "between", ctx)
        if not isinstance(pair, (list, tuple)) or len(pair) != 2:
            raise ScenarioFormatError(f"{ctx}.between: expected [id_i, id_j]")
        edges.append(FormationEdge(
            i=_intval(pair[0], f"{ctx}.between[0]"),
            j=_intval(pair[1], f"{ctx}.between[1]"),
            p_des=_vec3(_get(em, "position_offset", ctx), f"{ctx}.position_offset"),
            q_des=_vec3(em.get("angle_offset", [0, 0, 0]), f"{ctx}.angle_offset"),
        ))

    numerics = NumericsConfig()
    if "numerics" in m and m["numerics"] is not None:
        nm = _mapping(m["numerics"], f"{source}.numerics")
        _check_keys(nm, _NUMERICS_KEYS, f"{source}.numerics")
        kw = {}
        for key in ("dt", "t_end", "kappa", "eps_sing", "eps_beta",
                    "lyap_slack_c", "gamma_rel_tol", "v_tol", "g0"):
            if key in nm:
                kw[key] = _num(nm[key], f"numerics.{key}")
        if "log_every" in nm:
            kw["log_every"] = _intval(nm["log_every"], "numerics.log_every")
        if "integrator" in nm:
            kw["integrator"] = _strval(nm["integrator"], "numerics.integrator")
        if "control_update" in nm:
            kw["control_update"] = _strval(nm["control_update"], "numerics.control_update")
        if "gravity_off" in nm:
            kw["gravity_off"] = _boolval(nm["gravity_off"], "numerics.gravity_off")
        numerics = NumericsConfig(**kw)

    kw = {}
    if "theta_bar" in m:
        kw["theta_bar"] = _num(m["theta_bar"], f"{source}.theta_bar")
    if "epsilon_r" in m:
        kw["epsilon_r"] = _num(m["epsilon_r"], f"{source}.epsilon_r")
    try:
        return Scenario(agents=tuple(agents), obstacles=tuple(obstacles),
                        workspace=workspace, formation=FormationSpec(tuple(edges)),
                        initial_poses=tuple(poses), initial_twists=tuple(twists),
                        numerics=numerics, **kw)
    except ValueError as e:
        raise ScenarioFormatError(f"{source}: {e}") from e


def load_scenario(path: str | Path) -> Scenario:
    """Parse a scenario YAML file.

    Raises:
        ScenarioFormatError: unreadable, unparseable or structurally bad file.
    """
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as e:
        raise ScenarioFormatError(f"cannot read {path}: {e}") from e
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as e:
        raise ScenarioFormatError(f"{path} is not valid YAML: {e}") from e
    return parse_scenario(data, source=str(path))


def scenario_to_mapping(sc: Scenario) -> dict:
    """Plain-data form of a scenario; inverse of :func:`parse_scenario`."""
    out = {
        "workspace": {"radius": float(sc.workspace.radius)},
        "theta_bar": float(sc.theta_bar),
        "epsilon_r": float(sc.epsilon_r),
        "agents": [],
        "obstacles": [
            {"center": [float(c) for c in o.center], "radius": float(o.radius)}
            for o in sc.obstacles
        ],
        "formation": [
            {
                "between": [e.i, e.j],
                "position_offset": [float(c) for c in e.p_des],
                "angle_offset": [float(c) for c in e.q_des],
            }
            for e in sc.formation.edges
        ],
        "numerics": {
            "dt": sc.numerics.dt,
            "t_end": sc.numerics.t_end,
            "integrator": sc.numerics.integrator,
            "control_update": sc.numerics.control_update,
            "log_every": sc.numerics.log_every,
            "kappa": sc.numerics.kappa,
            "eps_sing": sc.numerics.eps_sing,
            "eps_beta": sc.numerics.eps_beta,
            "lyap_slack_c": sc.numerics.lyap_slack_c,
            "gamma_rel_tol": sc.numerics.gamma_rel_tol,
            "v_tol": sc.numerics.v_tol,
            "g0": sc.numerics.g0,
            "gravity_off": sc.numerics.gravity_off,
        },
    }
    for k, a in enumerate(sc.agents):
        out["agents"].append({
            "id": a.id,
            "radius": float(a.radius),
            "sensing": float(a.sensing),
            "mass": float(a.mass),
            "gain": float(a.gain),
            "body_inertia": [float(c) for c in a.body_inertia],
            "position": [float(c) for c in sc.initial_poses[k].p],
            "angles": [float(c) for c in sc.initial_poses[k].q],
            "velocity": [float(c) for c in sc.initial_twists[k].v],
            "angular_velocity": [float(c) for c in sc.initial_twists[k].omega],
        })
    return out


def dump_scenario(sc: Scenario, path: str | Path) -> None:
    Path(path).write_text(yaml.safe_dump(scenario_to_mapping(sc), sort_keys=False))


def scenario_digest(sc: Scenario) -> str:
    """Stable content hash of a scenario, override-sensitive."""
    text = yaml.safe_dump(scenario_to_mapping(sc), sort_keys=True)
    return hashlib.sha256(text.encode()).hexdigest()[:16]


def golden_scenario_path() -> Path:
    """Bundled four-agent benchmark scenario (two obstacles, 30 s horizon)."""
    return Path(str(resources.files("swarmsim").joinpath("data/golden_scenario.yaml")))


def load_golden() -> Scenario:
    return load_scenario(golden_scenario_path())


def apply_overrides(sc: Scenario, *, dt: float | None = None,
                    t_end: float | None = None, kappa: float | None = None,
                    gain: float | None = None, integrator: str | None = None,
                    control_update: str | None = None,
                    log_every: int | None = None) -> Scenario:
    """Scenario copy with selected numerics or gain settings replaced."""
    num_kw = {}
    for key, val in (("dt", dt), ("t_end", t_end), ("kappa", kappa),
                     ("integrator", integrator),
                     ("control_update", control_update),
                     ("log_every", log_every)):
        if val is not None:
            num_kw[key] = val
    numerics = replace(sc.numerics, **num_kw) if num_kw else sc.numerics
    agents = sc.agents
    if gain is not None:
        agents = tuple(replace(a, gain=gain) for a in sc.agents)
    return Scenario(agents=agents, obstacles=sc.obstacles, workspace=sc.workspace,
                    formation=sc.formation, initial_poses=sc.initial_poses,
                    initial_twists=sc.initial_twists, theta_bar=sc.theta_bar,
                    epsilon_r=sc.epsilon_r, numerics=numerics)
