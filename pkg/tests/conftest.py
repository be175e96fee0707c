"""Shared fixtures plus the acceptance-criteria summary hook.

The bundled benchmark run is expensive (30 simulated seconds), so it lives
in a session fixture and every test that needs the full trajectory shares
the same log.
"""

from __future__ import annotations

import time

import numpy as np
import pytest

from swarmsim.model import (AgentSpec, FormationEdge, FormationSpec,
                            NumericsConfig, Obstacle, Pose, Scenario, Twist,
                            Workspace)
from swarmsim.potential import PotentialModel
from swarmsim.scenario_io import load_golden
from swarmsim.sim import Simulator


def build_agent(agent_id: int, *, radius: float = 0.25, sensing: float = 5.0,
                mass: float = 1.0, gain: float = 5.0,
                inertia=None) -> AgentSpec:
    return AgentSpec(id=agent_id, radius=radius, sensing=sensing, mass=mass,
                     gain=gain, body_inertia=inertia)


def build_pair(p1, p2, p_des, *, q1=None, q2=None, q_des=None, obstacles=(),
               sensing: float = 5.0, gain: float = 5.0,
               numerics: NumericsConfig | None = None,
               workspace: float = 10.0) -> Scenario:
    """Two-agent scenario with a single formation edge (1, 2)."""
    zero = np.zeros(3)
    return Scenario(
        agents=(build_agent(1, sensing=sensing, gain=gain),
                build_agent(2, sensing=sensing, gain=gain)),
        obstacles=tuple(obstacles),
        workspace=Workspace(radius=workspace),
        formation=FormationSpec(edges=(
            FormationEdge(1, 2, np.asarray(p_des, dtype=float),
                          zero if q_des is None else np.asarray(q_des, dtype=float)),)),
        initial_poses=(Pose(np.asarray(p1, dtype=float), zero if q1 is None else np.asarray(q1, dtype=float)),
                       Pose(np.asarray(p2, dtype=float), zero if q2 is None else np.asarray(q2, dtype=float))),
        initial_twists=(Twist.zero(), Twist.zero()),
        numerics=numerics if numerics is not None else NumericsConfig(),
    )


def goal_pair_scenario(t_end: float = 1.0) -> Scenario:
    """Pair starting bitwise at the formation goal; the input must freeze it.

    All coordinates are short binary fractions so p1 - p2 equals the desired
    offset exactly, making the goal-residual gradient exactly zero.
    """
    p1 = np.array([0.5, -0.25, 5.0])
    p_des = np.array([-1.5, 0.25, -0.5])
    return build_pair(p1, p1 - p_des, p_des,
                      numerics=NumericsConfig(dt=1e-3, t_end=t_end))


@pytest.fixture()
def golden():
    return load_golden()


@pytest.fixture()
def golden_state(golden):
    model = PotentialModel(golden)
    X, V = golden.initial_state_arrays()
    return golden, model, X, V


@pytest.fixture(scope="session")
def golden_run():
    """Full benchmark trajectory plus its wall-clock time, run once."""
    scenario = load_golden()
    start = time.perf_counter()
    log = Simulator(scenario).run()
    wall = time.perf_counter() - start
    return scenario, log, wall


@pytest.fixture()
def pair_builder():
    return build_pair


@pytest.fixture()
def goal_pair():
    return goal_pair_scenario()


# -- acceptance summary ----------------------------------------------------

ACCEPTANCE_LABELS = {
    "test_criterion_1_benchmark_converges":
        "benchmark run converges within horizon and wall budget",
    "test_criterion_2_safety_monitors_hold":
        "safety product positive, clearances, containment, links, pitch",
    "test_criterion_3_lyapunov_monotone":
        "energy monitor non-increasing within integrator slack",
    "test_criterion_4_gradients_match_finite_differences":
        "analytic gradients vs central differences on random states",
    "test_criterion_5_coriolis_skew_symmetry":
        "v'(Mdot - 2C)v vanishes on random pose/twist samples",
    "test_criterion_6_bump_smoothness":
        "transition curve monotone, bounded, C2 at the joins",
    "test_criterion_7_goal_state_is_invariant":
        "exact goal start stays put",
    "test_criterion_8_integrator_order":
        "step-doubling error ratio matches fourth order",
    "test_criterion_9_deterministic_artifacts":
        "repeated runs give byte-identical trajectory files",
}


_acceptance_results: dict[str, str] = {}


def pytest_configure(config):
    _acceptance_results.clear()


def pytest_runtest_logreport(report):
    if "test_acceptance.py::" not in report.nodeid:
        return
    name = report.nodeid.rsplit("::", 1)[-1]
    if name not in ACCEPTANCE_LABELS:
        return
    if report.when == "call":
        _acceptance_results[name] = report.outcome
    elif report.when == "setup" and report.outcome != "passed":
        _acceptance_results[name] = ("error" if report.outcome == "failed"
                                     else report.outcome)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    results = _acceptance_results
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for k, name in enumerate(sorted(ACCEPTANCE_LABELS), start=1):
        outcome = results.get(name)
        if outcome is None:
            continue
        word = {"passed": "PASS", "failed": "FAIL", "error": "ERROR"}.get(
            outcome, outcome.upper())
        terminalreporter.write_line(
            f"criterion {k} {word}: {ACCEPTANCE_LABELS[name]}")
