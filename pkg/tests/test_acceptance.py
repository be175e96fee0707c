"""End-to-end acceptance gate.

Each test here is one release criterion; the conftest hook prints a
one-line PASS/FAIL verdict per criterion at the end of the session.
Criteria 1-3 share the session-scoped benchmark trajectory.
"""

import math

import numpy as np

from swarmsim.reporting import trajectory_csv_text
from swarmsim.scenario_io import apply_overrides, load_golden
from swarmsim.selfcheck import (
    check_bump_smoothness,
    check_gradients,
    check_skew_symmetry,
)
from swarmsim.sim import Simulator

from conftest import goal_pair_scenario

WALL_BUDGET_S = 300.0


def test_criterion_1_benchmark_converges(golden_run):
    scenario, log, wall = golden_run
    assert log.verdict.status == "converged", str(log.verdict)
    gamma_start = log.series_gamma[0].max()
    gamma_end = log.series_gamma[-1].max()
    assert gamma_end < 1e-2 * gamma_start, (
        f"residual {gamma_end:.3e} vs start {gamma_start:.3e}")
    assert wall < WALL_BUDGET_S, f"benchmark took {wall:.1f} s"


def test_criterion_2_safety_monitors_hold(golden_run):
    scenario, log, _ = golden_run
    assert float(log.series_beta.min()) > 0.0
    assert float(log.series_min_dist_agents.min()) > 0.5
    assert float(log.series_min_dist_obstacles.min()) > 1.0
    assert float(log.series_max_reach.max()) < scenario.workspace.radius
    assert float(log.series_edge_dist.max()) < 5.0
    assert float(log.series_max_pitch.max()) < math.pi / 2


def test_criterion_3_lyapunov_monotone(golden_run):
    scenario, log, _ = golden_run
    # every per-step rise within integrator slack, and the accumulated
    # rises negligible against the initial level
    assert log.lyap_increase_count == 0, (
        f"{log.lyap_increase_count} rises beyond slack, "
        f"worst excess {log.lyap_max_excess:.3e}")
    L0 = float(log.series_L[0])
    assert log.lyap_total_increase < 1e-3 * L0, (
        f"total rise {log.lyap_total_increase:.3e} vs initial {L0:.3e}")


def test_criterion_4_gradients_match_finite_differences():
    result = check_gradients(np.random.default_rng(2024),
                             n_scenarios=5, states_each=20)
    assert result.passed, result.line()
    assert "100 states in 5 scenarios" in result.detail


def test_criterion_5_coriolis_skew_symmetry():
    result = check_skew_symmetry(np.random.default_rng(2024), n=1000)
    assert result.passed, result.line()


def test_criterion_6_bump_smoothness():
    result = check_bump_smoothness(np.random.default_rng(2024), n=50)
    assert result.passed, result.line()


def test_criterion_7_goal_state_is_invariant():
    scenario = goal_pair_scenario(t_end=1.0)
    log = Simulator(scenario).run()
    X0, V0 = scenario.initial_state_arrays()
    drift = max(np.abs(log.X - X0[None]).max(), np.abs(log.V - V0[None]).max())
    assert drift <= 1e-9, f"drift {drift:.3e}"
    assert log.verdict.status == "converged"


def test_criterion_8_integrator_order():
    finals = {}
    for dt in (2e-3, 1e-3, 5e-4):
        sc = apply_overrides(load_golden(), dt=dt, t_end=1.0)
        X, V = Simulator(sc).run().final_state
        finals[dt] = np.concatenate([X.ravel(), V.ravel()])
    e_coarse = np.linalg.norm(finals[2e-3] - finals[1e-3])
    e_fine = np.linalg.norm(finals[1e-3] - finals[5e-4])
    ratio = e_coarse / e_fine
    assert 12.0 <= ratio <= 20.0, f"step-doubling ratio {ratio:.3f}"


def test_criterion_9_deterministic_artifacts():
    sc = apply_overrides(load_golden(), t_end=2.0)
    text_a = trajectory_csv_text(Simulator(sc).run())
    text_b = trajectory_csv_text(Simulator(sc).run())
    assert text_a.encode() == text_b.encode()
