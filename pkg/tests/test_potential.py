"""Goal cost, safety product, composition and gradients.

The benchmark numbers asserted here were frozen from hand computation of
the closed forms (goal cost as a plain python sum over edges, factor values
from the transition polynomial) and spot-checked against central finite
differences; they pin the implementation, they do not restate it.
"""

import math

import numpy as np
import pytest

from swarmsim.errors import PotentialBlowupError
from swarmsim.model import NumericsConfig, Obstacle
from swarmsim.potential import (BumpSpec, PotentialModel, _compose,
                                b_singularity, b_workspace, bump, eta,
                                gamma_edge, smoothstep, smoothstep_d1,
                                smoothstep_d2)
from swarmsim.sampling import random_free_state
from swarmsim.selfcheck import gradient_errors

from conftest import build_pair, goal_pair_scenario

GAMMA0 = [20.233700550136170, 78.456452038354940, 45.496907166026825,
          45.582580815342006]
BETA0 = [2.170986886493956e-04, 8.473980367355429e-06,
         1.378978052089006e-03, 9.411749145494214e-07]
PHI0 = [21.850851116668073, 30.514979462704764, 23.243284354528970,
        30.540533769698513]


# -- transition polynomial -------------------------------------------------

def test_smoothstep_endpoints_and_midpoint():
    assert smoothstep(0.0) == 0.0
    assert smoothstep(1.0) == 1.0
    assert smoothstep(0.5) == 0.5
    assert smoothstep(0.25) == 0.103515625  # exact dyadic evaluation


def test_smoothstep_clamps_outside_unit_interval():
    assert smoothstep(-3.0) == 0.0
    assert smoothstep(7.0) == 1.0
    assert smoothstep_d1(-0.1) == 0.0
    assert smoothstep_d1(1.1) == 0.0
    assert smoothstep_d2(-0.1) == 0.0
    assert smoothstep_d2(1.1) == 0.0


def test_smoothstep_joins_are_second_order_flat():
    for x in (0.0, 1.0):
        assert smoothstep_d1(x) == 0.0
        assert smoothstep_d2(x) == 0.0


def test_smoothstep_monotone_and_bounded():
    t = np.linspace(-0.5, 1.5, 10_001)
    vals = np.array([smoothstep(x) for x in t])
    assert vals.min() == 0.0 and vals.max() == 1.0
    assert np.all(np.diff(vals) >= 0.0)


def test_smoothstep_derivatives_match_finite_differences():
    h = 1e-5
    for x in np.linspace(0.05, 0.95, 19):
        fd1 = (smoothstep(x + h) - smoothstep(x - h)) / (2 * h)
        fd2 = (smoothstep(x + h) - 2 * smoothstep(x) + smoothstep(x - h)) / h**2
        assert smoothstep_d1(x) == pytest.approx(fd1, abs=1e-9)
        assert smoothstep_d2(x) == pytest.approx(fd2, abs=1e-4)


def test_bump_rescales_by_knot():
    spec = BumpSpec("agent", knot=4.0)
    v = bump(spec, 1.0)
    assert v.value == smoothstep(0.25)
    assert v.d1 == pytest.approx(smoothstep_d1(0.25) / 4.0, rel=1e-15)
    assert v.d2 == pytest.approx(smoothstep_d2(0.25) / 16.0, rel=1e-15)
    assert bump(spec, -1.0).value == 0.0
    assert bump(spec, 9.0).value == 1.0


def test_bump_spec_rejects_nonpositive_knot():
    with pytest.raises(ValueError):
        BumpSpec("agent", knot=0.0)
    with pytest.raises(ValueError):
        BumpSpec("obstacle", knot=-2.0)


def test_eta_orientation_per_kind():
    # Clearance margins grow with distance; the link margin shrinks.
    assert eta("agent", 3.0, 2.0) == 5.0
    assert eta("obstacle", 2.0, 1.0) == 3.0
    assert eta("connectivity", 3.0, 5.0) == 16.0


def test_workspace_factor():
    assert b_workspace(0.0, 10.0, 0.25) == 1.0
    knot = (10.0 - 0.25) ** 2
    assert b_workspace(knot, 10.0, 0.25) == 0.0
    assert b_workspace(0.5 * knot, 10.0, 0.25) == 0.25


def test_singularity_factor_is_cos_squared():
    assert b_singularity(0.0) == 1.0
    assert b_singularity(math.pi / 3) == pytest.approx(0.25, rel=1e-15)
    assert b_singularity(math.pi / 2) == pytest.approx(0.0, abs=1e-30)


def test_gamma_edge_known_value():
    x_i = np.array([1.0, 0.0, 2.0, 0.1, 0.0, 0.0])
    x_j = np.array([0.0, 0.0, 0.0, 0.0, 0.0, 0.0])
    x_des = np.array([0.0, 1.0, 2.0, 0.1, 0.0, 0.0])
    assert gamma_edge(x_i, x_j, x_des) == pytest.approx(2.0, rel=1e-15)


# -- composition -----------------------------------------------------------

def test_composition_unit_point():
    phi, A, D = _compose(1.0, 1.0, 1.0)
    assert A == 2.0
    assert phi == pytest.approx(math.log(2.0), rel=1e-15)


def test_composition_zero_goal_cost_is_exactly_zero():
    phi, _, _ = _compose(0.0, 0.3, 4.0)
    assert phi == 0.0


def test_composition_grows_like_log_of_vanishing_safety_product():
    p1, _, _ = _compose(1.0, 1e-200, 4.0)
    p2, _, _ = _compose(1.0, 1e-300, 4.0)
    assert p2 - p1 == pytest.approx(100 * math.log(10.0), rel=1e-12)
    assert math.isfinite(p2)


def test_composition_monotone_in_goal_cost():
    values = [_compose(g, 1e-3, 4.0)[0] for g in (0.1, 1.0, 10.0, 100.0)]
    assert values == sorted(values)


# -- benchmark values ------------------------------------------------------

def manual_gamma(scenario, X):
    """Goal cost recomputed edge by edge with plain python arithmetic."""
    idx = scenario.index_of
    out = [0.0] * scenario.n_agents
    for e in scenario.formation.edges:
        i, j = idx[e.i], idx[e.j]
        des = e.offset_for(e.i, e.j)
        diff = X[i] - X[j] - des
        val = float(diff @ diff)
        out[i] += val
        out[j] += val
    return out


def test_benchmark_goal_costs(golden_state):
    scenario, model, X, _ = golden_state
    world = model.evaluate(X)
    assert np.allclose(world.gamma, manual_gamma(scenario, X), rtol=1e-13)
    assert np.allclose(world.gamma, GAMMA0, rtol=1e-12)


def test_benchmark_safety_products(golden_state):
    _, model, X, _ = golden_state
    world = model.evaluate(X)
    assert np.allclose(world.beta, BETA0, rtol=1e-10)


def test_benchmark_potentials(golden_state):
    _, model, X, _ = golden_state
    world = model.evaluate(X)
    assert np.allclose(world.phi, PHI0, rtol=1e-12)
    assert float(world.phi.sum()) == pytest.approx(106.14964870360102, rel=1e-12)


def test_benchmark_factor_breakdown(golden_state):
    _, model, X, _ = golden_state
    ev = model.beta_agent(0, X)
    labels = [name for name, _ in ev.factors]
    assert labels.count("workspace") == 1
    assert labels.count("singularity") == 1
    assert "connectivity:2" in labels
    assert {"obstacle:0", "obstacle:1"} <= set(labels)
    prod = math.prod(v for _, v in ev.factors)
    assert ev.value == pytest.approx(prod, rel=1e-12)
    # Agent 3 sits exactly at sensing range: its clearance factor saturates.
    saturated = dict(ev.factors)["agent:3"]
    assert saturated == 1.0


def test_neighbor_mask_uses_closed_ball(golden_state):
    _, model, X, _ = golden_state
    world = model.evaluate(X)
    assert not world.neighbor_mask.diagonal().any()
    off = ~np.eye(4, dtype=bool)
    assert world.neighbor_mask[off].all()


def test_saturated_pair_contributes_exactly_zero_gradient(golden_state):
    # Agents 1 and 3 (rows 0 and 2) interact only through saturated factors
    # at t=0, so the cross gradients must be bitwise zero, not just small.
    _, model, X, _ = golden_state
    world = model.evaluate(X)
    assert np.array_equal(world.grad[0, 2], np.zeros(6))
    assert np.array_equal(world.grad[2, 0], np.zeros(6))
    assert np.any(world.grad[0, 1] != 0.0)
    assert np.any(world.grad[0, 3] != 0.0)


def test_per_agent_path_matches_batched_path(golden_state):
    _, model, X, _ = golden_state
    world = model.evaluate(X)
    for i in range(4):
        ev = model.phi_agent(i, X)
        assert ev.value == pytest.approx(world.phi[i], rel=1e-12)
        assert ev.gamma == pytest.approx(world.gamma[i], rel=1e-12)
        assert ev.beta == pytest.approx(world.beta[i], rel=1e-9)
        assert np.allclose(ev.grad_own, world.grad[i, i], rtol=1e-9, atol=1e-12)
        for j, g in ev.grad_wrt.items():
            assert np.allclose(g, world.grad[i, j], rtol=1e-9, atol=1e-12)


def test_gradient_rows_follow_sensing(golden_state):
    _, model, X, _ = golden_state
    ev = model.phi_agent(0, X)
    assert set(ev.grad_wrt) == {1, 3}
    assert np.allclose(model.grad_phi(0, X, 1), ev.grad_wrt[1], rtol=1e-12)


def test_gradients_match_finite_differences(golden_state):
    scenario, model, X, _ = golden_state
    assert gradient_errors(model, X) < 1e-5
    rng = np.random.default_rng(41)
    for _ in range(5):
        Xr = random_free_state(rng, model)
        assert gradient_errors(model, Xr) < 1e-5


def test_broken_derivative_is_caught_by_the_checker(golden_state, monkeypatch):
    # Guard against a vacuous finite-difference audit: corrupt the analytic
    # slope slightly and the measured error must blow past the gate.
    import swarmsim.potential as pot
    _, model, X, _ = golden_state
    original = pot.smoothstep_d1
    monkeypatch.setattr(pot, "smoothstep_d1", lambda t: 1.02 * original(t))
    assert gradient_errors(model, X) > 1e-3


def test_goal_configuration_has_zero_value_and_gradient():
    sc = goal_pair_scenario()
    model = PotentialModel(sc)
    X, _ = sc.initial_state_arrays()
    world = model.evaluate(X)
    assert np.array_equal(world.gamma, np.zeros(2))
    assert np.array_equal(world.phi, np.zeros(2))
    assert np.array_equal(world.grad, np.zeros((2, 2, 6)))


def test_blowup_error_names_the_agent():
    sc = build_pair([-2.0, 0, 5], [2.0, 0, 5], [-2.5, 0, 0])
    model = PotentialModel(sc)
    X, _ = sc.initial_state_arrays()
    X = X.copy()
    X[0, 4] = math.pi / 2 - 1e-9  # singularity factor collapses
    with pytest.raises(PotentialBlowupError, match=r"rows \[0\]"):
        model.evaluate(X)
    with pytest.raises(PotentialBlowupError):
        model.phi_agent(0, X)


def test_kappa_override_changes_composition():
    sc = build_pair([-2.0, 0, 5], [2.0, 0, 5], [-2.5, 0, 0])
    X, _ = sc.initial_state_arrays()
    base = PotentialModel(sc).evaluate(X).phi
    sharper = PotentialModel(sc, kappa=8.0).evaluate(X).phi
    assert not np.allclose(base, sharper)


def test_model_rejects_sensing_inside_contact():
    sc = build_pair([-0.3, 0, 5], [0.3, 0, 5], [-0.55, 0, 0], sensing=0.4)
    with pytest.raises(ValueError):
        PotentialModel(sc)
