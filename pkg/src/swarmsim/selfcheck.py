"""Embedded property suites: quick numerical audits runnable in the field.

Four suites cover the load-bearing numerics: the closed-form rate-matrix
inverse, smoothness of the ramp factors, analytic potential gradients
against central finite differences, and the skew-symmetry identity that
makes the energy argument work.  All draws are seeded, so repeated runs
with the same seed produce identical reports.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import potential
from .dynamics import coriolis_matrix, inertia_matrix
from .kinematics import angular_rate_matrix, jacobian
from .model import AgentSpec
from .potential import BumpSpec, PotentialModel
from .sampling import (random_free_state, random_scenario, sample_inertia,
                       sample_pose, sample_twist)

DEFAULT_SEED = 2024


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str

    def line(self) -> str:
        return f"{'PASS' if self.passed else 'FAIL'} {self.name}: {self.detail}"


def check_jacobian_inverse(rng: np.random.Generator, n: int = 500) -> CheckResult:
    """Closed-form inverse against multiply-back, and the determinant value."""
    worst = 0.0
    for _ in range(n):
        x = sample_pose(rng, pitch_limit=1.4)
        ev = jacobian(x[3:])
        resid = np.abs(ev.J @ ev.J_inv - np.eye(6)).max()
        worst = max(worst, resid)
        if ev.det != float(np.cos(x[4])):
            return CheckResult("jacobian-inverse", False,
                               f"determinant mismatch at pitch {x[4]:.6f}")
    passed = worst < 1e-12
    return CheckResult("jacobian-inverse", passed,
                       f"max |J J^-1 - I| = {worst:.3e} over {n} poses")


def check_bump_smoothness(rng: np.random.Generator, n: int = 50) -> CheckResult:
    """Ramp factors: range, monotonicity, curvature-free joins."""
    for _ in range(n):
        knot = float(rng.uniform(0.05, 30.0))
        spec = BumpSpec("agent", knot)
        xs = np.linspace(-0.2 * knot, 1.2 * knot, 10_000)
        vals = potential.smoothstep(xs / knot)
        if vals.min() < 0.0 or vals.max() > 1.0:
            return CheckResult("bump-smoothness", False,
                               f"range violation for knot {knot:.3f}")
        if np.diff(vals).min() < -1e-14:
            return CheckResult("bump-smoothness", False,
                               f"non-monotone for knot {knot:.3f}")
        tol = 1e-6 / knot**2
        h = 1e-8 * knot
        for joint in (0.0, knot):
            inner = potential.bump(spec, joint + (h if joint == 0.0 else -h)).d2
            outer = potential.bump(spec, joint + (-h if joint == 0.0 else h)).d2
            if abs(inner - outer) > tol:
                return CheckResult(
                    "bump-smoothness", False,
                    f"curvature jump {abs(inner - outer):.3e} at x={joint:.3f}, "
                    f"knot {knot:.3f}")
    return CheckResult("bump-smoothness", True,
                       f"{n} knots: range, monotonicity and joins clean")


def gradient_errors(model: PotentialModel, X: np.ndarray,
                    h: float = 1e-6) -> float:
    """Worst relative deviation of analytic gradients from central FD.

    Each entry is compared against the larger of the two magnitudes,
    floored at 1% of the grid's largest entry so near-zero entries are
    judged on the problem's scale rather than their own.
    """
    world = model.evaluate(X)
    G = world.grad
    n = X.shape[0]
    fd = np.zeros_like(G)
    for k in range(n):
        for c in range(6):
            Xp = X.copy()
            Xp[k, c] += h
            Xm = X.copy()
            Xm[k, c] -= h
            fd[:, k, c] = (model.evaluate(Xp).phi - model.evaluate(Xm).phi) / (2 * h)
    floor = max(1e-2 * np.abs(G).max(), 1e-12)
    denom = np.maximum(np.maximum(np.abs(G), np.abs(fd)), floor)
    return float((np.abs(G - fd) / denom).max())


def check_gradients(rng: np.random.Generator, n_scenarios: int = 5,
                    states_each: int = 20) -> CheckResult:
    """Analytic potential gradients against finite differences."""
    worst = 0.0
    total = 0
    for _ in range(n_scenarios):
        sc = random_scenario(rng)
        model = PotentialModel(sc)
        for _ in range(states_each):
            X = random_free_state(rng, model)
            worst = max(worst, gradient_errors(model, X))
            total += 1
    passed = worst < 1e-5
    return CheckResult("gradient-fd", passed,
                       f"max relative error {worst:.3e} over {total} states "
                       f"in {n_scenarios} scenarios")


def check_skew_symmetry(rng: np.random.Generator, n: int = 1000,
                        h: float = 1e-5) -> CheckResult:
    """v^T (Mdot - 2C) v vanishes along the angle-rate flow.

    Mdot is taken by central differences of the inertia matrix along the
    Euler-angle trajectory generated by the sampled body rates.
    """
    worst = 0.0
    for k in range(n):
        agent = AgentSpec(id=1, radius=0.3, sensing=5.0,
                          mass=float(rng.uniform(0.5, 2.0)),
                          body_inertia=sample_inertia(rng))
        x = sample_pose(rng, pitch_limit=1.3)
        v = sample_twist(rng)
        q = x[3:]
        ev = jacobian(q)
        qdot = ev.J_inv[3:, 3:] @ v[3:]
        Mp = inertia_matrix(agent, q + h * qdot)
        Mm = inertia_matrix(agent, q - h * qdot)
        Mdot = (Mp - Mm) / (2 * h)
        C = coriolis_matrix(agent, q, v)
        resid = abs(v @ (Mdot - 2.0 * C) @ v)
        M = inertia_matrix(agent, q)
        bound = 1e-6 * float(v @ v) * float(np.linalg.norm(M, 2))
        worst = max(worst, resid / bound if bound > 0 else 0.0)
        if resid > bound:
            return CheckResult(
                "skew-symmetry", False,
                f"sample {k}: |v^T (Mdot - 2C) v| = {resid:.3e} exceeds {bound:.3e}")
    return CheckResult("skew-symmetry", True,
                       f"worst residual at {worst:.3f} of bound over {n} samples")


def run_all(seed: int = DEFAULT_SEED) -> list[CheckResult]:
    """All four suites with seeded draws; deterministic per seed."""
    rng = np.random.default_rng(seed)
    return [
        check_jacobian_inverse(rng),
        check_bump_smoothness(rng),
        check_gradients(rng),
        check_skew_symmetry(rng),
    ]
