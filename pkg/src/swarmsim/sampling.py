"""Seeded random poses, scenarios and states for property checks.

Everything takes a numpy Generator, so callers control determinism; the
same generator state always yields the same draw.  Scenario generation is
rejection-based but bounded: agents are chained with legal link lengths,
then the whole draw is validated and retried if any derived condition
fails.
"""

from __future__ import annotations

import numpy as np

from .errors import PotentialBlowupError
from .model import (AgentSpec, FormationEdge, FormationSpec, NumericsConfig,
                    Obstacle, Pose, Scenario, Twist, Workspace,
                    validate_scenario)
from .potential import PotentialModel


def sample_pose(rng: np.random.Generator, pitch_limit: float = 1.3) -> np.ndarray:
    """Random stacked pose with pitch clear of the singular band."""
    p = rng.uniform(-5.0, 5.0, 3)
    q = rng.uniform(-np.pi, np.pi, 3)
    q[1] = rng.uniform(-pitch_limit, pitch_limit)
    return np.concatenate([p, q])


def sample_twist(rng: np.random.Generator, scale: float = 1.0) -> np.ndarray:
    return rng.normal(0.0, scale, 6)


def sample_inertia(rng: np.random.Generator) -> np.ndarray:
    """Anisotropic principal inertia, well away from zero."""
    return rng.uniform(0.2, 3.0, 3)


def random_scenario(rng: np.random.Generator, n_agents: int | None = None,
                    n_obstacles: int | None = None) -> Scenario:
    """A valid scenario drawn at random: chained formation, optional obstacles.

    Agents are placed as a chain with link lengths well inside sensing
    range, desired offsets sit near the initial geometry, and obstacles are
    dropped only where the spacing rules leave room.  The draw is repeated
    until validation passes; with sane bounds this takes a handful of tries.
    """
    for _ in range(200):
        n = int(n_agents) if n_agents is not None else int(rng.integers(3, 6))
        z = int(n_obstacles) if n_obstacles is not None else int(rng.integers(0, 3))
        r_w = float(rng.uniform(9.0, 12.0))
        radii = rng.uniform(0.2, 0.35, n)
        sensing = rng.uniform(4.5, 5.5, n)

        P = np.zeros((n, 3))
        P[0] = rng.uniform(-2.0, 2.0, 3)
        placed = True
        for k in range(1, n):
            for _try in range(50):
                direction = rng.normal(0.0, 1.0, 3)
                direction /= np.linalg.norm(direction)
                cand = P[k - 1] + direction * rng.uniform(1.4, 2.8)
                far = all(np.linalg.norm(cand - P[m]) > radii[k] + radii[m] + 0.5
                          for m in range(k))
                if far and np.linalg.norm(cand) + radii[k] < r_w - 1.0:
                    P[k] = cand
                    break
            else:
                placed = False
                break
        if not placed:
            continue

        agents = []
        poses = []
        for k in range(n):
            agents.append(AgentSpec(id=k + 1, radius=float(radii[k]),
                                    sensing=float(sensing[k]),
                                    mass=float(rng.uniform(0.8, 1.5))))
            q = np.array([rng.uniform(-1.0, 1.0), rng.uniform(-0.4, 0.4),
                          rng.uniform(-1.0, 1.0)])
            poses.append(Pose(p=P[k].copy(), q=q))
        twists = [Twist.zero() for _ in range(n)]

        edges = []
        ok = True
        for k in range(n - 1):
            p_des = P[k] - P[k + 1] + rng.uniform(-0.3, 0.3, 3)
            sep = float(np.linalg.norm(p_des))
            lo = radii[k] + radii[k + 1] + 0.1
            hi = min(sensing[k], sensing[k + 1]) - 0.5
            if not lo < sep < hi:
                ok = False
                break
            q_des = np.array([rng.uniform(-0.3, 0.3), rng.uniform(-0.2, 0.2),
                              rng.uniform(-0.3, 0.3)])
            edges.append(FormationEdge(i=k + 1, j=k + 2, p_des=p_des, q_des=q_des))
        if not ok:
            continue

        obstacles = []
        r_max = float(radii.max())
        for _ob in range(z):
            for _try in range(80):
                c = rng.uniform(-0.6, 0.6, 3) * (r_w - 3.0)
                ro = float(rng.uniform(0.4, 0.8))
                if np.linalg.norm(c) + ro + 2 * r_max + 0.2 >= r_w:
                    continue
                if any(np.linalg.norm(c - o.center) < 2 * r_max + ro + o.radius + 0.2
                       for o in obstacles):
                    continue
                if any(np.linalg.norm(c - P[k]) < radii[k] + ro + 0.5
                       for k in range(n)):
                    continue
                obstacles.append(Obstacle(center=c, radius=ro))
                break

        sc = Scenario(agents=tuple(agents), obstacles=tuple(obstacles),
                      workspace=Workspace(radius=r_w),
                      formation=FormationSpec(tuple(edges)),
                      initial_poses=tuple(poses), initial_twists=tuple(twists),
                      numerics=NumericsConfig())
        if validate_scenario(sc).ok:
            return sc
    raise RuntimeError("could not draw a valid random scenario in 200 attempts")


def random_free_state(rng: np.random.Generator, model: PotentialModel,
                      pos_jitter: float = 0.4, ang_jitter: float = 0.25,
                      min_beta: float = 1e-8, tries: int = 500) -> np.ndarray:
    """Perturbed configuration with every safety product comfortably positive.

    Draws around the scenario's initial state and keeps the first sample
    whose smallest safety product clears ``min_beta``, so finite-difference
    probes around the returned state stay inside the potential's domain.
    """
    X0, _ = model.scenario.initial_state_arrays()
    n = X0.shape[0]
    for _ in range(tries):
        X = X0.copy()
        X[:, :3] += rng.uniform(-pos_jitter, pos_jitter, (n, 3))
        X[:, 3:] += rng.uniform(-ang_jitter, ang_jitter, (n, 3))
        try:
            world = model.evaluate(X)
        except PotentialBlowupError:
            continue
        if world.beta.min() > min_beta:
            return X
    raise RuntimeError(f"no free state with beta > {min_beta} in {tries} tries")
