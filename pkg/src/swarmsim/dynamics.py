"""Rigid-body plant: inertia, velocity coupling, gravity, accelerations.

Each agent obeys  M(x) vdot + C(x, v) v + g = u  in inertial coordinates,
with the generalized velocity v stacking linear velocity and angular
velocity.  The inertia matrix is block diagonal: a scalar mass block and a
rotated body-inertia block R diag(I_b) R^T.  The velocity coupling reduces
to the gyroscopic term omega x (I_w omega).

The rotation used here composes elementary rotations about x (roll), y
(pitch) and z (yaw) in that order.  With that convention the angular
velocity produced by the rate Jacobian in :mod:`swarmsim.kinematics` is
exactly the inertial angular velocity of the body frame, which is what makes
d/dt(M) - 2C skew-symmetric along trajectories (tests verify this by finite
differences).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NumericError
from .model import AgentSpec

GRAVITY = 9.81


def skew(w: np.ndarray) -> np.ndarray:
    """Cross-product matrix: skew(w) @ a == np.cross(w, a)."""
    return np.array([
        [0.0, -w[2], w[1]],
        [w[2], 0.0, -w[0]],
        [-w[1], w[0], 0.0],
    ])


def rotation_matrix(q: np.ndarray) -> np.ndarray:
    """Body-to-inertial rotation for roll/pitch/yaw angles q."""
    roll, pitch, yaw = q
    cr, sr = np.cos(roll), np.sin(roll)
    cp, sp = np.cos(pitch), np.sin(pitch)
    cy, sy = np.cos(yaw), np.sin(yaw)
    Rx = np.array([[1, 0, 0], [0, cr, -sr], [0, sr, cr]])
    Ry = np.array([[cp, 0, sp], [0, 1, 0], [-sp, 0, cp]])
    Rz = np.array([[cy, -sy, 0], [sy, cy, 0], [0, 0, 1]])
    return Rx @ Ry @ Rz


def world_inertia(agent: AgentSpec, q: np.ndarray) -> np.ndarray:
    """Rotational inertia expressed in inertial axes, R diag(I_b) R^T."""
    R = rotation_matrix(q)
    return R @ np.diag(agent.body_inertia) @ R.T


def inertia_matrix(agent: AgentSpec, q: np.ndarray) -> np.ndarray:
    """6x6 generalized inertia at the given orientation."""
    M = np.zeros((6, 6))
    M[:3, :3] = agent.mass * np.eye(3)
    M[3:, 3:] = world_inertia(agent, q)
    return M


def coriolis_matrix(agent: AgentSpec, q: np.ndarray, twist: np.ndarray) -> np.ndarray:
    """6x6 velocity-coupling matrix; C @ v gives (0, omega x I_w omega)."""
    omega = np.asarray(twist, dtype=float)[3:]
    C = np.zeros((6, 6))
    C[3:, 3:] = skew(omega) @ world_inertia(agent, q)
    return C


def gravity_vector(
    agent: AgentSpec, g0: float = GRAVITY, gravity_off: bool = False
) -> np.ndarray:
    """Generalized gravity wrench (0, 0, m g0, 0, 0, 0).

    The sign convention follows the plant equation: with zero input the
    linear acceleration is -g0 on the third axis, i.e. gravity pulls down.
    """
    g = np.zeros(6)
    if not gravity_off:
        g[2] = agent.mass * g0
    return g


@dataclass(frozen=True, eq=False)
class PlantEval:
    """Inertia, velocity coupling and gravity evaluated at one state."""

    M: np.ndarray
    C: np.ndarray
    g: np.ndarray


def plant_eval(
    agent: AgentSpec,
    q: np.ndarray,
    twist: np.ndarray,
    g0: float = GRAVITY,
    gravity_off: bool = False,
) -> PlantEval:
    return PlantEval(
        M=inertia_matrix(agent, q),
        C=coriolis_matrix(agent, q, twist),
        g=gravity_vector(agent, g0, gravity_off),
    )


def forward_dynamics(
    agent: AgentSpec,
    q: np.ndarray,
    twist: np.ndarray,
    u: np.ndarray,
    g0: float = GRAVITY,
    gravity_off: bool = False,
) -> np.ndarray:
    """Generalized acceleration vdot = M^{-1} (u - C v - g).

    The rotational solve goes through a Cholesky factor of the inertial-axes
    inertia; a factorization failure means the inertia is not positive
    definite and is raised as a fatal :class:`NumericError`.
    """
    twist = np.asarray(twist, dtype=float)
    u = np.asarray(u, dtype=float)
    g = gravity_vector(agent, g0, gravity_off)
    omega = twist[3:]
    Iw = world_inertia(agent, q)
    try:
        L = np.linalg.cholesky(Iw)
    except np.linalg.LinAlgError as exc:
        raise NumericError(
            f"agent {agent.id}: rotational inertia is not positive definite") from exc
    tau = u[3:] - np.cross(omega, Iw @ omega) - g[3:]
    # Two triangular solves against the Cholesky factor.
    wdot = np.linalg.solve(L.T, np.linalg.solve(L, tau))
    out = np.empty(6)
    out[:3] = (u[:3] - g[:3]) / agent.mass
    out[3:] = wdot
    return out


# -- batched helpers used by the simulator --------------------------------


def rotations_batch(Q: np.ndarray) -> np.ndarray:
    """Stack of body-to-inertial rotations for angle rows Q with shape (N, 3)."""
    n = Q.shape[0]
    cr, sr = np.cos(Q[:, 0]), np.sin(Q[:, 0])
    cp, sp = np.cos(Q[:, 1]), np.sin(Q[:, 1])
    cy, sy = np.cos(Q[:, 2]), np.sin(Q[:, 2])
    Rx = np.zeros((n, 3, 3))
    Rx[:, 0, 0] = 1.0
    Rx[:, 1, 1] = cr
    Rx[:, 1, 2] = -sr
    Rx[:, 2, 1] = sr
    Rx[:, 2, 2] = cr
    Ry = np.zeros((n, 3, 3))
    Ry[:, 0, 0] = cp
    Ry[:, 0, 2] = sp
    Ry[:, 1, 1] = 1.0
    Ry[:, 2, 0] = -sp
    Ry[:, 2, 2] = cp
    Rz = np.zeros((n, 3, 3))
    Rz[:, 0, 0] = cy
    Rz[:, 0, 1] = -sy
    Rz[:, 1, 0] = sy
    Rz[:, 1, 1] = cy
    Rz[:, 2, 2] = 1.0
    return Rx @ Ry @ Rz


def kinetic_energies(masses: np.ndarray, inertias: np.ndarray,
                     Q: np.ndarray, V: np.ndarray) -> np.ndarray:
    """Per-agent kinetic energy 0.5 v^T M v for angle rows Q and twists V."""
    R = rotations_batch(np.asarray(Q, dtype=float))
    V = np.asarray(V, dtype=float)
    W = V[:, 3:]
    RtW = np.einsum("nji,nj->ni", R, W)
    IwW = np.einsum("nij,nj->ni", R, np.asarray(inertias, dtype=float) * RtW)
    return 0.5 * (
        np.asarray(masses, dtype=float) * np.einsum("ni,ni->n", V[:, :3], V[:, :3])
        + np.einsum("ni,ni->n", W, IwW)
    )


def accelerations_batch(
    masses: np.ndarray,
    inertias: np.ndarray,
    Q: np.ndarray,
    V: np.ndarray,
    U: np.ndarray,
    gravity: np.ndarray,
) -> tuple[np.ndarray, np.ndarray]:
    """Accelerations plus per-agent kinetic energy for all agents at once.

    Args:
        masses: (N,) masses.
        inertias: (N, 3) principal body inertias.
        Q: (N, 3) angles, V: (N, 6) velocities, U: (N, 6) inputs.
        gravity: (N, 6) generalized gravity wrenches.

    Returns:
        (N, 6) accelerations and (N,) kinetic energies 0.5 v^T M v.
    """
    R = rotations_batch(Q)
    W = V[:, 3:]
    # I_w omega via the congruence R diag(I_b) R^T without forming it.
    RtW = np.einsum("nji,nj->ni", R, W)
    IwW = np.einsum("nij,nj->ni", R, inertias * RtW)
    tau = U[:, 3:] - np.cross(W, IwW) - gravity[:, 3:]
    wdot = np.einsum("nij,nj->ni", R, np.einsum("nji,nj->ni", R, tau) / inertias)
    out = np.empty_like(V)
    out[:, :3] = (U[:, :3] - gravity[:, :3]) / masses[:, None]
    out[:, 3:] = wdot
    kinetic = 0.5 * (
        masses * np.einsum("ni,ni->n", V[:, :3], V[:, :3])
        + np.einsum("ni,ni->n", W, IwW)
    )
    return out, kinetic
