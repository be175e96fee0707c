"""Decentralized control law and the Lyapunov-like monitor function.

Each agent applies velocity damping, gravity compensation, and the pulled-back
gradient of the potentials it participates in:

    u_i = -k_i v_i + g_i - J_i^{-T} (grad_i phi_i + sum_j grad_i phi_j)

with the sum over agents j currently holding i in sensing range.  The
controller is deliberately cut off from global information: it accepts its
own state, its own potential gradient, and per-neighbor gradient
contributions, and nothing else.  In particular it never sees the inertia
or Coriolis matrices; the only model knowledge it uses is the gravity
vector and its own gain.

Neighbor contributions are folded in ascending agent-id order (own term
included at its own id), which makes the result independent of the order
the caller happens to list them in.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping

import numpy as np

from .dynamics import GRAVITY, gravity_vector, kinetic_energies
from .errors import SingularPoseError
from .kinematics import EPS_SINGULAR, angular_rate_inverse_batch, jacobian
from .model import AgentSpec, Scenario
from .potential import PotentialModel, WorldPotential


@dataclass(eq=False)
class ControlEval:
    """Input of one agent, split into the three law terms.

    ``u`` equals the exact float sum damping + gravity + gradient.
    """

    u: np.ndarray
    terms: Mapping[str, np.ndarray]


def pullback_gradient(q: np.ndarray, grad: np.ndarray,
                      eps_sing: float = EPS_SINGULAR) -> np.ndarray:
    """Map a pose-space gradient to a generalized force, J^{-T} grad.

    The linear block passes through unchanged; the angular block goes
    through the transposed inverse rate matrix.

    Raises:
        SingularPoseError: pitch within ``eps_sing`` of +-pi/2.
    """
    ev = jacobian(q, eps_sing)
    if not ev.regular:
        raise SingularPoseError(
            f"pitch {q[1]:.6f} rad is within {eps_sing} of the rate-matrix singularity")
    out = np.empty(6)
    out[:3] = grad[:3]
    out[3:] = ev.J_inv[3:, 3:].T @ grad[3:]
    return out


def control_input(
    agent: AgentSpec,
    x: np.ndarray,
    v: np.ndarray,
    grad_own: np.ndarray,
    neighbor_grads: Iterable[tuple[int, np.ndarray]],
    *,
    g0: float = GRAVITY,
    gravity_off: bool = False,
    eps_sing: float = EPS_SINGULAR,
) -> ControlEval:
    """Control input of one agent from local information only.

    ``neighbor_grads`` holds (neighbor id, contribution) pairs, each
    contribution being the neighbor's potential gradient taken with respect
    to this agent's pose.  Pairs may arrive in any order; they are folded
    in ascending id together with the agent's own gradient, so the output
    is invariant under permutation of the list.

    Raises:
        SingularPoseError: the pose sits at the rate-matrix singularity.
    """
    x = np.asarray(x, dtype=float)
    v = np.asarray(v, dtype=float)
    pairs = [(agent.id, np.asarray(grad_own, dtype=float))]
    pairs.extend((int(j), np.asarray(g, dtype=float)) for j, g in neighbor_grads)
    pairs.sort(key=lambda pair: pair[0])
    total = np.zeros(6)
    for _, g in pairs:
        total = total + g

    damping = -agent.gain * v
    gravity = gravity_vector(agent, g0=g0, gravity_off=gravity_off)
    gradient = -pullback_gradient(x[3:], total, eps_sing)
    u = damping + gravity + gradient
    return ControlEval(u=u, terms={"damping": damping, "gravity": gravity,
                                   "gradient": gradient})


def fold_gradients(world: WorldPotential, order: np.ndarray) -> np.ndarray:
    """Per-agent total gradient grad_i(phi_i + sum of neighbor phi_j).

    Rows of the gradient grid are accumulated in ascending agent-id order
    (``order`` holds the row indices sorted by id), the same fold
    :func:`control_input` applies to its contribution list.
    """
    n = world.grad.shape[0]
    mask = world.neighbor_mask.copy()
    np.fill_diagonal(mask, True)
    total = np.zeros((n, 6))
    for j in order:
        total += np.where(mask[j][:, None], world.grad[j], 0.0)
    return total


def control_inputs_batch(
    X: np.ndarray,
    V: np.ndarray,
    world: WorldPotential,
    gains: np.ndarray,
    gravity: np.ndarray,
    order: np.ndarray,
    eps_sing: float = EPS_SINGULAR,
) -> np.ndarray:
    """All control inputs at once; the simulator's hot path.

    ``world`` carries the gradient grid and the sensing graph, ``gravity``
    the per-agent constant gravity wrench, ``order`` the agent rows sorted
    by ascending id so the contribution fold matches :func:`control_input`.

    Raises:
        SingularPoseError: any pose at the rate-matrix singularity.
    """
    total = fold_gradients(world, order)
    Jq_inv = angular_rate_inverse_batch(X[:, 3:], eps_sing)
    U = -gains[:, None] * V + gravity
    U[:, :3] -= total[:, :3]
    U[:, 3:] -= np.einsum("nji,nj->ni", Jq_inv, total[:, 3:])
    return U


@dataclass(eq=False)
class LyapunovEval:
    """Total potential-plus-kinetic energy with per-agent breakdown."""

    total: float
    per_agent: np.ndarray
    potential: np.ndarray
    kinetic: np.ndarray


def lyapunov_from_parts(phi: np.ndarray, kinetic: np.ndarray) -> LyapunovEval:
    per_agent = phi + kinetic
    return LyapunovEval(total=float(per_agent.sum()), per_agent=per_agent,
                        potential=np.asarray(phi, dtype=float),
                        kinetic=np.asarray(kinetic, dtype=float))


def lyapunov(scenario: Scenario, X: np.ndarray, V: np.ndarray,
             model: PotentialModel | None = None) -> LyapunovEval:
    """Monitor function L = sum_i (phi_i + kinetic_i) at one state.

    Raises:
        PotentialBlowupError: any agent's safety product at or below floor.
    """
    X = np.asarray(X, dtype=float)
    V = np.asarray(V, dtype=float)
    if model is None:
        model = PotentialModel(scenario)
    world = model.evaluate(X)
    ke = kinetic_energies(scenario.masses, scenario.inertias, X[:, 3:], V)
    return lyapunov_from_parts(world.phi, ke)
