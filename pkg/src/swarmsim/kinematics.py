"""Rate kinematics for roll/pitch/yaw parameterized rigid bodies.

The generalized velocity of one body stacks the inertial linear velocity on
top of the inertial angular velocity.  The linear part equals the position
rate directly; the angular part relates to the angle rates through a 3x3
matrix whose determinant is cos(pitch), so the map degenerates as the pitch
approaches +-pi/2.  The full 6x6 map is block diagonal with an identity
block for the translational part.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import SingularPoseError

#: Poses with |cos(pitch)| at or below this are treated as singular.
EPS_SINGULAR = 1e-6


def angular_rate_matrix(q: np.ndarray) -> np.ndarray:
    """3x3 map from angle rates (roll', pitch', yaw') to angular velocity."""
    roll, pitch, _ = q
    cr, sr = np.cos(roll), np.sin(roll)
    cp, sp = np.cos(pitch), np.sin(pitch)
    return np.array([
        [1.0, 0.0, sp],
        [0.0, cr, -cp * sr],
        [0.0, sr, cr * cp],
    ])


def angular_rate_matrix_inverse(q: np.ndarray) -> np.ndarray:
    """Closed-form inverse of :func:`angular_rate_matrix`.

    Written out explicitly instead of calling a generic solver so the only
    ill-conditioned entries are the two that genuinely carry the 1/cos(pitch)
    divergence.
    """
    roll, pitch, _ = q
    cr, sr = np.cos(roll), np.sin(roll)
    cp = np.cos(pitch)
    tp = np.tan(pitch)
    return np.array([
        [1.0, sr * tp, -cr * tp],
        [0.0, cr, sr],
        [0.0, -sr / cp, cr / cp],
    ])


@dataclass(frozen=True, eq=False)
class JacobianEval:
    """Rate Jacobian at one pose.

    ``J_inv`` is withheld (None) when ``regular`` is false; downstream code
    must treat such poses as fatal rather than invert a nearly rank-deficient
    matrix.
    """

    J: np.ndarray
    J_inv: np.ndarray | None
    det: float
    regular: bool


def jacobian(q: np.ndarray, eps_sing: float = EPS_SINGULAR) -> JacobianEval:
    """Evaluate the 6x6 rate Jacobian and, if regular, its inverse.

    The determinant is returned as cos(pitch) itself; that is the exact
    symbolic value of the determinant, not a numerical estimate.
    """
    q = np.asarray(q, dtype=float)
    det = float(np.cos(q[1]))
    J = np.eye(6)
    J[3:, 3:] = angular_rate_matrix(q)
    regular = abs(det) > eps_sing
    J_inv = None
    if regular:
        J_inv = np.eye(6)
        J_inv[3:, 3:] = angular_rate_matrix_inverse(q)
    return JacobianEval(J=J, J_inv=J_inv, det=det, regular=regular)


def body_rates_to_state_rates(
    q: np.ndarray, twist: np.ndarray, eps_sing: float = EPS_SINGULAR
) -> np.ndarray:
    """Pose rate (position and angle rates) produced by a generalized velocity.

    Raises:
        SingularPoseError: if |cos(pitch)| <= eps_sing.
    """
    twist = np.asarray(twist, dtype=float)
    ev = jacobian(q, eps_sing)
    if not ev.regular:
        raise SingularPoseError(
            f"pitch {q[1]:.6f} leaves |cos(pitch)| = {abs(ev.det):.2e} "
            f"at or below {eps_sing:.2e}")
    return ev.J_inv @ twist


# -- batched helpers used by the simulator --------------------------------


def angular_rate_inverse_batch(
    Q: np.ndarray, eps_sing: float = EPS_SINGULAR
) -> np.ndarray:
    """Stack of 3x3 inverse rate matrices for poses Q with shape (N, 3).

    Raises:
        SingularPoseError: if any pose is within eps_sing of the pitch
            singularity; the message names the offending rows.
    """
    roll = Q[:, 0]
    pitch = Q[:, 1]
    cp = np.cos(pitch)
    bad = np.abs(cp) <= eps_sing
    if np.any(bad):
        raise SingularPoseError(
            f"singular pitch at agent rows {np.flatnonzero(bad).tolist()}")
    cr, sr = np.cos(roll), np.sin(roll)
    tp = np.tan(pitch)
    n = Q.shape[0]
    out = np.zeros((n, 3, 3))
    out[:, 0, 0] = 1.0
    out[:, 0, 1] = sr * tp
    out[:, 0, 2] = -cr * tp
    out[:, 1, 1] = cr
    out[:, 1, 2] = sr
    out[:, 2, 1] = -sr / cp
    out[:, 2, 2] = cr / cp
    return out


def state_rates_batch(
    X: np.ndarray, V: np.ndarray, eps_sing: float = EPS_SINGULAR
) -> np.ndarray:
    """Pose rates for all agents at once; X and V have shape (N, 6)."""
    Jq_inv = angular_rate_inverse_batch(X[:, 3:], eps_sing)
    out = np.empty_like(X)
    out[:, :3] = V[:, :3]
    out[:, 3:] = np.einsum("nij,nj->ni", Jq_inv, V[:, 3:])
    return out
