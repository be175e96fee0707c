"""Formation potential: goal cost, barrier factors, composition, gradients.

Each agent carries a scalar potential built from two ingredients:

* ``gamma``: the squared offset error summed over the agent's formation
  edges.  Zero exactly at the desired relative configuration.
* ``beta``: a product of smooth factors in [0, 1], one per safety condition
  (workspace containment, pitch margin, clearance from every other agent and
  obstacle, and staying in sensing range of every formation neighbor).  Any
  factor hits zero exactly when its condition is violated.

The two are composed through the navigation-style ratio
``nu = gamma / (gamma**kappa + beta)**(1/kappa)`` which lives in [0, 1) while
beta is positive, followed by a logarithmic barrier ``phi = -log(1 - nu)``.
The log keeps phi at zero on the goal set, sends it to infinity as beta
collapses, and keeps gradient magnitudes on the scale of logarithmic
derivatives of the factors instead of the factors' reciprocals, which is
what makes fixed-step integration of cluttered scenes practical.

Gradients are exact:
``grad phi = (beta * grad gamma - (gamma/kappa) * grad beta) / (A * D)``
with ``A = gamma**kappa + beta`` and ``D = A**(1/kappa) - gamma`` evaluated
in a cancellation-free form.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal, NamedTuple

import numpy as np

from .errors import PotentialBlowupError
from .model import Scenario

DEFAULT_KAPPA = 4.0

#: beta at or below this is treated as a blow-up of the potential.
EPS_BETA = 1e-12

BumpKind = Literal["agent", "obstacle", "connectivity"]


def smoothstep(t):
    """Quintic smoothstep 6t^5 - 15t^4 + 10t^3, clamped to [0, 1].

    Value, slope and curvature are all zero at t = 0 and (1, 0, 0) at t = 1,
    so both joins of the piecewise factors below are twice continuously
    differentiable.
    """
    t = np.clip(t, 0.0, 1.0)
    return t * t * t * (t * (6.0 * t - 15.0) + 10.0)


def smoothstep_d1(t):
    """First derivative of :func:`smoothstep`; 30 t^2 (1 - t)^2 inside."""
    t = np.clip(t, 0.0, 1.0)
    u = 1.0 - t
    return 30.0 * t * t * u * u


def smoothstep_d2(t):
    """Second derivative of :func:`smoothstep`; 60 t (2t - 1)(t - 1) inside."""
    t = np.clip(t, 0.0, 1.0)
    return 60.0 * t * (2.0 * t - 1.0) * (t - 1.0)


@dataclass(frozen=True)
class BumpSpec:
    """One-sided smooth ramp from 0 up to 1 over [0, knot].

    ``kind`` records which squared-margin argument the ramp is meant for:
    clearance from agents or obstacles (argument nonnegative inside the safe
    set) or sensing-range slack of a formation neighbor (argument negative
    once the neighbor is out of range, where the ramp sits at zero).
    """

    kind: BumpKind
    knot: float

    def __post_init__(self) -> None:
        if not self.knot > 0:
            raise ValueError(f"bump knot must be positive, got {self.knot}")


class BumpValue(NamedTuple):
    value: float
    d1: float
    d2: float


def bump(spec: BumpSpec, x: float) -> BumpValue:
    """Evaluate a ramp factor with its first two derivatives in x.

    Constant 0 below x = 0, constant 1 above the knot, strictly increasing
    in between; both joins are curvature-free.
    """
    t = x / spec.knot
    return BumpValue(
        value=float(smoothstep(t)),
        d1=float(smoothstep_d1(t)) / spec.knot,
        d2=float(smoothstep_d2(t)) / (spec.knot * spec.knot),
    )


def eta(kind: BumpKind, distance: float, bound: float) -> float:
    """Squared-margin argument fed to the matching bump factor.

    For ``agent`` and ``obstacle`` the bound is the contact distance and the
    margin grows with separation; for ``connectivity`` the bound is the
    sensing range and the margin shrinks to zero as the link stretches.
    """
    if kind == "connectivity":
        return bound * bound - distance * distance
    return distance * distance - bound * bound


def b_workspace(p_sq: float, r_w: float, r_i: float) -> float:
    """Containment factor (1 - ||p||^2 / (r_w - r_i)^2)^2.

    Equals 1 at the center and 0 exactly when the body touches the boundary.
    """
    shrunk = (r_w - r_i) ** 2
    y = 1.0 - p_sq / shrunk
    return y * y


def b_singularity(theta: float) -> float:
    """Pitch-margin factor cos(theta)^2; vanishes at the +-pi/2 singularity."""
    c = np.cos(theta)
    return float(c * c)


def gamma_edge(x_i: np.ndarray, x_j: np.ndarray, x_des: np.ndarray) -> float:
    """Squared offset error ||x_i - x_j - x_des||^2 for one oriented edge."""
    r = np.asarray(x_i, float) - np.asarray(x_j, float) - np.asarray(x_des, float)
    return float(r @ r)


def _compose(gamma: float, beta: float, kappa: float) -> tuple[float, float, float]:
    """Barrier composition; returns (phi, A, D) with A, D as in the module doc.

    D is computed through expm1/log1p when gamma**kappa dominates beta, the
    regime where the naive root-minus-gamma difference loses every digit.
    """
    if gamma == 0.0:
        d = beta ** (1.0 / kappa)
        return 0.0, beta, d
    gk = gamma**kappa
    a = gk + beta
    if gk <= beta:
        d = a ** (1.0 / kappa) - gamma
    else:
        d = gamma * np.expm1(np.log1p(beta / gk) / kappa)
    if not (d > 0.0 and np.isfinite(d)):
        raise PotentialBlowupError(
            f"potential overflow at gamma={gamma:.3e}, beta={beta:.3e}")
    phi = float(np.log(a) / kappa - np.log(d))
    return phi, a, d


@dataclass(eq=False)
class PotentialEval:
    """Potential of one agent with everything its controller publishes.

    ``grad_wrt`` maps the index of every other involved agent to the
    gradient of this agent's potential with respect to that agent's pose
    vector; those are exactly the contributions sent to the neighbors.
    """

    value: float
    gamma: float
    beta: float
    grad_own: np.ndarray
    grad_wrt: dict[int, np.ndarray]
    factors: tuple[tuple[str, float], ...]


@dataclass(eq=False)
class WorldPotential:
    """Batched evaluation over all agents at one configuration.

    ``grad[i, k]`` is the gradient of agent i's potential with respect to
    agent k's pose; rows are zero wherever agent k cannot influence agent i.
    ``neighbor_mask[i, j]`` marks the undirected sensing graph (within both
    ranges, boundary included).
    """

    gamma: np.ndarray
    beta: np.ndarray
    phi: np.ndarray
    grad: np.ndarray
    neighbor_mask: np.ndarray
    dist2: np.ndarray
    odist2: np.ndarray | None


class PotentialModel:
    """Potential evaluator bound to one scenario.

    Precomputes every knot and offset so repeated evaluations only touch
    state-dependent quantities.  ``evaluate`` is the vectorized path the
    simulator uses; ``phi_agent``/``grad_phi`` walk the same formulas one
    agent at a time and serve as the readable reference.
    """

    def __init__(self, scenario: Scenario, kappa: float | None = None,
                 eps_beta: float | None = None):
        self.scenario = scenario
        num = scenario.numerics
        self.kappa = float(num.kappa if kappa is None else kappa)
        self.eps_beta = float(num.eps_beta if eps_beta is None else eps_beta)
        if self.kappa < 1.0:
            raise ValueError(f"kappa must be >= 1, got {self.kappa}")

        n = scenario.n_agents
        self.n = n
        self.radii = scenario.radii
        self.sensing = scenario.sensing
        self.d2 = self.sensing**2
        self.knot_w = (scenario.workspace.radius - self.radii) ** 2

        rsum = self.radii[:, None] + self.radii[None, :]
        self.dl2_a = rsum**2
        self.knot_a = self.d2[:, None] - self.dl2_a
        off = ~np.eye(n, dtype=bool)
        if np.any(self.knot_a[off] <= 0):
            raise ValueError("sensing ranges must exceed contact distances")
        np.fill_diagonal(self.knot_a, 1.0)  # diagonal never used

        if scenario.obstacles:
            self.obstacle_centers = np.array([o.center for o in scenario.obstacles])
            orad = np.array([o.radius for o in scenario.obstacles])
            self.dl2_o = (self.radii[:, None] + orad[None, :]) ** 2
            self.knot_o = self.d2[:, None] - self.dl2_o
            if np.any(self.knot_o <= 0):
                raise ValueError("sensing ranges must exceed obstacle contact distances")
        else:
            self.obstacle_centers = None
            self.dl2_o = None
            self.knot_o = None

        # Oriented offsets on an (N, N, 6) grid: xdes[i, j] is the target of
        # x_i - x_j, antisymmetric by construction.
        self.form_mask = np.zeros((n, n), dtype=bool)
        self.xdes = np.zeros((n, n, 6))
        idx = scenario.index_of
        for e in scenario.formation.edges:
            ia, ib = idx[e.i], idx[e.j]
            x = e.offset_for(e.i, e.j)
            self.form_mask[ia, ib] = True
            self.form_mask[ib, ia] = True
            self.xdes[ia, ib] = x
            self.xdes[ib, ia] = -x

        dmin = np.minimum(self.sensing[:, None], self.sensing[None, :])
        self.sense2_pair = dmin**2
        self._off = off

    # -- reference per-agent path -----------------------------------------

    def gamma_agent(self, i: int, X: np.ndarray) -> float:
        """Squared offset error summed over agent i's formation edges."""
        total = 0.0
        for j in np.flatnonzero(self.form_mask[i]):
            total += gamma_edge(X[i], X[j], self.xdes[i, j])
        return total

    def beta_agent(self, i: int, X: np.ndarray) -> "BetaEval":
        """Safety product of agent i with the full named factor list."""
        P = X[:, :3]
        factors: list[tuple[str, float]] = []
        p_sq = float(P[i] @ P[i])
        factors.append(("workspace", b_workspace(
            p_sq, self.scenario.workspace.radius, self.radii[i])))
        factors.append(("singularity", b_singularity(float(X[i, 4]))))
        ids = self.scenario.ids
        for j in range(self.n):
            if j == i:
                continue
            dist = float(np.linalg.norm(P[i] - P[j]))
            spec = BumpSpec("agent", self.knot_a[i, j])
            val = bump(spec, eta("agent", dist, float(np.sqrt(self.dl2_a[i, j])))).value
            factors.append((f"agent:{ids[j]}", val))
        if self.obstacle_centers is not None:
            for z in range(self.obstacle_centers.shape[0]):
                dist = float(np.linalg.norm(P[i] - self.obstacle_centers[z]))
                spec = BumpSpec("obstacle", self.knot_o[i, z])
                val = bump(spec, eta("obstacle", dist, float(np.sqrt(self.dl2_o[i, z])))).value
                factors.append((f"obstacle:{z}", val))
        for j in np.flatnonzero(self.form_mask[i]):
            dist = float(np.linalg.norm(P[i] - P[j]))
            spec = BumpSpec("connectivity", self.knot_a[i, j])
            val = bump(spec, eta("connectivity", dist, float(self.sensing[i]))).value
            factors.append((f"connectivity:{ids[j]}", val))
        value = 1.0
        for _, f in factors:
            value *= f
        return BetaEval(value=value, factors=tuple(factors))

    def phi_agent(self, i: int, X: np.ndarray) -> PotentialEval:
        """Potential of agent i with own and cross gradients.

        Raises:
            PotentialBlowupError: when agent i's safety product is at or
                below the floor, i.e. the state is outside the free set.
        """
        X = np.asarray(X, dtype=float)
        gamma = self.gamma_agent(i, X)
        be = self.beta_agent(i, X)
        if be.value <= self.eps_beta:
            raise PotentialBlowupError(
                f"agent index {i}: beta = {be.value:.3e} at or below floor")
        phi, a, dd = _compose(gamma, be.value, self.kappa)
        scale = 1.0 / (a * dd)

        grad_gamma_own = np.zeros(6)
        grad_gamma_wrt: dict[int, np.ndarray] = {}
        for j in np.flatnonzero(self.form_mask[i]):
            res = X[i] - X[j] - self.xdes[i, j]
            grad_gamma_own += 2.0 * res
            grad_gamma_wrt[int(j)] = -2.0 * res

        grad_beta_own, grad_beta_wrt = self._beta_gradients(i, X, be.value)

        grad_own = scale * (be.value * grad_gamma_own
                            - (gamma / self.kappa) * grad_beta_own)
        involved = set(grad_gamma_wrt) | set(grad_beta_wrt)
        grad_wrt = {}
        for j in involved:
            gg = grad_gamma_wrt.get(j, np.zeros(6))
            gb = grad_beta_wrt.get(j, np.zeros(6))
            grad_wrt[j] = scale * (be.value * gg - (gamma / self.kappa) * gb)
        return PotentialEval(value=phi, gamma=gamma, beta=be.value,
                             grad_own=grad_own, grad_wrt=grad_wrt,
                             factors=be.factors)

    def _beta_gradients(
        self, i: int, X: np.ndarray, beta_i: float
    ) -> tuple[np.ndarray, dict[int, np.ndarray]]:
        """Gradient of agent i's safety product, own pose and cross terms.

        Every factor is bounded by the product from below here (all factors
        sit in (0, 1]), so dividing the product by one factor is a safe way
        to form the leave-one-out products.
        """
        P = X[:, :3]
        own = np.zeros(6)
        wrt: dict[int, np.ndarray] = {}

        shrunk = self.knot_w[i]
        y = 1.0 - float(P[i] @ P[i]) / shrunk
        fw = y * y
        own[:3] += beta_i / fw * (2.0 * y * (-1.0 / shrunk)) * 2.0 * P[i]

        theta = float(X[i, 4])
        fj = b_singularity(theta)
        own[4] += beta_i / fj * (-np.sin(2.0 * theta))

        for j in range(self.n):
            if j == i:
                continue
            diff = P[i] - P[j]
            dist2 = float(diff @ diff)
            e_a = dist2 - self.dl2_a[i, j]
            t = e_a / self.knot_a[i, j]
            if 0.0 < t < 1.0:
                f = float(smoothstep(t))
                df = float(smoothstep_d1(t)) / self.knot_a[i, j]
                coeff = beta_i / f * df
                own[:3] += coeff * 2.0 * diff
                wrt.setdefault(int(j), np.zeros(6))[:3] += coeff * (-2.0 * diff)
            if self.form_mask[i, j]:
                e_c = self.d2[i] - dist2
                t = e_c / self.knot_a[i, j]
                if 0.0 < t < 1.0:
                    f = float(smoothstep(t))
                    df = float(smoothstep_d1(t)) / self.knot_a[i, j]
                    coeff = beta_i / f * df
                    own[:3] += coeff * (-2.0 * diff)
                    wrt.setdefault(int(j), np.zeros(6))[:3] += coeff * 2.0 * diff

        if self.obstacle_centers is not None:
            for z in range(self.obstacle_centers.shape[0]):
                diff = P[i] - self.obstacle_centers[z]
                e_o = float(diff @ diff) - self.dl2_o[i, z]
                t = e_o / self.knot_o[i, z]
                if 0.0 < t < 1.0:
                    f = float(smoothstep(t))
                    df = float(smoothstep_d1(t)) / self.knot_o[i, z]
                    own[:3] += beta_i / f * df * 2.0 * diff
        return own, wrt

    def grad_phi(self, i: int, X: np.ndarray, wrt: int) -> np.ndarray:
        """Gradient of agent i's potential with respect to agent ``wrt``.

        Identically zero whenever ``wrt`` is neither agent i itself, within
        clearance interaction range, nor a formation neighbor.
        """
        ev = self.phi_agent(i, X)
        if wrt == i:
            return ev.grad_own
        return ev.grad_wrt.get(wrt, np.zeros(6))

    # -- batched path ------------------------------------------------------

    def evaluate(self, X: np.ndarray) -> WorldPotential:
        """Evaluate potentials and the full gradient grid at configuration X.

        Mathematically identical to calling :meth:`phi_agent` for every
        agent; kept vectorized because the simulator calls this once per
        integration stage.

        Raises:
            PotentialBlowupError: when any agent's safety product is at or
                below the floor.  The message names the agent rows.
        """
        X = np.asarray(X, dtype=float)
        n = self.n
        P = X[:, :3]
        theta = X[:, 4]

        diff = P[:, None, :] - P[None, :, :]
        dist2 = np.einsum("ijk,ijk->ij", diff, diff)

        p_sq = np.einsum("ni,ni->n", P, P)
        yw = 1.0 - p_sq / self.knot_w
        bw = yw * yw
        bj = np.cos(theta) ** 2

        t_a = (dist2 - self.dl2_a) / self.knot_a
        s_a = smoothstep(t_a)
        ds_a = smoothstep_d1(t_a) / self.knot_a
        np.fill_diagonal(s_a, 1.0)
        np.fill_diagonal(ds_a, 0.0)

        t_c = (self.d2[:, None] - dist2) / self.knot_a
        s_c = np.where(self.form_mask, smoothstep(t_c), 1.0)
        ds_c = np.where(self.form_mask, smoothstep_d1(t_c) / self.knot_a, 0.0)

        if self.obstacle_centers is not None:
            odiff = P[:, None, :] - self.obstacle_centers[None, :, :]
            odist2 = np.einsum("ijk,ijk->ij", odiff, odiff)
            t_o = (odist2 - self.dl2_o) / self.knot_o
            s_o = smoothstep(t_o)
            ds_o = smoothstep_d1(t_o) / self.knot_o
            prod_o = np.prod(s_o, axis=1)
        else:
            odiff = odist2 = None
            prod_o = np.ones(n)

        beta = bw * bj * np.prod(s_a, axis=1) * prod_o * np.prod(s_c, axis=1)
        if np.any(beta <= self.eps_beta) or not np.all(np.isfinite(beta)):
            rows = np.flatnonzero(~(beta > self.eps_beta)).tolist()
            raise PotentialBlowupError(
                f"safety product at or below floor for agent rows {rows}")

        # Formation cost and its gradients.
        res = np.where(self.form_mask[:, :, None], X[:, None, :] - X[None, :, :] - self.xdes, 0.0)
        gamma = np.einsum("ijk,ijk->i", res, res)
        grad_gamma_own = 2.0 * res.sum(axis=1)
        grad_gamma_off = -2.0 * res

        # Safety-product gradients through logarithmic derivatives; every
        # factor is >= beta > floor here, so the divisions are safe.
        la = ds_a / s_a
        lc = ds_c / s_c
        own_p = (
            (-2.0 / (yw * self.knot_w))[:, None] * 2.0 * P
            + 2.0 * np.einsum("ij,ijk->ik", la - lc, diff)
        )
        if odiff is not None:
            own_p += 2.0 * np.einsum("ij,ijk->ik", ds_o / s_o, odiff)
        grad_beta_own = np.zeros((n, 6))
        grad_beta_own[:, :3] = beta[:, None] * own_p
        grad_beta_own[:, 4] = beta * (-np.sin(2.0 * theta) / bj)
        grad_beta_off = np.zeros((n, n, 6))
        grad_beta_off[:, :, :3] = (beta[:, None, None]
                                   * (2.0 * (lc - la))[:, :, None] * diff)

        phi = np.empty(n)
        scale = np.empty(n)
        for i in range(n):
            phi_i, a_i, d_i = _compose(float(gamma[i]), float(beta[i]), self.kappa)
            phi[i] = phi_i
            scale[i] = 1.0 / (a_i * d_i)

        G = scale[:, None, None] * (
            beta[:, None, None] * grad_gamma_off
            - (gamma / self.kappa)[:, None, None] * grad_beta_off
        )
        G[np.arange(n), np.arange(n)] = scale[:, None] * (
            beta[:, None] * grad_gamma_own
            - (gamma / self.kappa)[:, None] * grad_beta_own
        )

        neighbor_mask = (dist2 <= self.sense2_pair) & self._off
        return WorldPotential(gamma=gamma, beta=beta, phi=phi, grad=G,
                             neighbor_mask=neighbor_mask, dist2=dist2,
                             odist2=odist2)


@dataclass(frozen=True)
class BetaEval:
    """Safety product value together with its named factors."""

    value: float
    factors: tuple[tuple[str, float], ...]
