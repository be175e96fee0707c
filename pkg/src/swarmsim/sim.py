"""Fixed-step closed-loop integration of all agents with safety monitors.

The stepper advances the coupled pose/twist dynamics of every agent under
the decentralized control law, evaluating the potential once per step for
monitoring and reusing that evaluation as the first integrator stage.  Six
conditions are checked on every step of the grid, not just on logged rows:
formation residuals (tracked), inter-agent clearance, obstacle clearance,
workspace containment, sensing-range maintenance of every initial formation
edge, and the pitch margin.  The Lyapunov-like monitor flags any per-step
increase beyond the integrator slack instead of aborting.

Everything is single-threaded and deterministic: identical scenarios give
bit-identical trajectories.
"""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .control import control_inputs_batch, fold_gradients
from .dynamics import accelerations_batch, gravity_vector
from .errors import (NumericError, PotentialBlowupError, ScenarioError,
                     SingularPoseError)
from .kinematics import state_rates_batch
from .model import NumericsConfig, Scenario, validate_scenario
from .potential import PotentialModel, WorldPotential

__all__ = ["NumericsConfig", "Verdict", "TrajectoryLog", "Simulator", "simulate"]

log = logging.getLogger(__name__)

#: net gradient below this while any single contribution exceeds the term
#: tolerance marks a suspicious critical point (cancellation away from goal).
CRIT_GRAD_TOL = 1e-9
CRIT_TERM_TOL = 1e-6


@dataclass(frozen=True)
class Verdict:
    """Outcome of a run; set exactly once.

    ``status`` is one of ``converged`` (residuals and speeds below the
    configured thresholds at the horizon), ``running`` (horizon reached,
    still in motion) or ``safety-violation`` (monitoring or a potential /
    kinematics failure stopped the run; ``kind``, ``t``, ``agents`` and
    ``detail`` say what, when and who).
    """

    status: str
    kind: str | None = None
    t: float | None = None
    agents: tuple[int, ...] = ()
    detail: str = ""

    def __str__(self) -> str:
        if self.status != "safety-violation":
            return self.status
        who = f" agents={list(self.agents)}" if self.agents else ""
        return f"safety-violation[{self.kind}] t={self.t:.6g}{who} {self.detail}".rstrip()


@dataclass(eq=False)
class TrajectoryLog:
    """Everything a run produced.

    Thinned full-state rows (every ``log_every`` steps plus the first and
    last) carry poses, twists, inputs and per-agent potential data; the
    ``series_*`` arrays carry the monitor quantities on every step of the
    integration grid, which is what the safety and Lyapunov checks use.
    """

    agent_ids: tuple[int, ...]
    edge_ids: tuple[tuple[int, int], ...]
    dt: float
    verdict: Verdict

    t: np.ndarray
    X: np.ndarray
    V: np.ndarray
    U: np.ndarray
    gamma: np.ndarray
    beta: np.ndarray
    L: np.ndarray
    min_dist_agents: np.ndarray
    min_dist_obstacles: np.ndarray
    max_reach: np.ndarray
    max_pitch: np.ndarray
    edge_dist: np.ndarray

    series_t: np.ndarray
    series_gamma: np.ndarray
    series_beta: np.ndarray
    series_L: np.ndarray
    series_min_dist_agents: np.ndarray
    series_min_dist_obstacles: np.ndarray
    series_max_reach: np.ndarray
    series_max_pitch: np.ndarray
    series_edge_dist: np.ndarray

    steps_taken: int
    lyap_increase_count: int
    lyap_max_excess: float
    lyap_total_increase: float
    critical_point_steps: int
    critical_point_first_t: float | None
    wall_time: float

    @property
    def final_state(self) -> tuple[np.ndarray, np.ndarray]:
        return self.X[-1], self.V[-1]


@dataclass(eq=False)
class StepAux:
    """Stage-one evaluation of a step, shared by monitors and integrator."""

    world: WorldPotential
    U: np.ndarray
    ke: np.ndarray
    xdot: np.ndarray
    vdot: np.ndarray
    total_grad: np.ndarray


class Simulator:
    """Closed-loop integrator bound to one scenario.

    ``input_override`` replaces the control law with an arbitrary callable
    (t, X, V) -> U while keeping dynamics, monitoring and logging intact;
    used for open-loop and free-motion checks.
    """

    def __init__(self, scenario: Scenario,
                 model: PotentialModel | None = None,
                 input_override: Callable[[float, np.ndarray, np.ndarray], np.ndarray] | None = None):
        self.scenario = scenario
        self.num = scenario.numerics
        self.pot = model if model is not None else PotentialModel(scenario)
        self.input_override = input_override

        self.masses = scenario.masses
        self.inertias = scenario.inertias
        self.gains = scenario.gains
        self.radii = scenario.radii
        self.gravity = np.array([
            gravity_vector(a, g0=self.num.g0, gravity_off=self.num.gravity_off)
            for a in scenario.agents])
        self.order = np.argsort(np.array(scenario.ids), kind="stable")

        self.edge_pairs = scenario.edge_index_pairs
        self._edge_rows = np.array([p[0] for p in self.edge_pairs], dtype=int)
        self._edge_cols = np.array([p[1] for p in self.edge_pairs], dtype=int)
        sensing = scenario.sensing
        self._edge_range = np.minimum(sensing[self._edge_rows], sensing[self._edge_cols])

        n = scenario.n_agents
        rsum = self.radii[:, None] + self.radii[None, :]
        self._contact2 = rsum**2
        self._offdiag = ~np.eye(n, dtype=bool)
        if scenario.obstacles:
            orad = np.array([o.radius for o in scenario.obstacles])
            self._ocontact2 = (self.radii[:, None] + orad[None, :]) ** 2
        else:
            self._ocontact2 = None

    # -- derivatives -------------------------------------------------------

    def _control(self, t: float, X: np.ndarray, V: np.ndarray,
                 world: WorldPotential) -> np.ndarray:
        if self.input_override is not None:
            return np.asarray(self.input_override(t, X, V), dtype=float)
        return control_inputs_batch(X, V, world, self.gains, self.gravity,
                                    self.order, self.num.eps_sing)

    def _derivs(self, t: float, X: np.ndarray, V: np.ndarray,
                U: np.ndarray | None = None) -> tuple[np.ndarray, np.ndarray]:
        """Closed-loop state derivative; with U given, the input is held."""
        if U is None:
            world = self.pot.evaluate(X)
            U = self._control(t, X, V, world)
        xdot = state_rates_batch(X, V, self.num.eps_sing)
        vdot, _ = accelerations_batch(self.masses, self.inertias, X[:, 3:],
                                      V, U, self.gravity)
        return xdot, vdot

    def _eval_full(self, t: float, X: np.ndarray, V: np.ndarray) -> StepAux:
        world = self.pot.evaluate(X)
        U = self._control(t, X, V, world)
        xdot = state_rates_batch(X, V, self.num.eps_sing)
        vdot, ke = accelerations_batch(self.masses, self.inertias, X[:, 3:],
                                       V, U, self.gravity)
        total = fold_gradients(world, self.order)
        return StepAux(world=world, U=U, ke=ke, xdot=xdot, vdot=vdot,
                       total_grad=total)

    # -- stepping ----------------------------------------------------------

    def _advance(self, t: float, X: np.ndarray, V: np.ndarray,
                 aux: StepAux) -> tuple[np.ndarray, np.ndarray]:
        dt = self.num.dt
        if self.num.integrator == "semi-implicit-euler":
            V1 = V + dt * aux.vdot
            X1 = X + dt * state_rates_batch(X, V1, self.num.eps_sing)
            return X1, V1

        held = aux.U if self.num.control_update == "zoh" else None
        k1x, k1v = aux.xdot, aux.vdot
        h = 0.5 * dt
        k2x, k2v = self._derivs(t + h, X + h * k1x, V + h * k1v, held)
        k3x, k3v = self._derivs(t + h, X + h * k2x, V + h * k2v, held)
        k4x, k4v = self._derivs(t + dt, X + dt * k3x, V + dt * k3v, held)
        X1 = X + (dt / 6.0) * (k1x + 2.0 * k2x + 2.0 * k3x + k4x)
        V1 = V + (dt / 6.0) * (k1v + 2.0 * k2v + 2.0 * k3v + k4v)
        return X1, V1

    def step(self, X: np.ndarray, V: np.ndarray,
             t: float = 0.0) -> tuple[np.ndarray, np.ndarray]:
        """One integration step from (X, V); bit-identical for equal inputs.

        Raises:
            PotentialBlowupError, SingularPoseError, NumericError: the state
                or an interior stage left the domain of the closed loop.
        """
        X = np.asarray(X, dtype=float)
        V = np.asarray(V, dtype=float)
        return self._advance(t, X, V, self._eval_full(t, X, V))

    # -- monitors ----------------------------------------------------------

    def _geometry(self, X: np.ndarray):
        P = X[:, :3]
        diff = P[:, None, :] - P[None, :, :]
        dist2 = np.einsum("ijk,ijk->ij", diff, diff)
        if self._ocontact2 is not None:
            odiff = P[:, None, :] - self.pot.obstacle_centers[None, :, :]
            odist2 = np.einsum("ijk,ijk->ij", odiff, odiff)
        else:
            odist2 = None
        reach = np.linalg.norm(P, axis=1) + self.radii
        pitch = np.abs(X[:, 4])
        if len(self.edge_pairs):
            edge_d = np.sqrt(dist2[self._edge_rows, self._edge_cols])
        else:
            edge_d = np.zeros(0)
        return dist2, odist2, reach, pitch, edge_d

    def _hard_violation(self, t: float, X: np.ndarray, dist2, odist2, reach,
                        pitch, edge_d, detail: str = "") -> Verdict | None:
        """First violated safety condition at this state, if any."""
        ids = self.scenario.ids
        hit = (dist2 <= self._contact2) & self._offdiag
        if np.any(hit):
            rows = sorted({i for pair in zip(*np.nonzero(hit)) for i in pair})
            return Verdict("safety-violation", kind="collision", t=t,
                           agents=tuple(ids[i] for i in rows), detail=detail)
        if odist2 is not None and np.any(odist2 <= self._ocontact2):
            rows = sorted(set(np.nonzero(odist2 <= self._ocontact2)[0].tolist()))
            return Verdict("safety-violation", kind="obstacle-collision", t=t,
                           agents=tuple(ids[i] for i in rows), detail=detail)
        out = reach >= self.scenario.workspace.radius
        if np.any(out):
            return Verdict("safety-violation", kind="workspace-exit", t=t,
                           agents=tuple(ids[i] for i in np.flatnonzero(out)),
                           detail=detail)
        broken = edge_d >= self._edge_range
        if np.any(broken):
            rows = sorted({i for e in np.flatnonzero(broken)
                           for i in self.edge_pairs[e]})
            return Verdict("safety-violation", kind="connectivity-loss", t=t,
                           agents=tuple(ids[i] for i in rows), detail=detail)
        tipped = pitch >= self.scenario.theta_bar
        if np.any(tipped):
            return Verdict("safety-violation", kind="pitch-limit", t=t,
                           agents=tuple(ids[i] for i in np.flatnonzero(tipped)),
                           detail=detail)
        return None

    def _classify_failure(self, t: float, X: np.ndarray, e: Exception) -> Verdict:
        """Name the condition behind a potential or kinematics failure."""
        if isinstance(e, SingularPoseError):
            return Verdict("safety-violation", kind="singularity", t=t, detail=str(e))
        if isinstance(e, NumericError):
            return Verdict("safety-violation", kind="numeric", t=t, detail=str(e))
        dist2, odist2, reach, pitch, edge_d = self._geometry(X)
        v = self._hard_violation(t, X, dist2, odist2, reach, pitch, edge_d,
                                 detail=str(e))
        if v is not None:
            return v
        return Verdict("safety-violation", kind="potential-blowup", t=t, detail=str(e))

    # -- the run loop ------------------------------------------------------

    def run(self) -> TrajectoryLog:
        """Integrate to the horizon or the first safety violation.

        Raises:
            ScenarioError: the scenario fails validation.
        """
        report = validate_scenario(self.scenario)
        if not report.ok:
            raise ScenarioError("scenario failed validation:\n"
                                + "\n".join(report.lines()))
        num = self.num
        started = time.perf_counter()
        X, V = self.scenario.initial_state_arrays()
        n_steps = max(1, int(round(num.t_end / num.dt)))
        log.info("run: %d agents, %d steps of %g s (%s, %s)",
                 self.scenario.n_agents, n_steps, num.dt, num.integrator,
                 num.control_update)

        rows = {k: [] for k in ("t", "X", "V", "U", "gamma", "beta", "L",
                                "min_da", "min_do", "reach", "pitch", "edge")}
        ser = {k: [] for k in ("t", "gamma", "beta", "L", "min_da", "min_do",
                               "reach", "pitch", "edge")}
        slack = num.lyap_slack_c * num.dt**4
        last_L = None
        lyap_count = 0
        lyap_max = 0.0
        lyap_total = 0.0
        crit_steps = 0
        crit_first = None
        verdict: Verdict | None = None
        steps_taken = 0

        def append_row(t, X, V, aux, mon):
            rows["t"].append(t)
            rows["X"].append(X.copy())
            rows["V"].append(V.copy())
            rows["U"].append(aux.U.copy())
            rows["gamma"].append(aux.world.gamma.copy())
            rows["beta"].append(aux.world.beta.copy())
            rows["L"].append(mon["L"])
            rows["min_da"].append(mon["min_da"])
            rows["min_do"].append(mon["min_do"])
            rows["reach"].append(mon["reach"])
            rows["pitch"].append(mon["pitch"])
            rows["edge"].append(mon["edge"])

        for k in range(n_steps + 1):
            t = k * num.dt
            try:
                aux = self._eval_full(t, X, V)
            except (PotentialBlowupError, SingularPoseError, NumericError) as e:
                verdict = self._classify_failure(t, X, e)
                break

            dist2, odist2, reach, pitch, edge_d = self._geometry(X)
            L = float(aux.world.phi.sum() + aux.ke.sum())
            mon = {
                "L": L,
                "min_da": float(np.sqrt(dist2[self._offdiag].min()))
                          if self.scenario.n_agents > 1 else float("inf"),
                "min_do": float(np.sqrt(odist2.min())) if odist2 is not None
                          else float("inf"),
                "reach": float(reach.max()),
                "pitch": float(pitch.max()),
                "edge": edge_d.copy(),
            }
            ser["t"].append(t)
            ser["gamma"].append(aux.world.gamma.copy())
            ser["beta"].append(aux.world.beta.copy())
            ser["L"].append(L)
            ser["min_da"].append(mon["min_da"])
            ser["min_do"].append(mon["min_do"])
            ser["reach"].append(mon["reach"])
            ser["pitch"].append(mon["pitch"])
            ser["edge"].append(edge_d.copy())

            if last_L is not None:
                rise = L - last_L
                if rise > 0.0:
                    lyap_total += rise
                    if rise > slack:
                        lyap_count += 1
                        lyap_max = max(lyap_max, rise - slack)
            last_L = L

            net = np.linalg.norm(aux.total_grad, axis=1)
            terms = np.sqrt(np.einsum("jik,jik->ji", aux.world.grad, aux.world.grad))
            mask = aux.world.neighbor_mask.copy()
            np.fill_diagonal(mask, True)
            big_term = np.where(mask, terms, 0.0).max(axis=0)
            stuck = (net <= CRIT_GRAD_TOL) & (big_term > CRIT_TERM_TOL)
            if np.any(stuck):
                crit_steps += 1
                if crit_first is None:
                    crit_first = t
                    log.warning("net gradient vanished away from goal at t=%g "
                                "for agent rows %s", t, np.flatnonzero(stuck).tolist())

            viol = self._hard_violation(t, X, dist2, odist2, reach, pitch, edge_d)
            if viol is not None:
                append_row(t, X, V, aux, mon)
                verdict = viol
                break

            if k % num.log_every == 0 or k == n_steps:
                append_row(t, X, V, aux, mon)
            if k == n_steps:
                break
            try:
                X, V = self._advance(t, X, V, aux)
            except (PotentialBlowupError, SingularPoseError, NumericError) as e:
                verdict = self._classify_failure(t + num.dt, X, e)
                break
            steps_taken = k + 1

        if verdict is None:
            g0 = ser["gamma"][0].max()
            g_end = ser["gamma"][-1].max()
            v_end = float(np.linalg.norm(V, axis=1).max())
            if g_end <= max(num.gamma_rel_tol * g0, 1e-12) and v_end < num.v_tol:
                verdict = Verdict("converged")
            else:
                verdict = Verdict("running")
        wall = time.perf_counter() - started
        log.info("run finished: %s (%.2f s wall, %d steps)", verdict, wall,
                 steps_taken)

        n = self.scenario.n_agents
        n_edges = len(self.edge_pairs)

        def stack(lst, tail):
            return np.array(lst) if lst else np.zeros((0,) + tail)

        return TrajectoryLog(
            agent_ids=self.scenario.ids,
            edge_ids=tuple((self.scenario.ids[i], self.scenario.ids[j])
                           for i, j in self.edge_pairs),
            dt=num.dt,
            verdict=verdict,
            t=np.array(rows["t"]),
            X=stack(rows["X"], (n, 6)),
            V=stack(rows["V"], (n, 6)),
            U=stack(rows["U"], (n, 6)),
            gamma=stack(rows["gamma"], (n,)),
            beta=stack(rows["beta"], (n,)),
            L=np.array(rows["L"]),
            min_dist_agents=np.array(rows["min_da"]),
            min_dist_obstacles=np.array(rows["min_do"]),
            max_reach=np.array(rows["reach"]),
            max_pitch=np.array(rows["pitch"]),
            edge_dist=stack(rows["edge"], (n_edges,)),
            series_t=np.array(ser["t"]),
            series_gamma=stack(ser["gamma"], (n,)),
            series_beta=stack(ser["beta"], (n,)),
            series_L=np.array(ser["L"]),
            series_min_dist_agents=np.array(ser["min_da"]),
            series_min_dist_obstacles=np.array(ser["min_do"]),
            series_max_reach=np.array(ser["reach"]),
            series_max_pitch=np.array(ser["pitch"]),
            series_edge_dist=stack(ser["edge"], (n_edges,)),
            steps_taken=steps_taken,
            lyap_increase_count=lyap_count,
            lyap_max_excess=lyap_max,
            lyap_total_increase=lyap_total,
            critical_point_steps=crit_steps,
            critical_point_first_t=crit_first,
            wall_time=wall,
        )


def simulate(scenario: Scenario, **kwargs) -> TrajectoryLog:
    """Validate, integrate and monitor a scenario; see :class:`Simulator`."""
    return Simulator(scenario, **kwargs).run()
