"""Domain model: agents, obstacles, workspace, formation targets, scenarios.

A scenario bundles everything a run needs: the spherical workspace, static
spherical obstacles, per-agent physical parameters, desired relative offsets
along formation edges, initial states and numerics settings.  Validation
rejects any scenario whose initial data already violates one of the runtime
safety conditions, so a simulation only ever starts from a state where every
barrier factor is strictly positive.

All lengths are meters, all angles radians.  Angle triples are ordered
(roll, pitch, yaw); the pitch component is the one with the +-pi/2 kinematic
singularity.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from itertools import combinations

import numpy as np


def _vec(x, n: int, name: str) -> np.ndarray:
    arr = np.asarray(x, dtype=float)
    if arr.shape != (n,):
        raise ValueError(f"{name} must have shape ({n},), got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} must be finite, got {arr}")
    arr = arr.copy()
    arr.setflags(write=False)
    return arr


def solid_sphere_inertia(mass: float, radius: float) -> np.ndarray:
    """Principal inertia of a uniform solid sphere, (2/5) m r^2 on each axis."""
    return np.full(3, 0.4 * mass * radius * radius)


@dataclass(frozen=True, eq=False)
class Pose:
    """Position plus roll/pitch/yaw angles of one body.

    The nominal angle box is roll, yaw in [-pi, pi] and pitch in
    [-pi/2, pi/2]; membership is checked by scenario validation rather than
    here so that out-of-range input files are reported, not crashed on.
    """

    p: np.ndarray
    q: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "p", _vec(self.p, 3, "position"))
        object.__setattr__(self, "q", _vec(self.q, 3, "angles"))

    def as_vector(self) -> np.ndarray:
        return np.concatenate([self.p, self.q])


@dataclass(frozen=True, eq=False)
class Twist:
    """Linear velocity and angular velocity stacked into one 6-vector."""

    v: np.ndarray
    omega: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "v", _vec(self.v, 3, "linear velocity"))
        object.__setattr__(self, "omega", _vec(self.omega, 3, "angular velocity"))

    def as_vector(self) -> np.ndarray:
        return np.concatenate([self.v, self.omega])

    @staticmethod
    def zero() -> "Twist":
        return Twist(np.zeros(3), np.zeros(3))


@dataclass(frozen=True, eq=False)
class AgentSpec:
    """Physical parameters of one spherical agent.

    Attributes:
        id: Integer label used by scenario files and log columns.
        radius: Body radius. Collision distances are center distances
            compared against sums of radii.
        sensing: Sensing range; interaction terms saturate beyond it.
        mass: Body mass.
        body_inertia: Principal inertia in the body frame.  Defaults to a
            uniform solid sphere.
        gain: Velocity damping gain of the controller.
    """

    id: int
    radius: float
    sensing: float
    mass: float = 1.0
    body_inertia: np.ndarray | None = None
    gain: float = 5.0

    def __post_init__(self) -> None:
        inertia = self.body_inertia
        if inertia is None:
            inertia = solid_sphere_inertia(self.mass, self.radius)
        object.__setattr__(self, "body_inertia", _vec(inertia, 3, "body_inertia"))


@dataclass(frozen=True, eq=False)
class Obstacle:
    """Static sphere the agents must stay clear of."""

    center: np.ndarray
    radius: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "center", _vec(self.center, 3, "obstacle center"))


@dataclass(frozen=True)
class Workspace:
    """Closed ball of the given radius, centered at the origin."""

    radius: float


@dataclass(frozen=True, eq=False)
class FormationEdge:
    """Desired relative offset between two agents.

    Offsets are oriented: ``p_des`` and ``q_des`` are the target values of
    (state of agent ``i``) minus (state of agent ``j``).  The reversed edge
    therefore carries the negated offsets, which is what :meth:`offset_for`
    returns when asked for the (j, i) orientation.
    """

    i: int
    j: int
    p_des: np.ndarray
    q_des: np.ndarray

    def __post_init__(self) -> None:
        if self.i == self.j:
            raise ValueError("formation edge must join two distinct agents")
        object.__setattr__(self, "p_des", _vec(self.p_des, 3, "position offset"))
        object.__setattr__(self, "q_des", _vec(self.q_des, 3, "angle offset"))

    @property
    def key(self) -> tuple[int, int]:
        return (self.i, self.j) if self.i < self.j else (self.j, self.i)

    def offset_for(self, a: int, b: int) -> np.ndarray:
        """Stacked 6-vector offset for the (a, b) orientation of this edge."""
        x = np.concatenate([self.p_des, self.q_des])
        if (a, b) == (self.i, self.j):
            return x
        if (a, b) == (self.j, self.i):
            return -x
        raise KeyError(f"edge joins {self.i} and {self.j}, not {a} and {b}")


@dataclass(frozen=True, eq=False)
class FormationSpec:
    """Set of formation edges with their desired offsets."""

    edges: tuple[FormationEdge, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "edges", tuple(self.edges))

    def edge_keys(self) -> set[tuple[int, int]]:
        return {e.key for e in self.edges}

    def neighbors_of(self, agent_id: int) -> list[int]:
        out = []
        for e in self.edges:
            if e.i == agent_id:
                out.append(e.j)
            elif e.j == agent_id:
                out.append(e.i)
        return sorted(out)


@dataclass
class NumericsConfig:
    """Integration, potential and convergence settings for one run.

    ``lyap_slack_c`` bounds the tolerated per-step increase of the energy
    monitor by ``c * dt**4``; a fixed-step scheme of order four cannot do
    better than that without claiming exact arithmetic.
    """

    dt: float = 1e-3
    t_end: float = 30.0
    integrator: str = "rk4"  # "rk4" | "semi-implicit-euler"
    control_update: str = "per-stage"  # "per-stage" | "zoh"
    log_every: int = 10
    kappa: float = 4.0
    eps_sing: float = 1e-6
    eps_beta: float = 1e-12
    lyap_slack_c: float = 10.0
    gamma_rel_tol: float = 1e-2
    v_tol: float = 1e-3
    g0: float = 9.81
    gravity_off: bool = False

    INTEGRATORS = ("rk4", "semi-implicit-euler")
    CONTROL_UPDATES = ("per-stage", "zoh")


@dataclass(eq=False)
class Scenario:
    """Immutable-by-convention bundle of everything one run needs."""

    agents: tuple[AgentSpec, ...]
    obstacles: tuple[Obstacle, ...]
    workspace: Workspace
    formation: FormationSpec
    initial_poses: tuple[Pose, ...]
    initial_twists: tuple[Twist, ...]
    theta_bar: float = 1.4
    epsilon_r: float = 0.01
    numerics: NumericsConfig = field(default_factory=NumericsConfig)

    def __post_init__(self) -> None:
        self.agents = tuple(self.agents)
        self.obstacles = tuple(self.obstacles)
        self.initial_poses = tuple(self.initial_poses)
        self.initial_twists = tuple(self.initial_twists)
        n = len(self.agents)
        if len(self.initial_poses) != n or len(self.initial_twists) != n:
            raise ValueError("initial poses/twists must match the agent list")
        ids = [a.id for a in self.agents]
        if len(set(ids)) != len(ids):
            raise ValueError(f"duplicate agent ids in {ids}")

    # -- convenient array views -------------------------------------------

    @property
    def n_agents(self) -> int:
        return len(self.agents)

    @cached_property
    def ids(self) -> tuple[int, ...]:
        return tuple(a.id for a in self.agents)

    @cached_property
    def index_of(self) -> dict[int, int]:
        return {a.id: k for k, a in enumerate(self.agents)}

    @cached_property
    def radii(self) -> np.ndarray:
        return np.array([a.radius for a in self.agents])

    @cached_property
    def sensing(self) -> np.ndarray:
        return np.array([a.sensing for a in self.agents])

    @cached_property
    def masses(self) -> np.ndarray:
        return np.array([a.mass for a in self.agents])

    @cached_property
    def inertias(self) -> np.ndarray:
        return np.array([a.body_inertia for a in self.agents])

    @cached_property
    def gains(self) -> np.ndarray:
        return np.array([a.gain for a in self.agents])

    @cached_property
    def edge_index_pairs(self) -> tuple[tuple[int, int], ...]:
        """Formation edges as (index_i, index_j) pairs in file order."""
        idx = self.index_of
        return tuple((idx[e.i], idx[e.j]) for e in self.formation.edges)

    def initial_state_arrays(self) -> tuple[np.ndarray, np.ndarray]:
        """Initial (poses, twists) stacked as two (N, 6) arrays."""
        X = np.array([pose.as_vector() for pose in self.initial_poses])
        V = np.array([tw.as_vector() for tw in self.initial_twists])
        return X, V


# -- operations -----------------------------------------------------------


def initial_neighbor_graph(scenario: Scenario) -> set[tuple[int, int]]:
    """Undirected sensing graph at the initial configuration.

    An edge is present iff each endpoint lies within the other's sensing
    ball, boundary included.  Returned pairs are (smaller id, larger id).
    """
    edges: set[tuple[int, int]] = set()
    for a, b in combinations(scenario.agents, 2):
        ia, ib = scenario.index_of[a.id], scenario.index_of[b.id]
        dist = float(
            np.linalg.norm(scenario.initial_poses[ia].p - scenario.initial_poses[ib].p)
        )
        if dist <= a.sensing and dist <= b.sensing:
            edges.add((a.id, b.id) if a.id < b.id else (b.id, a.id))
    return edges


def formation_residual(edge: FormationEdge, pose_i: Pose, pose_j: Pose) -> np.ndarray:
    """Stacked 6-vector offset error for the stored (i, j) orientation.

    Angle components are plain differences; nothing is wrapped, so a residual
    of 2*pi is reported as 2*pi and not silently treated as zero.
    """
    x_i = pose_i.as_vector()
    x_j = pose_j.as_vector()
    return x_i - x_j - edge.offset_for(edge.i, edge.j)


@dataclass(frozen=True)
class Violation:
    code: str
    message: str
    subjects: tuple = ()

    def __str__(self) -> str:
        return f"[{self.code}] {self.message}"


@dataclass
class ValidationReport:
    violations: list[Violation]
    warnings: list[Violation]

    @property
    def ok(self) -> bool:
        return not self.violations

    def lines(self) -> list[str]:
        return [str(v) for v in self.violations] + [
            f"warning: {w}" for w in self.warnings
        ]


def validate_scenario(scenario: Scenario) -> ValidationReport:
    """Check every precondition a safe run relies on.

    Covers basic parameter sanity, the initial-state conditions (rest start,
    pitch margin, pairwise and obstacle clearance, workspace containment),
    obstacle spacing and boundary margins with the ``epsilon_r`` slack,
    sensing ranges large enough to cover any touching pair, formation offset
    feasibility, and that every formation edge is sensed strictly within
    range at t = 0 so all barrier factors start positive.
    """
    v: list[Violation] = []
    warn: list[Violation] = []
    sc = scenario

    def bad(code: str, msg: str, *subjects) -> None:
        v.append(Violation(code, msg, tuple(subjects)))

    # Parameter sanity.
    if not sc.workspace.radius > 0:
        bad("workspace-radius", f"workspace radius must be positive, got {sc.workspace.radius}")
    if not 0 < sc.theta_bar < math.pi / 2:
        bad("pitch-limit-range", f"theta_bar must lie in (0, pi/2), got {sc.theta_bar}")
    if not sc.epsilon_r > 0:
        bad("spacing-slack", f"epsilon_r must be positive, got {sc.epsilon_r}")
    for a in sc.agents:
        if not (a.radius > 0 and a.sensing > 0 and a.mass > 0 and a.gain > 0
                and np.all(a.body_inertia > 0)):
            bad("agent-parameters",
                f"agent {a.id}: radius, sensing, mass, inertia and gain must be positive",
                a.id)
    for z, ob in enumerate(sc.obstacles):
        if not ob.radius > 0:
            bad("obstacle-radius", f"obstacle {z}: radius must be positive, got {ob.radius}", z)

    num = sc.numerics
    if not (num.dt > 0 and num.t_end >= num.dt):
        bad("numerics", f"need dt > 0 and t_end >= dt, got dt={num.dt}, t_end={num.t_end}")
    if num.integrator not in NumericsConfig.INTEGRATORS:
        bad("numerics", f"unknown integrator {num.integrator!r}")
    if num.control_update not in NumericsConfig.CONTROL_UPDATES:
        bad("numerics", f"unknown control update mode {num.control_update!r}")
    if not num.kappa >= 1.0:
        bad("numerics", f"kappa must be >= 1, got {num.kappa}")
    if not (num.log_every >= 1 and num.eps_sing > 0 and num.eps_beta > 0):
        bad("numerics", "log_every must be >= 1 and tolerance floors positive")

    if v:
        # Parameter errors make the geometric checks below meaningless.
        return ValidationReport(v, warn)

    ids = sc.ids
    poses = sc.initial_poses
    twists = sc.initial_twists
    r = sc.radii
    d = sc.sensing
    r_w = sc.workspace.radius

    # (a) agents start at rest.
    for k, tw in enumerate(twists):
        if np.any(tw.as_vector() != 0.0):
            bad("initial-velocity", f"agent {ids[k]} must start at rest", ids[k])

    # (b) pitch strictly clear of the singular band, and angle-box membership.
    for k, pose in enumerate(poses):
        roll, pitch, yaw = pose.q
        if abs(pitch) > sc.theta_bar:
            bad("initial-pitch",
                f"agent {ids[k]}: |pitch(0)| = {abs(pitch):.4f} exceeds the "
                f"limit {sc.theta_bar:.4f} (must stay below pi/2)", ids[k])
        if abs(roll) > math.pi or abs(yaw) > math.pi:
            bad("initial-angle-range",
                f"agent {ids[k]}: roll/yaw must lie in [-pi, pi]", ids[k])

    # (c) no initial body overlap.
    for (ka, a), (kb, b) in combinations(enumerate(sc.agents), 2):
        dist = float(np.linalg.norm(poses[ka].p - poses[kb].p))
        if dist <= a.radius + b.radius:
            bad("agent-overlap",
                f"agents {a.id} and {b.id} start {dist:.4f} apart, need more than "
                f"{a.radius + b.radius:.4f}", a.id, b.id)

    # (d) clearance from every obstacle.
    for k, pose in enumerate(poses):
        for z, ob in enumerate(sc.obstacles):
            dist = float(np.linalg.norm(pose.p - ob.center))
            if dist <= r[k] + ob.radius:
                bad("obstacle-overlap",
                    f"agent {ids[k]} starts {dist:.4f} from obstacle {z}, need more "
                    f"than {r[k] + ob.radius:.4f}", ids[k], z)

    # (e) fully inside the workspace.
    for k, pose in enumerate(poses):
        reach = float(np.linalg.norm(pose.p)) + r[k]
        if reach >= r_w:
            bad("workspace-overlap",
                f"agent {ids[k]}: ||p(0)|| + radius = {reach:.4f} must stay below "
                f"{r_w}", ids[k])

    # (f) obstacle spacing wide enough for the largest agent to pass.
    r_max = float(r.max()) if len(sc.agents) else 0.0
    for (za, oa), (zb, obz) in combinations(enumerate(sc.obstacles), 2):
        gap_needed = 2 * r_max + oa.radius + obz.radius + sc.epsilon_r
        dist = float(np.linalg.norm(oa.center - obz.center))
        if dist < gap_needed:
            bad("obstacle-spacing",
                f"obstacles {za} and {zb} are {dist:.4f} apart, need at least "
                f"{gap_needed:.4f}", za, zb)
    for z, ob in enumerate(sc.obstacles):
        margin = r_w - (float(np.linalg.norm(ob.center)) + ob.radius)
        if margin < 2 * r_max + sc.epsilon_r:
            bad("obstacle-boundary-margin",
                f"obstacle {z} leaves {margin:.4f} to the workspace boundary, "
                f"need at least {2 * r_max + sc.epsilon_r:.4f}", z)

    # (g) sensing range exceeds any touching-pair distance.
    pair_sums = [a.radius + b.radius for a, b in combinations(sc.agents, 2)]
    if pair_sums:
        worst = max(pair_sums)
        for a in sc.agents:
            if a.sensing <= worst:
                bad("sensing-range",
                    f"agent {a.id}: sensing {a.sensing} must exceed the largest "
                    f"radius sum {worst:.4f}", a.id)

    # (h) formation offsets: oriented duplicates must agree antisymmetrically,
    # pitch offsets must be meaningful, and the offset length must fit
    # strictly between the contact distance and both sensing ranges.
    seen: dict[tuple[int, int], FormationEdge] = {}
    idx = sc.index_of
    for e in sc.formation.edges:
        if e.i not in idx or e.j not in idx:
            bad("unknown-agent", f"formation edge refers to unknown agent in ({e.i}, {e.j})")
            continue
        if e.key in seen:
            other = seen[e.key]
            flipped = other.offset_for(e.i, e.j)
            if not np.allclose(np.concatenate([e.p_des, e.q_des]), flipped, atol=1e-12):
                bad("formation-antisymmetry",
                    f"edges ({e.i},{e.j}) and ({other.i},{other.j}) carry "
                    "incompatible offsets; reversed orientation must negate them",
                    e.i, e.j)
            continue
        seen[e.key] = e
        pitch_off = abs(e.q_des[1])
        if pitch_off >= math.pi:
            bad("formation-pitch-offset",
                f"edge ({e.i},{e.j}): |pitch offset| must be below pi", e.i, e.j)
        elif pitch_off >= math.pi / 2:
            warn.append(Violation(
                "formation-pitch-offset-large",
                f"edge ({e.i},{e.j}): pitch offset {e.q_des[1]:.4f} is at or above "
                "pi/2; the target pose sits outside the monitored pitch band",
                (e.i, e.j)))
        sep = float(np.linalg.norm(e.p_des))
        ai, aj = sc.agents[idx[e.i]], sc.agents[idx[e.j]]
        lo = ai.radius + aj.radius
        hi = min(ai.sensing, aj.sensing)
        if not lo < sep < hi:
            bad("formation-distance",
                f"edge ({e.i},{e.j}): offset length {sep:.4f} must lie strictly "
                f"between contact {lo:.4f} and sensing {hi:.4f}", e.i, e.j)

    # (i) every declared edge is sensed with strict margin at t = 0 (a factor
    # of the safety product starts at zero otherwise), and nobody is isolated.
    graph = initial_neighbor_graph(sc)
    for key, e in seen.items():
        ia, ib = idx[e.i], idx[e.j]
        dist = float(np.linalg.norm(poses[ia].p - poses[ib].p))
        hi = min(d[ia], d[ib])
        if key not in graph or dist >= hi:
            bad("formation-edge-unsensed",
                f"edge ({e.i},{e.j}): initial distance {dist:.4f} must be strictly "
                f"inside both sensing ranges (min {hi:.4f})", e.i, e.j)
    engaged = {a for key in seen for a in key}
    for a in sc.agents:
        if a.id not in engaged:
            bad("agent-without-edge", f"agent {a.id} has no formation edge", a.id)

    return ValidationReport(v, warn)
