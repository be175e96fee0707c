"""Decentralized potential-field formation control for rigid-body swarms.

A library and CLI simulator for second-order agents in a spherical
workspace with spherical obstacles: formation potentials with barrier
factors, the decentralized gradient controller, fixed-step closed-loop
integration, and runtime monitors for collision avoidance, connectivity,
workspace containment, pitch-singularity margin and energy decrease.
"""

from .control import (ControlEval, LyapunovEval, control_input,
                      control_inputs_batch, lyapunov)
from .dynamics import (coriolis_matrix, forward_dynamics, gravity_vector,
                       inertia_matrix, rotation_matrix)
from .errors import (NumericError, PotentialBlowupError, ScenarioError,
                     ScenarioFormatError, SingularPoseError, SwarmSimError)
from .kinematics import (EPS_SINGULAR, JacobianEval, angular_rate_matrix,
                         angular_rate_matrix_inverse, body_rates_to_state_rates,
                         jacobian)
from .model import (AgentSpec, FormationEdge, FormationSpec, NumericsConfig,
                    Obstacle, Pose, Scenario, Twist, ValidationReport,
                    Violation, Workspace, initial_neighbor_graph,
                    solid_sphere_inertia, validate_scenario)
from .potential import (BumpSpec, BumpValue, PotentialEval, PotentialModel,
                        WorldPotential, b_singularity, b_workspace, bump,
                        eta, gamma_edge, smoothstep)
from .scenario_io import (apply_overrides, dump_scenario, golden_scenario_path,
                          load_golden, load_scenario, scenario_digest)
from .sim import Simulator, TrajectoryLog, Verdict, simulate

__version__ = "0.1.0"

__all__ = [
    "AgentSpec", "BumpSpec", "BumpValue", "ControlEval", "EPS_SINGULAR",
    "FormationEdge", "FormationSpec", "JacobianEval", "LyapunovEval",
    "NumericError", "NumericsConfig", "Obstacle", "Pose", "PotentialBlowupError",
    "PotentialEval", "PotentialModel", "Scenario", "ScenarioError",
    "ScenarioFormatError", "Simulator", "SingularPoseError", "SwarmSimError",
    "TrajectoryLog", "Twist", "ValidationReport", "Verdict", "Violation",
    "WorldPotential", "Workspace", "angular_rate_matrix",
    "angular_rate_matrix_inverse", "apply_overrides", "b_singularity",
    "b_workspace", "body_rates_to_state_rates", "bump", "control_input",
    "control_inputs_batch", "coriolis_matrix", "dump_scenario", "eta",
    "forward_dynamics", "gamma_edge", "golden_scenario_path", "gravity_vector",
    "inertia_matrix", "initial_neighbor_graph", "jacobian", "load_golden",
    "load_scenario", "lyapunov", "rotation_matrix", "scenario_digest",
    "simulate", "smoothstep", "solid_sphere_inertia", "validate_scenario",
]
