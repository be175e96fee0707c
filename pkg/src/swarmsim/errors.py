"""Exception hierarchy shared across the package."""


class SwarmSimError(Exception):
    """Base class for all errors raised by swarmsim."""


class ScenarioFormatError(SwarmSimError):
    """Scenario file cannot be parsed or is structurally malformed."""


class ScenarioError(SwarmSimError):
    """Scenario is well-formed but fails validation, so it must not be run."""


class SingularPoseError(SwarmSimError):
    """Pitch angle too close to +-pi/2; the rate Jacobian inverse is withheld."""


class PotentialBlowupError(SwarmSimError):
    """Safety product collapsed (beta at or below floor); potential is unbounded."""


class NumericError(SwarmSimError):
    """Fatal numeric failure, e.g. an inertia matrix that is not positive definite."""
