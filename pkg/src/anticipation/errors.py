"""Exception hierarchy shared by every module of the package."""


class PlannerError(Exception):
    """Base class for all errors raised by this package."""


class VacuousGoalError(PlannerError, ValueError):
    """A goal was built with neither an instruction nor a target state."""


class UnknownStateError(PlannerError, KeyError):
    """A state is not present in an environment or value table."""


class UnsatisfiableGoalError(PlannerError):
    """No enumerated state satisfies the goal."""


class CapacityError(PlannerError):
    """The reachable state set exceeds the configured cap."""


class AlreadyAchievedError(PlannerError):
    """Refinement was requested for a goal that is already satisfied."""


class NoDecompositionError(PlannerError):
    """The goal sits at the atomic level and has no finer boundaries."""


class DegenerateGraphError(PlannerError):
    """The state graph is too small to place a waypoint."""


class GroundingError(PlannerError):
    """A descriptor's scripted skill is not applicable in the current state."""


class VerificationExhaustedError(PlannerError):
    """Every regenerated subgoal candidate was rejected by the self-check."""


class NoSkillError(PlannerError):
    """No single scripted skill connects two states."""


class AmbiguousSkillError(PlannerError):
    """More than one scripted skill connects two states."""


class InstructionParseError(PlannerError, ValueError):
    """An instruction does not parse under the environment's grammar."""


class EmptyStackError(PlannerError):
    """A stack operation was attempted on an empty goal stack."""


class ResetUnsupportedError(PlannerError):
    """The environment cannot be reset to its initial state."""


class ConfigError(PlannerError, ValueError):
    """An experiment or component configuration is invalid or conflicting."""


class BoundaryNotReachedError(PlannerError):
    """A successful trajectory never satisfied a required hierarchy boundary."""


class EmptyWindowError(PlannerError):
    """A dataset sampling window contains no frames."""


class MisalignedStagesError(PlannerError, ValueError):
    """Episode results disagree on the number of stages."""


class FormatError(PlannerError, ValueError):
    """A serialized file has the wrong header, version, or digest."""
