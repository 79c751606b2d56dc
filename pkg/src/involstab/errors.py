"""Exception hierarchy shared across the package."""


class InvolStabError(Exception):
    """Base class for all package-specific failures."""


class SpecMismatch(InvolStabError):
    """Two elements from different algebra instances were combined."""


class ConvergenceFailure(InvolStabError):
    """Power iteration failed to meet its tolerance within the cap."""


class DegenerateDirection(InvolStabError):
    """Random direction draw produced the zero element repeatedly."""


class KindSpecMismatch(InvolStabError):
    """Involution kind is not defined on the given algebra instance."""


class NotContractive(InvolStabError):
    """Measured orbit ratio exceeds the declared Lipschitz constant."""


class Exhausted(InvolStabError):
    """Orbit distances are finite but the tolerance was not met in time."""


class NoContraction(InvolStabError):
    """No scaling direction makes the control function contractive."""


class StabilizationFailure(InvolStabError):
    """Scaling-limit iteration could not produce a usable limit."""


class IterateOverflow(StabilizationFailure):
    """Intermediate iterate norm exceeded the overflow guard."""


class NonCauchy(StabilizationFailure):
    """Successive differences kept growing; hypothesis bound violated."""


class OutOfRange(InvolStabError):
    """Parameter outside the valid range for the requested regime."""


class ConfigError(InvolStabError):
    """Scenario configuration failed validation; message names the key."""
