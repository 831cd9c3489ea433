"""Exception hierarchy shared by every module."""


class SwarmAssignError(Exception):
    """Base class for all package errors."""


class InvalidConfigError(SwarmAssignError, ValueError):
    pass


class InstanceParseError(SwarmAssignError, ValueError):
    """Raised for malformed instance or config text.

    ``where`` names the offending record (``edges[3]``) or a line number.
    """

    def __init__(self, message: str, where: str | None = None):
        self.where = where
        super().__init__(f"{where}: {message}" if where else message)


class InfeasibleAssignmentError(SwarmAssignError, ValueError):
    pass


class EmptyObjectiveError(SwarmAssignError, ValueError):
    pass


class SizeGuardError(SwarmAssignError):
    """Instance too large for exhaustive enumeration."""


class ApproximationDomainError(SwarmAssignError, ValueError):
    pass


class ProtocolViolationError(SwarmAssignError):
    pass


class DivergenceError(SwarmAssignError):
    pass
