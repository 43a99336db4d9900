"""Exception hierarchy shared by all lab modules."""


class LabError(Exception):
    """Base class for every error raised by the lab."""


class GroupTooLarge(LabError):
    pass


class OnWall(LabError, ValueError):
    pass


class QuadratureFailure(LabError, ArithmeticError):
    pass


class UnknownSymbol(LabError, KeyError):
    pass


class DomainError(LabError, ValueError):
    pass


class TooCloseToWall(LabError, ValueError):
    pass


class OrbitDiagonal(LabError, ValueError):
    pass


class PreconditionViolated(LabError, ValueError):
    pass


class GridTooLarge(LabError, ValueError):
    pass


class NoConvergence(LabError, ArithmeticError):
    pass


class SupportsNotSeparated(LabError, ValueError):
    pass


class GridNotSymmetric(LabError, ValueError):
    pass


class ConfigError(LabError, ValueError):
    pass


class MissingReports(LabError, FileNotFoundError):
    pass
