"""Exception hierarchy shared across the package."""


class LaminarError(Exception):
    """Base class for all library errors."""


class ConfigError(LaminarError):
    """Malformed or unknown configuration values."""


class NumericalError(LaminarError):
    """Base for failures of a numerical routine."""


# numerics
class NonSquare(NumericalError):
    pass


class NotSymmetric(NumericalError):
    pass


class NoConvergence(NumericalError):
    pass


class Singular(NumericalError):
    def __init__(self, msg="matrix is singular", index=None):
        super().__init__(msg)
        self.index = index


class NonFinite(NumericalError):
    pass


# graphs
class GraphError(LaminarError):
    pass


class ProfileInfeasible(GraphError):
    pass


class NotConnected(GraphError):
    pass


class InvalidGraph(GraphError):
    pass


# interwoven / quotient
class NegativeEntry(NumericalError):
    pass


class NotEquitable(LaminarError):
    def __init__(self, msg, rows=None):
        super().__init__(msg)
        self.rows = rows


class NotInSpectrum(LaminarError):
    pass


# kinetics / stability
class SingularA(Singular):
    pass


class SignClassViolation(LaminarError):
    pass


# simulation
class StepSizeUnderflow(NumericalError):
    pass


class EmptyData(LaminarError):
    pass
