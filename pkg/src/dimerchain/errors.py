"""Exception hierarchy shared by the simulator modules."""


class DimerChainError(Exception):
    """Base class for all errors raised by this package."""


class ContractViolation(DimerChainError, ValueError):
    """An input breaks a documented precondition (non-Hermitian, bad shape, ...)."""


class CapacityError(DimerChainError):
    """Requested object would exceed the configured size limits."""


class NumericError(DimerChainError, ArithmeticError):
    """A numerical kernel failed to converge."""


class SymmetryViolation(DimerChainError):
    """Operator does not conserve total magnetization."""


class DegenerateGroundState(DimerChainError):
    """Lowest eigenvalue is (near-)degenerate and no selection policy was given."""


class ZeroProbabilityBranch(DimerChainError):
    """A projective outcome has vanishing probability and cannot be post-selected."""


class ProtocolFailure(DimerChainError):
    """Every time point of a scan landed on a zero-probability branch."""
