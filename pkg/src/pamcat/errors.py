"""Shared exception types.

DomainError: the request is outside the mathematical domain of the operation
(exit code 2 in the CLI).  NumericalError: the computation ran but did not
reach the required accuracy or degenerated (exit code 3).
"""


class DomainError(ValueError):
    pass


class NumericalError(RuntimeError):
    """Raised when a numerical procedure fails to converge or degenerates.

    The ``details`` dict carries whatever partial results are available
    (e.g. the two disagreeing quadrature estimates).
    """

    def __init__(self, message, **details):
        super().__init__(message)
        self.details = details
