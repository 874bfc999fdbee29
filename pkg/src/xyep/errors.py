"""Exception hierarchy.

Validation problems raise ``ValueError`` subclasses so they map to usage
errors at the command line; everything else derives from :class:`XYEPError`
and maps to a numerical failure.
"""


class XYEPError(Exception):
    """Base class for numerical failures."""


class CapacityError(XYEPError):
    """Requested size exceeds a dense/combinatorial guard."""


class ConvergenceError(XYEPError):
    """An eigensolver or root finder did not converge."""


class IncompleteRootSetError(XYEPError):
    """Root finding produced the wrong number of solutions.

    The roots that were found are kept on ``roots``.
    """

    def __init__(self, message, roots=()):
        super().__init__(message)
        self.roots = list(roots)


class EpCensusError(XYEPError):
    """The number of exceptional points differs from ``2L - 4``."""

    def __init__(self, message, records=()):
        super().__init__(message)
        self.records = list(records)
