"""Exception hierarchy shared by all quenchlab modules."""


class QuenchlabError(Exception):
    """Base class for every error raised by quenchlab."""


class InvalidInputError(QuenchlabError, ValueError):
    """An argument is outside the domain of the operation."""


class NotIrreducibleError(QuenchlabError):
    """The kernel has more than one communicating class."""


class PeriodicChainError(QuenchlabError):
    """The kernel is irreducible but has period > 1."""


class ConvergenceError(QuenchlabError):
    """An iterative solver did not reach its tolerance."""


class DegenerateCellError(QuenchlabError):
    """A discretization cell carries zero invariant mass."""


class IntegrabilityError(QuenchlabError):
    """An observable is not square integrable on the grid."""


class EnumerationSizeError(QuenchlabError):
    """Exhaustive enumeration would exceed the allowed size."""


class UnsupportedOperationError(QuenchlabError):
    """The sampler lacks a capability the operation needs."""


class ReplicaError(QuenchlabError):
    """A replica failed; carries the replica index."""

    def __init__(self, index, cause):
        super().__init__(f"replica {index} failed: {cause!r}")
        self.index = index
        self.cause = cause
