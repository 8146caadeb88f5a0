"""Exception hierarchy shared by all spernerlab modules."""


class SpernerlabError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(SpernerlabError, ValueError):
    """An argument is outside the documented domain of an operation."""


class ContractError(SpernerlabError, RuntimeError):
    """A precondition, postcondition, or runtime invariant was violated."""


class SolverTimeout(SpernerlabError):
    """An exact solver exceeded its cooperative time budget."""

    def __init__(self, message, best_so_far=None):
        super().__init__(message)
        self.best_so_far = best_so_far
