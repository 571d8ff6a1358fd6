"""Exception types raised by the learners and testers."""


class KModalError(Exception):
    """Base class for all package errors."""


class DomainMismatch(KModalError, ValueError):
    """Two distributions live on domains of different size."""


class InsufficientSamples(KModalError):
    """A region of the domain did not receive enough samples for a test."""

    def __init__(self, message, *, have=None, need=None):
        super().__init__(message)
        self.have = have
        self.need = need


class TournamentFailure(KModalError):
    """Every candidate in a tournament lost at least one competition."""


class ModalityExceeded(KModalError):
    """The decomposition produced more superintervals than k + 1 allows."""
