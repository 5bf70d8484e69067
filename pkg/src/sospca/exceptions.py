"""Exception types raised by sospca."""


class SosPcaError(Exception):
    """Base class for all package errors."""


class DegreeError(SosPcaError, ValueError):
    """A monomial has degree larger than 4."""


class IncompleteTableError(SosPcaError, KeyError):
    """A moment table is missing an entry needed to assemble a matrix."""


class SymmetryError(SosPcaError, ValueError):
    """A matrix that must be symmetric is not (beyond tolerance)."""


class DegenerateRowError(SosPcaError, ValueError):
    """A data row is identically zero and cannot be normalized."""


class ParameterError(SosPcaError, ValueError):
    """Invalid model, certificate, or test parameters."""


class CapError(SosPcaError, RuntimeError):
    """A computation exceeds its configured size cap."""


class InvalidLowerBoundError(SosPcaError, RuntimeError):
    """An infeasible certificate was used as a lower bound on the relaxation value."""
