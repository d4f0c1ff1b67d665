"""
Exception classes.

Every class carries the process exit code the CLI reports for it.
"""

from consts import EXIT_INTERNAL, EXIT_PARAMETER, EXIT_SIZE_GUARD, EXIT_INPUT


class AtmfgError(Exception):
    """
    Base class of all errors raised by the library.
    """
    exit_code = EXIT_INTERNAL


class ParseError(AtmfgError):
    """
    Raised when an input file does not parse under its declared format.
    Carries the offending line (text formats) or byte offset (binary).
    """
    exit_code = EXIT_INPUT

    def __init__(self, message, line=None, offset=None):
        if line is not None:
            message = '%s (line %d)' % (message, line)
        elif offset is not None:
            message = '%s (offset %d)' % (message, offset)
        super().__init__(message)
        self.line = line
        self.offset = offset


class DimensionError(AtmfgError):
    """
    Raised when a matrix or vector has an unusable shape.
    """
    exit_code = EXIT_PARAMETER


class ParameterError(AtmfgError):
    """
    Raised when a parameter is outside its valid range.
    """
    exit_code = EXIT_PARAMETER


class SizeError(AtmfgError):
    """
    Raised when an input has too few nodes for the requested construction.
    """
    exit_code = EXIT_PARAMETER


class SizeGuardError(AtmfgError):
    """
    Raised when the exact TMFG is asked to process more nodes than its
    guard allows.
    """
    exit_code = EXIT_SIZE_GUARD


class EmptyInputError(AtmfgError):
    """
    Raised when an index is built over zero rows.
    """
    exit_code = EXIT_PARAMETER


class BoundsError(AtmfgError):
    """
    Raised when a node id is out of range.
    """
    exit_code = EXIT_PARAMETER


class StructureError(AtmfgError):
    """
    Raised when an adjacency matrix is not symmetric or has self-loops.
    """
    exit_code = EXIT_PARAMETER


class InputMismatchError(AtmfgError):
    """
    Raised when several inputs disagree (node counts, label counts).
    """
    exit_code = EXIT_INPUT


class UnreachablePairError(AtmfgError):
    """
    Raised when a shortest path is requested between disconnected nodes.
    """
    exit_code = EXIT_INPUT


class IndexStateError(AtmfgError):
    """
    Raised when an index operation is not allowed in its current state.
    """


class InternalStateError(AtmfgError):
    """
    Raised when the engine detects a broken precondition (engine bug).
    """


class FrontierExhaustedError(AtmfgError):
    """
    Raised when a global rescue finds no candidate while nodes remain.
    """


class InvalidCandidateError(AtmfgError):
    """
    Raised when a node is scored against a face it already belongs to.
    """
