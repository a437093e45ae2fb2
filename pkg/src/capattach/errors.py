"""Exception hierarchy shared by every module of the package."""


class CapAttachError(Exception):
    """Base class for all package errors."""


class ParameterError(CapAttachError, ValueError):
    """Invalid model parameters or arguments."""


class InvariantError(CapAttachError, AssertionError):
    """An internal invariant was violated; indicates a bug."""


class ProcedureExhausted(CapAttachError):
    """The greedy closing procedure has no legal move left."""


class SizeError(CapAttachError):
    """Input exceeds a documented size ceiling."""


class ResourceError(CapAttachError):
    """A configurable resource ceiling (state count, work budget) was exceeded."""


class ModelError(CapAttachError):
    """The Markov chain model is inconsistent (singular system, missing state)."""


class FormulaSyntaxError(CapAttachError, ValueError):
    def __init__(self, message, line, column):
        super().__init__(f"{message} at line {line}, column {column}")
        self.line = line
        self.column = column


class FreeVariableError(CapAttachError, ValueError):
    """A formula that should be a sentence has free variables."""
