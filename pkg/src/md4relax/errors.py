"""Exception types shared across the package."""


class ParameterError(ValueError):
    """An argument lies outside the range an operation accepts."""


class ParseError(ValueError):
    """Textual input (hex, lambda strings, DIMACS, solver output) is malformed."""


class AdapterError(RuntimeError):
    """The SAT backend crashed or produced output that cannot be interpreted."""


class VerificationError(RuntimeError):
    """A model claimed to be a preimage failed independent re-checking."""
