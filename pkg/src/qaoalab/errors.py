"""Shared exception types."""


class CapacityError(ValueError):
    """Raised when a request exceeds a hard size cap (qubits, enumeration)."""


class ConventionError(ValueError):
    """Raised when a bit string's convention tag does not match the consumer."""


class GraphFormatError(ValueError):
    """Raised on malformed edge-list or string-batch files."""
