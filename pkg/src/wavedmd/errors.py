"""Exception types shared across the package."""


class EdgeListParseError(ValueError):
    """Malformed edge-list input; carries the offending 1-based line number."""

    def __init__(self, lineno, message):
        super().__init__(f"line {lineno}: {message}")
        self.lineno = lineno


class GraphValidationError(ValueError):
    """Graph violates a structural invariant (weights, self-loops, duplicates)."""


class DisconnectedGraphError(ValueError):
    """Graph is disconnected or has an isolated node."""


class WaveOverflowError(RuntimeError):
    """Wave amplitudes blew up; the wave speed or the Laplacian is broken."""


class DegenerateSignalError(ValueError):
    """Signal carries no usable information (all-zero trace, rank collapse)."""


class InsufficientModesError(ValueError):
    """Fewer recovered modes than the clustering step needs."""


class RankDeficientModesError(ValueError):
    """Mode matrix is rank deficient; duplicate frequencies survived dedup."""
