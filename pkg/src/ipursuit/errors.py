"""Exception types shared across the package.

Everything derives from IPursuitError so callers can catch the whole family;
the concrete classes also subclass the matching builtin (ValueError or
IndexError) to stay friendly to generic handlers.
"""


class IPursuitError(Exception):
    """Base class for all errors raised by this package."""


class EmptyMatrix(IPursuitError, ValueError):
    """A matrix argument has zero rows or zero columns where data is required."""


class NonFinite(IPursuitError, ValueError):
    """A numeric argument contains NaN or infinity."""


class DimensionMismatch(IPursuitError, ValueError):
    """Two operands live in different ambient dimensions."""


class InvalidDim(IPursuitError, ValueError):
    """A requested dimension is out of range."""


# The data generator validates several dimensions at once.
InvalidDims = InvalidDim


class NotOrthogonal(IPursuitError, ValueError):
    """Supplied bases overlap where orthogonality is required."""


class RankDeficient(IPursuitError, ValueError):
    """A matrix lost rank where full rank is required."""


class ZeroCoefficient(IPursuitError, ValueError):
    """A coefficient vector has (numerically) zero norm and cannot be normalized."""


class IndexOutOfRange(IPursuitError, IndexError):
    """A column/point index is outside the matrix."""


class TooLarge(IPursuitError, ValueError):
    """Problem size exceeds a guard intended for exact reference routines."""


class ShapeMismatch(IPursuitError, ValueError):
    """Array shapes are inconsistent with each other."""


class IsolatedNode(IPursuitError, ValueError):
    """A graph node has (numerically) zero degree."""

    def __init__(self, node):
        super().__init__(f"node {node} has zero degree")
        self.node = node


class InvalidK(IPursuitError, ValueError):
    """Requested number of clusters is impossible for the given data."""


class RankTooLow(IPursuitError, ValueError):
    """Cannot drop the requested number of leading directions."""


class DegeneratePoint(IPursuitError, ValueError):
    """A data point collapses to (numerically) zero under a projection."""

    def __init__(self, index):
        super().__init__(f"point {index} has no energy left after projection")
        self.index = index


class TooFewValues(IPursuitError, ValueError):
    """A sequence argument is too short."""


class DomainError(IPursuitError, ValueError):
    """Scalar inputs are outside the mathematical domain of a formula."""


class MissingLabels(IPursuitError, ValueError):
    """Ground-truth labels are required but absent."""


class NotInSpan(IPursuitError, ValueError):
    """Points do not lie in the span of the supplied basis."""


class LengthMismatch(IPursuitError, ValueError):
    """Two sequences that must align have different lengths."""


class ParseError(IPursuitError, ValueError):
    """A CSV cell could not be parsed."""

    def __init__(self, line, message):
        super().__init__(f"line {line}: {message}")
        self.line = line


class EmptyFile(IPursuitError, ValueError):
    """An input file contains no data rows."""


class ZeroRow(IPursuitError, ValueError):
    """A data row is all zeros and cannot be normalized."""

    def __init__(self, line):
        super().__init__(f"line {line}: zero row cannot be normalized to the unit sphere")
        self.line = line


class NotConverged(IPursuitError, RuntimeError):
    """Raised only where a caller explicitly demands convergence."""
