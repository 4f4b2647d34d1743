"""Exception hierarchy for kernel validation, measure queries and pipeline stages.

Every failure mode gets its own class so callers (and the CLI exit-code
mapping) can distinguish bad input from a genuinely violated certificate.
``CertificateError`` is special: the inequalities it guards are theorems for
the discrete model, so raising it indicates an implementation bug rather
than bad data.
"""


class GraphonError(Exception):
    """Base class for all library errors."""


class NonSquareError(GraphonError, ValueError):
    """Kernel table is not a square 2-d matrix."""


class ValueOutOfRangeError(GraphonError, ValueError):
    """Kernel or function entry outside its admissible range (or non-finite)."""


class AsymmetricError(GraphonError, ValueError):
    """Kernel deviates from symmetry beyond the 1e-12 tolerance."""


class ZeroDegreeCellError(GraphonError, ValueError):
    """A cell has degree zero although positive degrees were required."""


class DisconnectedError(GraphonError, ValueError):
    """The positive-weight cell graph is not connected."""


class DimensionMismatchError(GraphonError, ValueError):
    """Operands live on different cell counts."""


class EmptySetError(GraphonError, ValueError):
    """Operation requires a nonempty cell set."""


class ZeroVolumeError(GraphonError, ValueError):
    """Set has zero vertex measure; expansion is undefined."""


class ZeroFunctionError(GraphonError, ValueError):
    """Function is zero in the degree-weighted inner product."""


class KTooLargeError(GraphonError, ValueError):
    """Requested more eigenpairs than the step space supports."""


class NonUnitVectorError(GraphonError, ValueError):
    """Direction vector is not unit length within 1e-12."""


class IndexOutOfRangeError(GraphonError, IndexError):
    """Cell index outside 0..n-1."""


class MassShortfallError(GraphonError, RuntimeError):
    """No sampled grid shift reached the required retained mass."""


class InsufficientSetsError(GraphonError, RuntimeError):
    """Merging produced fewer than k sets of mass >= 1/2."""


class SeparationError(GraphonError, ValueError):
    """Anchor sets are closer than the required pseudo-metric gap."""


class MassError(GraphonError, ValueError):
    """Anchor set mass below the required 1/2."""


class CertificateError(GraphonError, AssertionError):
    """A quantity violated an inequality that is a theorem for this model."""


class OverlappingSetsError(GraphonError, ValueError):
    """Supposedly disjoint cell sets intersect."""


class TooLargeError(GraphonError, ValueError):
    """Exhaustive enumeration would exceed the configured budget."""


class ParseError(GraphonError, ValueError):
    """Input file could not be parsed."""


class BlockMisalignmentError(GraphonError, ValueError):
    """Block-model preset blocks do not divide the cell count."""
