"""Exception hierarchy shared by all homsum modules.

Two branches matter to callers: ValidationError (bad inputs, CLI exit 2)
and CapacityError (a requested computation exceeds a hard size cap,
CLI exit 3).
"""


class HomsumError(Exception):
    pass


class ValidationError(HomsumError):
    pass


class CapacityError(HomsumError):
    pass


class NonCanonicalTuple(ValidationError):
    """Entry tuple is not strictly increasing (diagonal or unsorted)."""


class IndexOutOfRange(ValidationError):
    """Index outside 1..N."""


class DuplicateTuple(ValidationError):
    """Same canonical tuple supplied twice."""


class DimensionMismatch(ValidationError):
    """Vector or tuple length does not match the kernel."""


class ZeroKernel(ValidationError):
    """Operation requires a kernel with nonzero norm."""


class UnsupportedFamilyParameters(ValidationError):
    """Family parameters outside the supported range."""


class RankOutOfRange(ValidationError):
    """Contraction rank r outside 0..d."""


class OddOrder(ValidationError):
    """Operation requires an even kernel order."""


class InvalidDegrees(ValidationError):
    """Chi-square degrees of freedom must be a positive integer."""


class NotNormalized(ValidationError):
    """Kernel second moment is not the required value."""


class NotNormalizedToTwoNu(NotNormalized):
    """Kernel second moment is not 2*nu."""


class ParameterOutOfRange(ValidationError):
    """Numeric parameter outside the admissible range."""


class OrderMismatch(ValidationError):
    """Kernel orders supplied in the wrong relation (need d_i <= d_j)."""


class InvalidCovariance(ValidationError):
    """Covariance matrix is not symmetric nonnegative definite."""


class MaterializationTooLarge(CapacityError):
    """Dense tensor would exceed the materialization cap."""


class EnumerationTooLarge(CapacityError):
    """Exact sign enumeration would exceed the 2^N cap."""
