"""Exception types raised by cocyclelab."""


class DimensionError(ValueError):
    """Matrix or subspace shapes are incompatible with the operation."""


class DegenerateGapError(ValueError):
    """Two consecutive singular values are too close to separate a subspace."""


class TransversalityError(ValueError):
    """A pair of subspaces is not transverse (angle numerically zero)."""


class NormalizationError(ValueError):
    """An input was expected to be normalized, or could not be normalized."""


class RangeError(OverflowError):
    """A requested computation would overflow double precision."""


class LiftError(RuntimeError):
    """No global chart for a section of the Grassmannian could be found."""


class RefineError(RuntimeError):
    """The phase grid is too coarse to follow an argument continuously."""
