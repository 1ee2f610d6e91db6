"""Lyapunov exponents, accelerations and domination for analytic one-frequency cocycles."""
from .cocycle import (
    Cocycle,
    Frequency,
    TrigMatrixPoly,
    almost_mathieu,
    approximants,
    diag,
    evaluate,
    exterior_cocycle,
    family,
    iterate,
    load_cocycle,
    random_trig,
    scalar_winding,
    shift_imag,
)
from .domination import (
    oseledets_classification,
    scalar_multiplier_and_winding,
    singular_gap_certificate,
    splitting,
)
from .exceptions import (
    DegenerateGapError,
    DimensionError,
    LiftError,
    NormalizationError,
    RangeError,
    RefineError,
    TransversalityError,
)
from .lyapunov import (
    acceleration,
    finite_scale_exponent,
    lyapunov_spectrum,
    profile,
    rational_mean_exponent,
    regularity_check,
)

__version__ = "0.1.0"
