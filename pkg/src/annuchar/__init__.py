"""Numerical value-distribution calculus for meromorphic functions on annuli.

Builds the two-parameter characteristic T(tau, r; f) = N + m + c log(tau/r)
from circle quadrature and exact rational counting, and verifies the
identities it satisfies (Jensen-type identities, unit-circle averaging,
the Cartan average, the first fundamental identity, and the structural
properties of the T surface).
"""

from .funcdsl import (
    DslError,
    ExpressionFunction,
    FunctionModel,
    ParseError,
    RationalFunction,
    SingularPointError,
    constant,
    parse,
    rational,
    unparse,
)
from .quad import (
    Arc,
    ArcLabel,
    ArcPartition,
    QuadConfig,
    QuadratureResult,
    arc_integrate,
    classify_circle,
    periodic_integrate,
)
from .oracle import (
    PolyCoeffs,
    RootFindingError,
    as_rational,
    poly_roots,
    solve_a_points,
)
from .winding import (
    BoundaryRootError,
    CountingData,
    IntegralityError,
    OnCircleSingularityError,
    UnsupportedCountError,
    argument_principle_residuals,
    circle_index,
    count_a_points,
    exact_circle_index,
    locate_jump_radii,
)
from .annuluschar import (
    AnnulusWindow,
    CharacteristicReport,
    FftReport,
    PoleEnumerationError,
    ScanReport,
    annulus_counting,
    boundary_constant,
    cartan_average_residual,
    characteristic,
    classical_characteristic,
    first_fundamental,
    index_shift_residual,
    jensen_annulus_residual,
    jensen_two_circle_residual,
    property_scan,
    proximity,
    proximity_annulus,
    torus_average_residual,
    unit_index_average_residual,
)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    # funcdsl
    "DslError",
    "ParseError",
    "SingularPointError",
    "FunctionModel",
    "RationalFunction",
    "ExpressionFunction",
    "parse",
    "unparse",
    "rational",
    "constant",
    # quad
    "QuadConfig",
    "QuadratureResult",
    "Arc",
    "ArcLabel",
    "ArcPartition",
    "periodic_integrate",
    "arc_integrate",
    "classify_circle",
    # oracle
    "PolyCoeffs",
    "RootFindingError",
    "poly_roots",
    "solve_a_points",
    "as_rational",
    # winding
    "CountingData",
    "IntegralityError",
    "OnCircleSingularityError",
    "UnsupportedCountError",
    "BoundaryRootError",
    "circle_index",
    "exact_circle_index",
    "count_a_points",
    "locate_jump_radii",
    "argument_principle_residuals",
    # annuluschar
    "AnnulusWindow",
    "CharacteristicReport",
    "FftReport",
    "ScanReport",
    "PoleEnumerationError",
    "proximity",
    "proximity_annulus",
    "annulus_counting",
    "boundary_constant",
    "characteristic",
    "classical_characteristic",
    "first_fundamental",
    "jensen_two_circle_residual",
    "jensen_annulus_residual",
    "cartan_average_residual",
    "unit_index_average_residual",
    "index_shift_residual",
    "torus_average_residual",
    "property_scan",
]
