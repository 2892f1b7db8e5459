"""Fast Levin-Clenshaw-Curtis quadrature for highly oscillatory integrals."""

from .chebyshev import (
    BandedMatrix,
    ClenshawCurtisGrid,
    Polynomial,
    RationalFunction,
    UnsupportedRegimeError,
    apply_collocation_matrix,
    apply_inverse_collocation,
    build_banded_operator,
    cheb_endpoint_derivative,
    cheb_eval,
    clenshaw_curtis_points,
    dct1_forward,
    dct1_inverse,
    fold_operator,
    mult_x_operator,
    weighted_diff_operator,
)
from .banded import (
    BandedLU,
    BlockPermutation,
    SingularMatrixError,
    banded_lu_factor,
    banded_solve,
    dense_solve,
    hockney_permutation,
    reorder_block_banded,
)
from .oscillator import (
    AmplitudeSpec,
    OscillatorSystem,
    PoleInIntervalError,
    StationaryPointError,
    bessel_eval,
    make_bessel,
    make_exponential,
    parse_oscillator_config,
    serialize_system,
    validate_system,
)
from .levin import (
    LevinProblem,
    QuadratureResult,
    UnsolvableProblemError,
    null_vectors_scalar,
    quadrature,
    solve_block_s,
    solve_block_s0,
    solve_interior_scalar,
    solve_scalar_s,
    solve_scalar_s0,
)
from .reference import cc_oracle, dense_levin_solve, oracle_value
from .amplitudes import make_amplitude, manufactured_amplitude, manufactured_expected_value

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
