"""orbitkit: integration, sampling and linear optimisation over unitary adjoint orbits."""
from .errors import DomainError, NumericalError, OrbitkitError, ShiftRequiredError, SizeError
from .linalg import (
    Permutation, Spectrum, as_spectrum, det_complex, eigh, eigvalsh, frobenius_inner,
    vandermonde,
)
from .randlie import (
    MonteCarloEstimate, RandomSource, haar_unitary, mc_expectation, sample_orbit_uniform,
)
from .schur_horn import (
    BirkhoffDecomposition, birkhoff_decompose, horn_construct, is_majorized, min_eigenvalue,
    min_orbit_linear, unistochastic,
)
from .partition import (
    MultiIndex, bombieri_moment, dd_exp, log_partition_gradient, partition_p1,
    simplex_monomial_integral,
)
from .hciz import (
    InterlacingVector, baryshnikov_density, hciz_det, hciz_via_induction, hciz_weyl_sum,
    interlaces,
)
from .samplers import (
    CornersChain, sample_bingham_rank1, sample_corners_chain, sample_minor_eigs,
    sample_simplex_exponential,
)

__version__ = "0.1.0"
