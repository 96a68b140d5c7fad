"""Direct and inverse spectral problems for complex periodic Jacobi-type matrices."""

from .direct import DirectReport, check_necessary_conditions, classify_and_verify, full_spectrum
from .errors import (
    Breakdown,
    InfeasibleBranch,
    InvalidData,
    InvalidMatrix,
    InvalidMeasure,
    NonConvergence,
    OracleOverflow,
    ParseError,
    SpecbandError,
    VerificationFailed,
)
from .inverse import (
    BranchSolution,
    FeasibilityReport,
    SpectralData,
    branch_candidates,
    enumerate_solutions,
    feasibility_check,
    jacobi_from_measure,
    reconstruct_branch,
    verify_reconstruction,
)
from .matrices import PeriodicMatrixGeneral, PeriodicMatrixHat, beta_of, canonicalize, charpoly_oracle
from .poly import ComplexPolynomial, numerator_from_partial_fractions, poly_from_roots, poly_roots

__version__ = "0.1.0"
