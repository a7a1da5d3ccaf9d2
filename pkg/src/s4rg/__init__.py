"""Real-space decimation RG for the S^4 spin model on a triangular lattice."""

from .poly import SpinPolynomial, BasisCoefficients, AsymmetryError, project_basis, var, const
from .gauss import GaussianBlock, CumulantResult, central_moment, wick_moment, log_norm, expectation, cumulant_map
from .maps import (
    Couplings, Case, Backend, RGCase, RGMap, CoefficientBlocks, DomainError, RescaleFailure,
    nn_coeffs, field_coeffs, nnn_coeffs, derive_coeffs, rescale_extract, rg_step,
)
from .fixed_points import FixedPointRecord, Kind, find_fixed_points, jacobian, eigenvalues, classify
from .exponents import ExponentSet, scale_powers, exponent_set, identity_residuals
from .flow import FlowTrace, Terminal, trace, basin_scan

__version__ = "0.1.0"
