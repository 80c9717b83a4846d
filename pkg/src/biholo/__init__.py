"""Convexity and starlikeness of order alpha for holomorphic maps of the unit ball of C^n."""

from .criteria import (
    CertificateReport,
    a_alpha,
    beta_of_alpha,
    coeff_certificate_convex,
    coeff_certificate_starlike,
    convexity_margin,
    derivative_bound_certificate,
    covering_constant,
    growth_bounds,
    growth_check,
    starlike_margin,
)
from .linalg import EPS_STRICT, NotLocallyBiholomorphic, inner, norm, solve
from .mappings import (
    Mapping,
    PhiMapping,
    PolynomialMapping,
    RankOneQuadratic,
    alexander_transform,
    identity_mapping,
    phi_inv_d2,
)
from .multilinear import NormConfig, SymTensor, op_norm
from .search import SearchConfig, Witness, find_witness, seeded_witness

__version__ = "0.1.0"
