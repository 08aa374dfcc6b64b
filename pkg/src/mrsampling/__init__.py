"""Reconstruction and quadrature from nonuniform samples in GP spline spaces.

Refinable GP masks and their biorthogonal duals, multiresolution spaces on
intervals and rectangles, quasi-interpolation from scattered samples and
the two iterations built on it: RESTORE (function recovery) and INTEGRATE
(quadrature).
"""

from .duals import (
    BiorthReport,
    DualError,
    DualSpec,
    solve_dual_mask,
    symbol_identity_residual,
    verify_biorthogonality,
)
from .geometry import BoxDomain, Cells, voronoi_cells
from .integration import IntegrationTrace, WeightVector, basis_weights, integrate, polynomial_exactness_check
from .reconstruction import (
    DivergenceError,
    OperatorPack,
    RestoreState,
    assemble_pack,
    contraction_estimate,
    restore,
)
from .refinable import CascadeError, DyadicFunction, Mask, MaskError, cascade_evaluate, gp_mask, haar_mask
from .sampling import (
    DensityCertificate,
    SamplingSet,
    check_delta_dense,
    oscillation,
    quasi_interpolate_Q,
    quasi_interpolate_S,
    quasi_interpolate_V,
)
from .spaces import (
    Basis,
    CanonicalDual,
    CompactDual,
    build_interval_basis,
    condition_number,
    gramian,
    tensor_basis,
)

__version__ = "0.1.0"

__all__ = [
    "BiorthReport", "DualError", "DualSpec", "solve_dual_mask", "symbol_identity_residual",
    "verify_biorthogonality", "BoxDomain", "Cells", "voronoi_cells", "IntegrationTrace", "WeightVector",
    "basis_weights", "integrate", "polynomial_exactness_check", "DivergenceError", "OperatorPack",
    "RestoreState", "assemble_pack", "contraction_estimate", "restore", "CascadeError", "DyadicFunction",
    "Mask", "MaskError", "cascade_evaluate", "gp_mask", "haar_mask", "DensityCertificate", "SamplingSet",
    "check_delta_dense", "oscillation", "quasi_interpolate_Q", "quasi_interpolate_S", "quasi_interpolate_V",
    "Basis", "CanonicalDual", "CompactDual", "build_interval_basis", "condition_number", "gramian",
    "tensor_basis",
]
