"""Sampling designs and recovery algorithms for function approximation.

The hot kernels live in :mod:`optsample._kernels`; ``BACKEND`` reports
whether the compiled extension or the pure-Python fallback is in use.
"""

from ._kernels import BACKEND
from .leastsq import (
    FittedApproximant,
    IllPosedDesign,
    LeastSquaresSolver,
    SpectralCertificate,
    check_discretization,
    fit,
    gram,
    hyperinterpolate,
    lp_error,
    stability_constant,
)
from .lipschitz_oracle import (
    CentralReconstruction,
    CircleDesign,
    InconsistentData,
    central_reconstruct,
    exact_radius,
    expected_radius,
    optimal_error,
)
from .model import (
    Basis,
    BasisIndexError,
    Domain,
    HaarBasis,
    LegendreBasis,
    Measure,
    SampledDesign,
    TabulatedBasis,
    TargetFunction,
    TrigBasis,
    make_basis,
)
from .multilevel import MLConfig, ml_bound, ml_recover
from .random_designs import (
    RedrawCapExceeded,
    RejectionBudgetExceeded,
    christoffel_density,
    conditional_christoffel_design,
    dolbeault_chkifa_design,
    iid_design,
    optimal_rkhs_density,
)
from .scattered import cube_split, covering_radius, distortion, piecewise_recover
from .sparse import NonConvergence, SparseProblem, rip_check, sqrt_lasso
from .subsample import (
    AuxFamily,
    DimensionOverflow,
    GreedyConfig,
    OracleExhausted,
    bss_subsample,
    rkhs_tail_config,
    unweighted_subsample,
)

__version__ = "0.1.0"
